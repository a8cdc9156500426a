"""Shared fixtures: random circuits and random feasible assignments."""
import math

import numpy as np

from dqcpart.circuit import CP, U, schedule_layers
from dqcpart.cost import Assignment


def random_circuit(n, n_gates, seed, diag_frac=0.3, anti_frac=0.15, cp_frac=0.5):
    """Random U/CP circuit with a controllable share of diagonal and anti-diagonal U gates."""
    rng = np.random.default_rng(seed)
    gates = []
    for _ in range(n_gates):
        if rng.random() < cp_frac:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(CP(float(rng.uniform(0, 2 * math.pi)), int(a), int(b)))
        else:
            q = int(rng.integers(n))
            r = rng.random()
            phi, lam = (float(x) for x in rng.uniform(0, 2 * math.pi, 2))
            theta = 0.0 if r < diag_frac else math.pi if r < diag_frac + anti_frac \
                else float(rng.uniform(0.2, math.pi - 0.2))
            gates.append(U(theta, phi, lam, q))
    return schedule_layers(gates, n)


def random_assignment(h, K, cap, seed):
    """Uniformly shuffled feasible assignment, independent per layer."""
    rng = np.random.default_rng(seed)
    if cap is None:
        cap = -(-h.n_q // K)
    cap = np.broadcast_to(np.asarray(cap), (K,))
    slots = np.repeat(np.arange(K), cap)
    rows = [rng.permutation(slots)[: h.n_q] for _ in h.times]
    return Assignment(np.array(rows), K, cap.copy(), list(h.times))


def optimal_cost_dp(h, K, cap):
    """Exact optimum for ungrouped graphs by dynamic programming over layer rows.

    Cost splits into per-layer gate cuts plus Hamming distances between
    consecutive rows, so a Viterbi sweep over all feasible rows is exact.
    """
    import itertools

    cap = np.broadcast_to(np.asarray(cap), (K,))
    rows = [r for r in itertools.product(range(K), repeat=h.n_q)
            if all(r.count(k) <= cap[k] for k in range(K))]
    gates = {t: [] for t in h.times}
    for e in h.edges.values():
        if e.kind == "gate":
            gates[e.root[0].time].append((e.root[0].qubit, e.rec[0].qubit))
        elif e.kind != "state":
            raise ValueError("DP oracle handles ungrouped graphs only")
    R = np.array(rows)
    ham = (R[:, None, :] != R[None, :, :]).sum(axis=2)
    best = None
    for t in h.times:
        local = np.array([sum(r[a] != r[b] for a, b in gates[t]) for r in rows])
        best = local if best is None else (best[:, None] + ham).min(axis=0) + local
    return int(best.min())


def plateau_instance(d=8):
    """3 qubits, K=2, cap 2: q1 is anchored to q0 at both ends and talks to q2 in between.

    From the static placement every improving sequence needs three moves
    (+1, -1, -1), so exploit-only FM with a move cap of 2 cannot leave it.
    """
    from dqcpart.circuit import CP, LayeredCircuit

    layers = [[CP(0.3, 0, 1)]] + [[CP(0.3, 1, 2)] for _ in range(d - 2)] + [[CP(0.3, 0, 1)]]
    return LayeredCircuit(3, layers)
