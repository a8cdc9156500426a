"""Benchmark circuit families: CP-fraction, QFT, QAOA MaxCut and quantum-volume-like."""
from __future__ import annotations

import math

import numpy as np

from .circuit import CP, Gate, LayeredCircuit, U, schedule_layers


def _angles(rng: np.random.Generator) -> tuple[float, float, float]:
    theta, phi, lam = rng.uniform(0, 2 * math.pi, size=3)
    return float(theta), float(phi), float(lam)


def gen_cp_fraction(n_q: int, d: int, p: float, seed: int = 0) -> LayeredCircuit:
    """Random layers where each qubit gets a U with probability ``1 - p``.

    The remaining qubits are paired at random and each pair gets a CP; an odd
    leftover qubit idles for that layer.
    """
    if not 0 <= p <= 1 or n_q < 2 or d < 1:
        raise ValueError("need 0 <= p <= 1, n_q >= 2, d >= 1")
    rng = np.random.default_rng(seed)
    layers = []
    for _ in range(d):
        layer: list[Gate] = []
        single = rng.random(n_q) < 1 - p
        for q in np.flatnonzero(single):
            layer.append(U(*_angles(rng), int(q)))
        rest = rng.permutation(np.flatnonzero(~single))
        for i in range(0, len(rest) - 1, 2):
            layer.append(CP(float(rng.uniform(0, 2 * math.pi)), int(rest[i]), int(rest[i + 1])))
        layers.append(layer)
    return LayeredCircuit(n_q, layers)


def qft_gates(n_q: int) -> list[Gate]:
    """QFT without the final swap network.

    Qubit ``n_q - 1`` is processed first; each qubit ``j`` gets H then controlled
    phases toward all lower qubits, so ``j`` is the first operand of ``j`` CP gates.
    """
    gates: list[Gate] = []
    for j in range(n_q - 1, -1, -1):
        gates.append(U(math.pi / 2, 0.0, math.pi, j))
        for k in range(j - 1, -1, -1):
            gates.append(CP(math.pi / 2 ** (j - k), j, k))
    return gates


def gen_qft(n_q: int) -> LayeredCircuit:
    return schedule_layers(qft_gates(n_q), n_q)


def gen_qaoa(n_q: int, edge_prob: float = 0.5, layers: int = 1, seed: int = 0) -> LayeredCircuit:
    """MaxCut QAOA on an Erdos-Renyi graph.

    Each graph edge contributes one CP(-2 gamma) and diagonal phase U's on both
    endpoints (exp(-i gamma Z Z) up to global phase); the mixer is RX(2 beta).
    """
    rng = np.random.default_rng(seed)
    edges = _draw_edges(rng, n_q, edge_prob)
    gates = [U(math.pi / 2, 0.0, math.pi, q) for q in range(n_q)]
    for _ in range(layers):
        gamma, beta = (float(x) for x in rng.uniform(0, math.pi, size=2))
        for i, j in edges:
            gates.append(CP(-4 * gamma, i, j))
            gates.append(U(0.0, 0.0, 2 * gamma, i))
            gates.append(U(0.0, 0.0, 2 * gamma, j))
        for q in range(n_q):
            gates.append(U(2 * beta, -math.pi / 2, math.pi / 2, q))
    return schedule_layers(gates, n_q)


def qaoa_edges(n_q: int, edge_prob: float, seed: int) -> list[tuple[int, int]]:
    """The interaction graph drawn by :func:`gen_qaoa` for the same arguments."""
    return _draw_edges(np.random.default_rng(seed), n_q, edge_prob)


def _draw_edges(rng: np.random.Generator, n_q: int, edge_prob: float) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n_q) for j in range(i + 1, n_q) if rng.random() < edge_prob]


def _nondiag_u(rng: np.random.Generator, q: int) -> Gate:
    theta = float(rng.uniform(0.1, math.pi - 0.1))
    phi, lam = (float(x) for x in rng.uniform(0, 2 * math.pi, size=2))
    return U(theta, phi, lam, q)


def gen_qv(n_q: int, layers: int = 1, seed: int = 0) -> LayeredCircuit:
    """Quantum-volume-like circuit built from structural SU(4) blocks.

    Each block is U U, CP, U U, CP, U U, CP, U U with non-diagonal U's, so no two
    CP gates of a block can share a root without an intervening non-diagonal gate.
    """
    rng = np.random.default_rng(seed)
    gates: list[Gate] = []
    for _ in range(layers):
        perm = rng.permutation(n_q)
        for i in range(0, n_q - 1, 2):
            a, b = int(perm[i]), int(perm[i + 1])
            for k in range(4):
                gates.append(_nondiag_u(rng, a))
                gates.append(_nondiag_u(rng, b))
                if k < 3:
                    gates.append(CP(float(rng.uniform(0, 2 * math.pi)), a, b))
    return schedule_layers(gates, n_q)
