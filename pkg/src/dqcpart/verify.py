"""Dense statevector simulation with mid-circuit measurement and feed-forward."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import MARKERS, LayeredCircuit, u_matrix
from .errors import NonUnitaryAngle, TooManyWires
from .extraction import (
    CondX,
    CondZ,
    DistributedCircuit,
    EbitGen,
    LocalCP,
    LocalU,
    MeasureZ,
    decompose_primitives,
)

MAX_WIRES = 22
PRUNE = 1e-12
_XM = np.array([[0, 1], [1, 0]], dtype=complex)
_ZM = np.array([[1, 0], [0, -1]], dtype=complex)


def _program(circuit, num_qubits: int | None = None):
    """Normalise input to (ops, initial wires, readout wires)."""
    if isinstance(circuit, DistributedCircuit):
        dc = circuit if circuit.level == "gate" else decompose_primitives(circuit)
        return dc.ops, list(dc.initial_locations), list(dc.final_locations)
    if isinstance(circuit, LayeredCircuit):
        gates, n = circuit.flat(), circuit.num_qubits
    else:
        gates, n = list(circuit), num_qubits
        if n is None:
            raise ValueError("num_qubits is required for a bare gate list")
    ops = []
    for g in gates:
        if g.name == "u":
            ops.append(LocalU((0, g.qubits[0]), *g.params))
        elif g.name == "cp":
            ops.append(LocalCP((0, g.qubits[0]), (0, g.qubits[1]), g.params[0]))
        elif g.name not in MARKERS:
            raise ValueError(f"gate {g.name} is not in the U/CP basis")
    wires = [(0, q) for q in range(n)]
    return ops, wires, wires


class _Register:
    """Rows of state vectors (branches or shots) over a shared ordered wire list."""

    def __init__(self, wires, rows: int, max_wires: int):
        self.max_wires = max_wires
        self.wires: list = []
        self.psi = np.ones((rows, 1), dtype=complex)
        for w in wires:
            self.add_zero(w)

    def _axis(self, w) -> int:
        return self.wires.index(w)

    def _view(self):
        return self.psi.reshape((self.psi.shape[0],) + (2,) * len(self.wires))

    def _grow(self, k: int):
        if len(self.wires) + k > self.max_wires:
            raise TooManyWires(f"more than {self.max_wires} live wires")

    def add_zero(self, w):
        if w in self.wires:
            raise ValueError(f"wire {w} already live")
        self._grow(1)
        new = np.zeros((self.psi.shape[0], self.psi.shape[1], 2), dtype=complex)
        new[:, :, 0] = self.psi
        self.psi = new.reshape(self.psi.shape[0], -1)
        self.wires.append(w)

    def add_bell(self, a, b):
        self._grow(2)
        new = np.zeros((self.psi.shape[0], self.psi.shape[1], 2, 2), dtype=complex)
        new[:, :, 0, 0] = self.psi / math.sqrt(2)
        new[:, :, 1, 1] = self.psi / math.sqrt(2)
        self.psi = new.reshape(self.psi.shape[0], -1)
        self.wires += [a, b]

    def apply1(self, m: np.ndarray, w, rows=None):
        ax = self._axis(w) + 1
        v = self._view()
        if rows is None:
            v = np.moveaxis(np.tensordot(m, v, axes=([1], [ax])), 0, ax)
            self.psi = np.ascontiguousarray(v).reshape(self.psi.shape)
        else:
            sub = v[rows]
            sub = np.moveaxis(np.tensordot(m, sub, axes=([1], [ax])), 0, ax)
            v = v.copy()
            v[rows] = sub
            self.psi = v.reshape(self.psi.shape)

    def apply_cp(self, a, b, theta: float):
        v = self._view()
        idx = [slice(None)] * v.ndim
        idx[self._axis(a) + 1] = 1
        idx[self._axis(b) + 1] = 1
        v[tuple(idx)] *= np.exp(1j * theta)

    def prob_one(self, w) -> np.ndarray:
        v = self._view()
        ax = self._axis(w) + 1
        p = np.abs(np.take(v, 1, axis=ax)) ** 2
        return p.reshape(p.shape[0], -1).sum(axis=1)

    def collapse(self, w, outcome: np.ndarray):
        """Project each row onto its outcome, renormalise and drop the wire."""
        v = self._view()
        ax = self._axis(w) + 1
        zero = np.take(v, 0, axis=ax)
        one = np.take(v, 1, axis=ax)
        sel = np.where(outcome.reshape((-1,) + (1,) * (zero.ndim - 1)) == 1, one, zero)
        sel = sel.reshape(sel.shape[0], -1)
        norm = np.linalg.norm(sel, axis=1, keepdims=True)
        norm[norm == 0] = 1
        self.psi = sel / norm
        self.wires.remove(w)

    def take_rows(self, rows):
        self.psi = self.psi[rows]

    def marginal(self, readout) -> np.ndarray:
        """Per-row probabilities over readout wires; index bit i (MSB first) = readout[i]."""
        v = np.abs(self._view()) ** 2
        axes = [self._axis(w) + 1 for w in readout]
        rest = tuple(i for i in range(1, v.ndim) if i not in axes)
        v = v.sum(axis=rest) if rest else v
        order = [0] + [1 + sorted(axes).index(a) for a in axes]
        v = np.transpose(v, order)
        return v.reshape(v.shape[0], -1)


@dataclass
class Distribution:
    probs: dict[str, float]
    shots: int | None = None

    def __getitem__(self, k):
        return self.probs.get(k, 0.0)


def _last_use(ops) -> dict[int, int]:
    last: dict[int, int] = {}
    for i, op in enumerate(ops):
        if isinstance(op, (MeasureZ, CondX, CondZ)):
            last[op.bit] = i
    return last


def _check_angles(op):
    vals = [op.theta, op.phi, op.lam] if isinstance(op, LocalU) else [op.theta]
    if any(not math.isfinite(x) for x in vals):
        raise NonUnitaryAngle(f"non-finite angle in {op}")


def _run(ops, wires, max_wires: int, rng=None, shots: int = 1):
    """Execute ops, one register row per distinct measurement record.

    Exact mode (``rng`` None) carries branch probabilities as weights. Sampled mode
    carries shot counts: at each measurement a row's shots split binomially, which is
    the same law as running every shot as its own trajectory.
    """
    reg = _Register(wires, 1, max_wires)
    weights = np.array([shots], dtype=np.int64) if rng is not None else np.ones(1)
    bits: dict[int, np.ndarray] = {}
    last = _last_use(ops)
    for i, op in enumerate(ops):
        if isinstance(op, LocalU):
            _check_angles(op)
            reg.apply1(u_matrix(op.theta, op.phi, op.lam), op.wire)
        elif isinstance(op, LocalCP):
            _check_angles(op)
            reg.apply_cp(op.wire_a, op.wire_b, op.theta)
        elif isinstance(op, EbitGen):
            reg.add_bell(op.comm_a, op.comm_b)
        elif isinstance(op, MeasureZ):
            p1 = np.clip(reg.prob_one(op.wire), 0.0, 1.0)
            rows_idx = np.concatenate([np.arange(len(p1)), np.arange(len(p1))])
            out = np.concatenate([np.zeros(len(p1), np.int8), np.ones(len(p1), np.int8)])
            if rng is not None:
                k1 = rng.binomial(weights, p1)
                w = np.concatenate([weights - k1, k1])
                keep = w > 0
            else:
                w = np.concatenate([weights * (1 - p1), weights * p1])
                keep = w >= PRUNE
            rows_idx, out, weights = rows_idx[keep], out[keep], w[keep]
            reg.take_rows(rows_idx)
            bits = {b: v[rows_idx] for b, v in bits.items()}
            reg.collapse(op.wire, out)
            bits[op.bit] = out
        elif isinstance(op, (CondX, CondZ)):
            sel = np.flatnonzero(bits[op.bit] == 1)
            if len(sel):
                reg.apply1(_XM if isinstance(op, CondX) else _ZM, op.wire, sel)
        else:
            raise ValueError(f"cannot simulate {type(op).__name__}; decompose first")
        dead = [b for b in bits if last.get(b, -1) <= i]
        for b in dead:
            del bits[b]
        if dead and len(weights) > 1:
            reg, weights, bits = _merge(reg, weights, bits)
    return reg, weights


def _merge(reg: _Register, weights, bits):
    """Combine branches with equal live bits whose states agree up to global phase."""
    keys = [tuple(int(bits[b][r]) for b in sorted(bits)) for r in range(len(weights))]
    keep: list[int] = []
    new_w: list[float] = []
    for r, key in enumerate(keys):
        for j, k in enumerate(keep):
            if keys[k] == key and abs(np.vdot(reg.psi[k], reg.psi[r])) > 1 - 1e-9:
                new_w[j] += weights[r]
                break
        else:
            keep.append(r)
            new_w.append(weights[r])
    reg.take_rows(np.array(keep))
    return reg, np.array(new_w, dtype=weights.dtype), {b: v[keep] for b, v in bits.items()}


def simulate(circuit, mode: str = "exact", shots: int = 4096, seed: int = 0,
             num_qubits: int | None = None, max_wires: int = MAX_WIRES) -> Distribution:
    """Output distribution over the logical qubits (character i of a key is qubit i).

    ``circuit`` may be a LayeredCircuit, a U/CP gate list (with ``num_qubits``) or a
    DistributedCircuit. Communication wires and classical bits are traced out.
    """
    ops, wires, readout = _program(circuit, num_qubits)
    n = len(readout)
    if mode == "exact":
        reg, weights = _run(ops, wires, max_wires)
        probs = weights @ reg.marginal(readout)
        dist = {format(i, f"0{n}b"): float(p) for i, p in enumerate(probs) if p > PRUNE}
        return Distribution(dist)
    if mode != "sampled":
        raise ValueError("mode must be 'exact' or 'sampled'")
    if shots < 1:
        raise ValueError("shots must be positive")
    rng = np.random.default_rng(seed)
    reg, counts_per_row = _run(ops, wires, max_wires, rng, shots)
    marg = reg.marginal(readout)
    marg /= marg.sum(axis=1, keepdims=True)
    counts = np.zeros(2**n, dtype=np.int64)
    for m, p in zip(counts_per_row, marg):
        counts += rng.multinomial(int(m), p)
    dist = {format(i, f"0{n}b"): c / shots for i, c in enumerate(counts) if c}
    return Distribution(dist, shots)


def tvd(a: Distribution | dict, b: Distribution | dict) -> float:
    pa = a.probs if isinstance(a, Distribution) else a
    pb = b.probs if isinstance(b, Distribution) else b
    return 0.5 * sum(abs(pa.get(k, 0.0) - pb.get(k, 0.0)) for k in set(pa) | set(pb))


def sampled_tolerance(shots: int) -> float:
    """0.06 at 4096 shots, scaling as 1/sqrt(shots)."""
    return 0.06 * math.sqrt(4096 / shots)


@dataclass
class EquivalenceReport:
    passed: bool
    tvd: float
    tol: float
    mode: str


def check_equivalence(original, extracted, mode: str = "exact", tol: float | None = None,
                      shots: int = 4096, seed: int = 0, num_qubits: int | None = None) -> EquivalenceReport:
    """Compare output distributions; sampled mode samples ``extracted`` against exact ``original``."""
    ref = simulate(original, "exact", num_qubits=num_qubits)
    if mode == "exact":
        got = simulate(extracted, "exact", num_qubits=num_qubits)
        tol = 1e-6 if tol is None else tol
    else:
        got = simulate(extracted, "sampled", shots=shots, seed=seed, num_qubits=num_qubits)
        tol = sampled_tolerance(shots) if tol is None else tol
    d = tvd(ref, got)
    return EquivalenceReport(d <= tol, d, tol, mode)
