"""Gate and layered-circuit types in the U/CP basis, plus ASAP layering."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BASIS = ("u", "cp")
MARKERS = ("measure", "barrier")


@dataclass(frozen=True)
class Gate:
    """One circuit instruction.

    ``name`` is ``"u"`` (params ``theta, phi, lam``), ``"cp"`` (param ``theta``),
    ``"measure"`` or ``"barrier"`` once transpiled; before transpilation it may be
    any gate name accepted by the QASM reader (``"h"``, ``"cx"``, ...).
    """

    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.name == "u":
            if len(self.qubits) != 1 or len(self.params) != 3:
                raise ValueError("U gate takes one qubit and three angles")
        elif self.name == "cp":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1] or len(self.params) != 1:
                raise ValueError("CP gate takes two distinct qubits and one angle")
        if any(not math.isfinite(p) for p in self.params):
            raise ValueError(f"non-finite angle in {self.name}")

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2 and self.name not in MARKERS

    def __repr__(self):
        args = ",".join(f"{p:.4g}" for p in self.params)
        qs = ",".join(map(str, self.qubits))
        return f"{self.name.upper()}({args})({qs})" if args else f"{self.name.upper()}({qs})"


def U(theta: float, phi: float, lam: float, q: int) -> Gate:
    return Gate("u", (q,), (float(theta), float(phi), float(lam)))


def CP(theta: float, a: int, b: int) -> Gate:
    return Gate("cp", (a, b), (float(theta),))


def u_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    """2x2 matrix of U(theta, phi, lam) in the OpenQASM ``u3`` convention."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]],
        dtype=complex,
    )


def cp_matrix(theta: float) -> np.ndarray:
    return np.diag([1, 1, 1, np.exp(1j * theta)]).astype(complex)


def u_angles(m: np.ndarray, tol: float = 1e-12) -> tuple[float, float, float]:
    """Recover (theta, phi, lam) with U(theta, phi, lam) equal to ``m`` up to global phase.

    At theta == 0 the phase is put entirely in ``lam`` with ``phi = 0``.
    """
    a00, a01, a10, a11 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    theta = 2 * math.atan2(abs(a10), abs(a00))
    if abs(a10) <= tol:
        return 0.0, 0.0, float(np.angle(a11) - np.angle(a00))
    if abs(a00) <= tol:
        return math.pi, float(np.angle(a10) - np.angle(-a01)), 0.0
    phi = float(np.angle(a10) - np.angle(a00))
    lam = float(np.angle(-a01) - np.angle(a00))
    return theta, phi, lam


@dataclass
class LayeredCircuit:
    """Gates grouped into time layers; layer index ``t`` runs 1..depth."""

    num_qubits: int
    layers: list[list[Gate]] = field(default_factory=list)

    def __post_init__(self):
        for t, layer in enumerate(self.layers, start=1):
            seen: set[int] = set()
            for g in layer:
                for q in g.qubits:
                    if not 0 <= q < self.num_qubits:
                        raise ValueError(f"qubit {q} out of range in layer {t}")
                    if q in seen:
                        raise ValueError(f"qubit {q} used twice in layer {t}")
                    seen.add(q)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def gates(self):
        for layer in self.layers:
            yield from layer

    @property
    def two_qubit_count(self) -> int:
        return sum(1 for g in self.gates() if g.is_two_qubit)

    def flat(self) -> list[Gate]:
        return list(self.gates())

    def unitary(self) -> np.ndarray:
        """Dense unitary (qubit 0 is the most significant bit); small circuits only."""
        return gates_unitary(self.flat(), self.num_qubits)


def gates_unitary(gates, n: int) -> np.ndarray:
    """Matrix-product unitary of a U/CP gate list; qubit 0 is the leading tensor factor."""
    dim = 2**n
    state = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for g in gates:
        if g.name == "u":
            (q,) = g.qubits
            state = np.moveaxis(np.tensordot(u_matrix(*g.params), state, axes=([1], [q])), 0, q)
        elif g.name == "cp":
            a, b = g.qubits
            idx = [slice(None)] * (n + 1)
            idx[a] = 1
            idx[b] = 1
            state[tuple(idx)] *= np.exp(1j * g.params[0])
        elif g.name in MARKERS:
            continue
        else:
            raise ValueError(f"gate {g.name} is not in the U/CP basis")
    return state.reshape(dim, dim)


def schedule_layers(gates, num_qubits: int) -> LayeredCircuit:
    """ASAP layering: each gate goes one layer after the latest earlier gate sharing a qubit.

    Measure and barrier markers are dropped.
    """
    last = [0] * num_qubits
    layers: list[list[Gate]] = []
    for g in gates:
        if g.name in MARKERS:
            continue
        t = 1 + max(last[q] for q in g.qubits)
        while len(layers) < t:
            layers.append([])
        layers[t - 1].append(g)
        for q in g.qubits:
            last[q] = t
    return LayeredCircuit(num_qubits, layers)
