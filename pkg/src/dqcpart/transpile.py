"""Rewrite gate lists into the U/CP basis with single-qubit merging."""
from __future__ import annotations

import math

import numpy as np

from .circuit import CP, MARKERS, Gate, U, u_angles, u_matrix
from .errors import UnsupportedGate

_PI = math.pi


def _single_matrix(g: Gate) -> np.ndarray:
    n, p = g.name, g.params
    if n == "u" or n == "u3":
        return u_matrix(*p)
    if n == "u2":
        return u_matrix(_PI / 2, p[0], p[1])
    if n in ("u1", "p"):
        return u_matrix(0.0, 0.0, p[0])
    if n == "rz":
        return u_matrix(0.0, 0.0, p[0])
    if n == "rx":
        return u_matrix(p[0], -_PI / 2, _PI / 2)
    if n == "ry":
        return u_matrix(p[0], 0.0, 0.0)
    fixed = {
        "h": (_PI / 2, 0.0, _PI),
        "x": (_PI, 0.0, _PI),
        "y": (_PI, _PI / 2, _PI / 2),
        "z": (0.0, 0.0, _PI),
        "s": (0.0, 0.0, _PI / 2),
        "sdg": (0.0, 0.0, -_PI / 2),
        "t": (0.0, 0.0, _PI / 4),
        "tdg": (0.0, 0.0, -_PI / 4),
    }
    if n in fixed:
        return u_matrix(*fixed[n])
    raise UnsupportedGate(n)


_H = u_matrix(_PI / 2, 0.0, _PI)


def _is_identity(m: np.ndarray, tol: float = 1e-12) -> bool:
    return abs(m[0, 1]) <= tol and abs(m[1, 0]) <= tol and abs(m[1, 1] - m[0, 0]) <= tol


def transpile_to_ucp(gates) -> list[Gate]:
    """Map a gate list onto {U, CP}, merging runs of single-qubit gates per qubit.

    Markers pass through and act as merge boundaries on their qubits. Single-qubit
    products equal to the identity up to global phase are dropped.
    """
    out: list[Gate] = []
    pending: dict[int, np.ndarray] = {}

    def push(q: int, m: np.ndarray):
        pending[q] = m @ pending[q] if q in pending else m

    def flush(q: int):
        m = pending.pop(q, None)
        if m is not None and not _is_identity(m):
            out.append(U(*u_angles(m), q))

    def cp(theta: float, a: int, b: int):
        flush(a)
        flush(b)
        out.append(CP(theta, a, b))

    def cx(a: int, b: int):
        push(b, _H)
        cp(_PI, a, b)
        push(b, _H)

    for g in gates:
        n = g.name
        if n in MARKERS:
            for q in g.qubits:
                flush(q)
            out.append(g)
        elif len(g.qubits) == 1:
            push(g.qubits[0], _single_matrix(g))
        elif n in ("cp", "cu1"):
            cp(g.params[0], *g.qubits)
        elif n == "cz":
            cp(_PI, *g.qubits)
        elif n == "cx":
            cx(*g.qubits)
        elif n == "swap":
            a, b = g.qubits
            cx(a, b)
            cx(b, a)
            cx(a, b)
        else:
            raise UnsupportedGate(n)
    for q in sorted(pending):
        flush(q)
    return out
