import math
import re
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dqcpart.circuit import (
    CP,
    Gate,
    LayeredCircuit,
    U,
    gates_unitary,
    schedule_layers,
    u_angles,
    u_matrix,
)
from dqcpart.errors import MalformedProgram, MultipleQuantumRegisters, UnsupportedGate
from dqcpart.generators import gen_cp_fraction, gen_qaoa, gen_qft, gen_qv, qaoa_edges
from dqcpart.qasm import parse_qasm
from dqcpart.transpile import transpile_to_ucp

DATA = Path(__file__).parent / "data"


def equal_up_to_phase(a, b, tol=1e-9):
    idx = np.unravel_index(np.argmax(np.abs(a)), a.shape)
    if abs(b[idx]) < tol:
        return False
    return np.allclose(a * (b[idx] / a[idx]), b, atol=tol)


def cnot(n, c, t):
    dim = 2**n
    m = np.zeros((dim, dim))
    for i in range(dim):
        bits = [(i >> (n - 1 - q)) & 1 for q in range(n)]
        if bits[c]:
            bits[t] ^= 1
        m[sum(b << (n - 1 - q) for q, b in enumerate(bits)), i] = 1
    return m


# -- parsing ----------------------------------------------------------------

def test_parse_basic():
    gates, n = parse_qasm("qreg q[2]; h q[0]; cx q[0],q[1];")
    assert n == 2
    assert [(g.name, g.qubits) for g in gates] == [("h", (0,)), ("cx", (0, 1))]


def test_parse_unsupported_gate():
    with pytest.raises(UnsupportedGate) as exc:
        parse_qasm("qreg q[3];\nccx q[0],q[1],q[2];")
    assert exc.value.name == "ccx"
    assert exc.value.line == 2


def test_parse_multiple_qregs():
    with pytest.raises(MultipleQuantumRegisters):
        parse_qasm("qreg a[1]; qreg b[1];")


@pytest.mark.parametrize("text", [
    "qreg q[2]; h q[5];",
    "qreg q[2]; rz(pi/) q[0];",
    "qreg q[2]; cx q[0];",
    "qreg q[2]; h q[0]",
    "h q[0];",
])
def test_parse_malformed(text):
    with pytest.raises(MalformedProgram):
        parse_qasm(text)


def test_parse_expressions_markers_and_broadcast():
    gates, n = parse_qasm('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[3]; creg c[3];\n'
                          "u3(pi/2, -pi/4, 2*pi) q[1]; // comment\nh q;\nbarrier q[0],q[2];\n"
                          "measure q -> c;")
    assert n == 3
    assert gates[0].params == pytest.approx((math.pi / 2, -math.pi / 4, 2 * math.pi))
    assert [g.name for g in gates].count("h") == 3
    assert gates[4].name == "barrier" and gates[4].qubits == (0, 2)
    assert [g.name for g in gates[-3:]] == ["measure"] * 3


def test_parse_qft16_file_matches_statement_count():
    text = (DATA / "qft_16.qasm").read_text()
    stmt = re.compile(r"^\s*(h|x|cu1\([^)]*\)|measure|barrier)\s", re.MULTILINE)
    expected = len(stmt.findall(text))
    gates, n = parse_qasm(text)
    assert n == 16
    assert len(gates) == expected
    assert sum(1 for g in gates if g.name == "cu1") == 120


# -- transpilation ----------------------------------------------------------

def test_h_becomes_single_u():
    out = transpile_to_ucp([Gate("h", (0,))])
    assert len(out) == 1 and out[0].name == "u"
    assert out[0].params == pytest.approx((math.pi / 2, 0.0, math.pi))


def test_cz_becomes_cp_pi():
    out = transpile_to_ucp([Gate("cz", (0, 1))])
    assert [(g.name, g.qubits, g.params) for g in out] == [("cp", (0, 1), (math.pi,))]


def test_cx_unitary():
    out = transpile_to_ucp([Gate("cx", (0, 1))])
    assert {g.name for g in out} == {"u", "cp"}
    assert equal_up_to_phase(gates_unitary(out, 2), cnot(2, 0, 1))


def test_identities_are_dropped_and_runs_merged():
    out = transpile_to_ucp([Gate("h", (0,)), Gate("h", (0,)), Gate("s", (1,)), Gate("t", (1,))])
    assert len(out) == 1 and out[0].qubits == (1,)
    assert out[0].params == pytest.approx((0.0, 0.0, 3 * math.pi / 4))


def test_u_angles_degenerate_cases():
    assert u_angles(u_matrix(0.0, 1.0, 0.5)) == pytest.approx((0.0, 0.0, 1.5))
    th, ph, la = u_angles(u_matrix(math.pi, 0.3, 0.9))
    assert th == pytest.approx(math.pi) and la == 0.0
    assert equal_up_to_phase(u_matrix(th, ph, la), u_matrix(math.pi, 0.3, 0.9))


ONE_Q = ["h", "x", "y", "z", "s", "sdg", "t", "tdg", "rx", "ry", "rz", "u1", "u2", "u3", "u", "p"]
TWO_Q = ["cx", "cz", "cp", "cu1", "swap"]
NPARAM = {"rx": 1, "ry": 1, "rz": 1, "u1": 1, "p": 1, "u2": 2, "u3": 3, "u": 3, "cp": 1, "cu1": 1}


def _reference_matrix(g: Gate, n: int) -> np.ndarray:
    """Unitary of one source gate from textbook definitions, independent of the transpiler."""
    c = np.cos
    s = np.sin
    e = lambda x: np.exp(1j * x)
    p = g.params
    one = {
        "h": np.array([[1, 1], [1, -1]]) / math.sqrt(2),
        "x": np.array([[0, 1], [1, 0]]),
        "y": np.array([[0, -1j], [1j, 0]]),
        "z": np.diag([1, -1]),
        "s": np.diag([1, 1j]),
        "sdg": np.diag([1, -1j]),
        "t": np.diag([1, e(math.pi / 4)]),
        "tdg": np.diag([1, e(-math.pi / 4)]),
    }
    if g.name in one:
        m = one[g.name]
    elif g.name == "rx":
        m = np.array([[c(p[0] / 2), -1j * s(p[0] / 2)], [-1j * s(p[0] / 2), c(p[0] / 2)]])
    elif g.name == "ry":
        m = np.array([[c(p[0] / 2), -s(p[0] / 2)], [s(p[0] / 2), c(p[0] / 2)]])
    elif g.name == "rz":
        m = np.diag([e(-p[0] / 2), e(p[0] / 2)])
    elif g.name in ("u1", "p"):
        m = np.diag([1, e(p[0])])
    elif g.name == "u2":
        m = np.array([[1, -e(p[1])], [e(p[0]), e(p[0] + p[1])]]) / math.sqrt(2)
    elif g.name in ("u3", "u"):
        m = u_matrix(*p)
    else:
        m = None
    dim = 2**n
    if m is not None:
        (q,) = g.qubits
        return np.kron(np.kron(np.eye(2**q), m), np.eye(2 ** (n - q - 1)))
    a, b = g.qubits
    if g.name == "cx":
        return cnot(n, a, b)
    if g.name == "swap":
        return cnot(n, a, b) @ cnot(n, b, a) @ cnot(n, a, b)
    theta = math.pi if g.name == "cz" else p[0]
    diag = [e(theta) if (i >> (n - 1 - a)) & 1 and (i >> (n - 1 - b)) & 1 else 1 for i in range(dim)]
    return np.diag(diag)


@st.composite
def programs(draw):
    n = draw(st.integers(2, 4))
    gates = []
    for _ in range(draw(st.integers(1, 12))):
        name = draw(st.sampled_from(ONE_Q + TWO_Q))
        params = tuple(draw(st.floats(-7, 7, allow_nan=False)) for _ in range(NPARAM.get(name, 0)))
        if name in TWO_Q:
            a = draw(st.integers(0, n - 1))
            b = draw(st.integers(0, n - 2))
            qs = (a, b if b < a else b + 1)
        else:
            qs = (draw(st.integers(0, n - 1)),)
        gates.append(Gate(name, qs, params))
    return n, gates


@settings(max_examples=150, deadline=None)
@given(programs())
def test_transpile_preserves_unitary(prog):
    n, gates = prog
    ref = np.eye(2**n, dtype=complex)
    for g in gates:
        ref = _reference_matrix(g, n) @ ref
    out = transpile_to_ucp(gates)
    assert all(g.name in ("u", "cp") for g in out)
    assert equal_up_to_phase(gates_unitary(out, n), ref)


# -- layering ----------------------------------------------------------------

def test_schedule_disjoint_and_conflicting():
    assert schedule_layers([U(1, 0, 0, 0), U(1, 0, 0, 1)], 2).depth == 1
    assert schedule_layers([CP(1, 0, 1), CP(1, 1, 2), CP(1, 0, 2)], 3).depth == 3


def test_layered_circuit_rejects_repeated_qubit():
    with pytest.raises(ValueError):
        LayeredCircuit(2, [[U(1, 0, 0, 0), CP(1, 0, 1)]])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_schedule_is_asap(seed):
    rng = np.random.default_rng(seed)
    n = 5
    gates = []
    for _ in range(20):
        if rng.random() < 0.5:
            a, b = rng.choice(n, 2, replace=False)
            gates.append(CP(0.1, int(a), int(b)))
        else:
            gates.append(U(0.1, 0, 0, int(rng.integers(n))))
    circ = schedule_layers(gates, n)
    # brute-force ASAP: recompute each gate's layer from its predecessors
    layer_of = {}
    for i, g in enumerate(gates):
        preds = [layer_of[j] for j in range(i) if set(gates[j].qubits) & set(g.qubits)]
        layer_of[i] = 1 + max(preds, default=0)
    expected = {}
    for i, g in enumerate(gates):
        expected.setdefault(layer_of[i], []).append(g)
    assert circ.depth == max(layer_of.values())
    for t, layer in enumerate(circ.layers, start=1):
        assert layer == expected[t]
    assert circ.flat() != [] and sorted(map(id, circ.flat())) == sorted(map(id, gates))


# -- generators -----------------------------------------------------------------

def test_cp_fraction_extremes():
    assert gen_cp_fraction(6, 5, 0.0, 1).two_qubit_count == 0
    c = gen_cp_fraction(6, 5, 1.0, 1)
    assert all(len(layer) == 3 and all(g.name == "cp" for g in layer) for layer in c.layers)


def test_cp_fraction_binomial_statistics():
    n, d, p, runs = 32, 32, 0.5, 100
    # per layer the CP count is floor(B / 2) with B ~ Binomial(n, p)
    pmf = [math.comb(n, k) * p**k * (1 - p) ** (n - k) for k in range(n + 1)]
    mean = sum(w * (k // 2) for k, w in enumerate(pmf))
    var = sum(w * (k // 2) ** 2 for k, w in enumerate(pmf)) - mean**2
    counts = np.array([gen_cp_fraction(n, d, p, s).two_qubit_count for s in range(runs)])
    sigma = math.sqrt(d * var / runs)
    assert abs(counts.mean() - d * mean) < 4 * sigma


def test_generators_are_deterministic():
    for make in (lambda: gen_cp_fraction(8, 8, 0.5, 3), lambda: gen_qaoa(8, 0.5, 2, 3),
                 lambda: gen_qv(8, 3, 3), lambda: gen_qft(8)):
        assert repr(make().layers) == repr(make().layers)


def test_qft_small_cases():
    assert [g.name for g in gen_qft(1).flat()] == ["u"]
    flat = gen_qft(2).flat()
    assert [(g.name, g.qubits) for g in flat] == [("u", (1,)), ("cp", (1, 0)), ("u", (0,))]
    assert flat[1].params == pytest.approx((math.pi / 2,))
    assert gen_qft(16).two_qubit_count == 120


def test_qft_unitary_is_dft_up_to_bit_order():
    n = 4
    u = gen_qft(n).unitary()
    N = 2**n
    rev = [int(format(i, f"0{n}b")[::-1], 2) for i in range(N)]
    dft = np.array([[np.exp(2j * math.pi * j * k / N) for k in range(N)] for j in range(N)]) / math.sqrt(N)
    # without the swap network the output register is bit-reversed
    assert equal_up_to_phase(u[rev, :][:, rev], dft) or equal_up_to_phase(u[rev, :], dft) \
        or equal_up_to_phase(u[:, rev], dft)


def test_qaoa_counts():
    assert gen_qaoa(5, 0.0, 2, 1).two_qubit_count == 0
    assert gen_qaoa(3, 1.0, 1, 1).two_qubit_count == 3
    edges = [len(qaoa_edges(16, 0.5, s)) for s in range(200)]
    assert abs(np.mean(edges) - 60) < 3 * math.sqrt(120 * 0.25) / math.sqrt(200) * 3


def test_qaoa_cost_layer_matches_zz_rotation():
    from dqcpart.generators import _draw_edges  # noqa: F401 - same draw as gen_qaoa
    c = gen_qaoa(2, 1.0, 1, 4)
    rng = np.random.default_rng(4)
    rng.random()  # the single edge draw
    gamma, beta = rng.uniform(0, math.pi, size=2)
    zz = np.diag(np.exp(-1j * gamma * np.array([1, -1, -1, 1])))
    rx = np.array([[math.cos(beta), -1j * math.sin(beta)], [-1j * math.sin(beta), math.cos(beta)]])
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    ref = np.kron(rx, rx) @ zz @ np.kron(h, h)
    assert equal_up_to_phase(c.unitary(), ref)


def test_qv_block_structure():
    c = gen_qv(2, 1, 0)
    us = [g for g in c.flat() if g.name == "u"]
    assert c.two_qubit_count == 3 and len(us) >= 8
    assert all(0.1 <= g.params[0] <= math.pi - 0.1 for g in us)
    assert gen_qv(4, 4, 7).two_qubit_count == 4 * (4 // 2) * 3
