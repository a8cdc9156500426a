import math

import pytest
from helpers import random_assignment, random_circuit
from hypothesis import given, settings
from hypothesis import strategies as st

from dqcpart.circuit import CP, LayeredCircuit, U
from dqcpart.cost import total_cost
from dqcpart.generators import gen_qft, gen_qv
from dqcpart.grouping import Diag, diagonality, greedy_grouping
from dqcpart.hypergraph import GATE, GROUP, NodeRef, build_temporal_graph


@pytest.mark.parametrize("theta,kind", [
    (0.0, Diag.DIAGONAL), (2 * math.pi, Diag.DIAGONAL), (-2 * math.pi, Diag.DIAGONAL),
    (1e-12, Diag.DIAGONAL), (math.pi, Diag.ANTI_DIAGONAL), (-math.pi, Diag.ANTI_DIAGONAL),
    (3 * math.pi, Diag.ANTI_DIAGONAL), (math.pi / 2, Diag.NEITHER), (1e-6, Diag.NEITHER),
])
def test_diagonality(theta, kind):
    assert diagonality(theta) is kind


def test_shared_root_forms_group():
    circ = LayeredCircuit(3, [[CP(0.1, 0, 1)], [CP(0.2, 0, 2)]])
    g = greedy_grouping(build_temporal_graph(circ))
    (e,) = [e for e in g.edges.values() if e.kind == GROUP]
    assert e.root == (NodeRef(0, 1), NodeRef(0, 2))
    assert e.rec == (NodeRef(1, 1), NodeRef(2, 2))
    assert e.attr == (0.1, 0.2)
    assert g.count(GATE) == 0


def test_non_diagonal_u_breaks_group():
    circ = LayeredCircuit(3, [[CP(0.1, 0, 1)], [U(0.5, 0, 0, 0)], [CP(0.2, 0, 2)]])
    g = greedy_grouping(build_temporal_graph(circ))
    assert g.count(GROUP) == 0 and g.count(GATE) == 2


def test_diagonal_and_anti_diagonal_u_keep_group():
    for theta in (0.0, math.pi):
        circ = LayeredCircuit(3, [[CP(0.1, 0, 1)], [U(theta, 0.3, 0.2, 0)], [CP(0.2, 0, 2)]])
        g = greedy_grouping(build_temporal_graph(circ))
        (e,) = [e for e in g.edges.values() if e.kind == GROUP]
        assert len(e.root) == 3


def test_u_on_receiver_does_not_break():
    circ = LayeredCircuit(3, [[CP(0.1, 0, 1)], [U(0.5, 0, 0, 1)], [CP(0.2, 0, 2)]])
    assert greedy_grouping(build_temporal_graph(circ)).count(GROUP) == 1


def test_receiver_becomes_root_of_larger_side():
    # q0 collects 2 receivers, then CP(2, 0) keeps q0 as root; q2's own group is closed
    circ = LayeredCircuit(4, [[CP(0.1, 0, 1), CP(0.3, 2, 3)], [CP(0.2, 0, 3)], [CP(0.4, 2, 0)]])
    g = greedy_grouping(build_temporal_graph(circ))
    groups = [e for e in g.edges.values() if e.kind == GROUP]
    assert len(groups) == 1
    assert groups[0].root[0].qubit == 0 and len(groups[0].rec) == 3
    assert g.count(GATE) == 1


def test_tie_goes_to_first_operand():
    circ = LayeredCircuit(2, [[CP(0.1, 1, 0)], [CP(0.2, 1, 0)]])
    (e,) = [e for e in greedy_grouping(build_temporal_graph(circ)).edges.values() if e.kind == GROUP]
    assert e.root[0].qubit == 1


def test_idempotent():
    g = greedy_grouping(build_temporal_graph(random_circuit(6, 80, seed=4)))
    assert greedy_grouping(g).dump() == g.dump()


def test_qft_structure():
    for n in (4, 8, 16):
        g = greedy_grouping(build_temporal_graph(gen_qft(n)))
        groups = sorted(len(e.rec) for e in g.edges.values() if e.kind == GROUP)
        assert groups == list(range(2, n))
        assert g.count(GATE) == 1


def test_qv_has_no_groups():
    for seed in range(5):
        g = greedy_grouping(build_temporal_graph(gen_qv(8, 4, seed)))
        assert g.count(GROUP) == 0


def _check_group_invariants(circ, g):
    cps = {(t, frozenset(x.qubits)): x for t, layer in enumerate(circ.layers, 1) for x in layer if x.name == "cp"}
    seen = []
    for e in g.edges.values():
        if e.kind == GATE:
            seen.append((e.root[0].time, frozenset((e.root[0].qubit, e.rec[0].qubit))))
        elif e.kind == GROUP:
            root_q = {v.qubit for v in e.root}
            assert len(root_q) == 1 and len(e.rec) >= 2
            (rq,) = root_q
            times = [v.time for v in e.root]
            assert times == list(range(times[0], times[-1] + 1))
            rec_times = [v.time for v in e.rec]
            assert rec_times == sorted(set(rec_times))
            assert rec_times[0] == times[0] and rec_times[-1] == times[-1]
            for v, theta in zip(e.rec, e.attr):
                key = (v.time, frozenset((rq, v.qubit)))
                assert cps[key].params[0] == theta
                seen.append(key)
            for t in times:
                if t not in rec_times:
                    attrs = g.node_attrs.get(NodeRef(rq, t))
                    assert attrs is None or diagonality(attrs[0]) is not Diag.NEITHER
                    assert not any(rq in k[1] for k in cps if k[0] == t)
    assert sorted(seen, key=repr) == sorted(cps, key=repr)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 1), st.floats(0, 0.5))
def test_grouping_invariants(seed, diag_frac, anti_frac):
    circ = random_circuit(6, 40, seed=seed, diag_frac=diag_frac, anti_frac=anti_frac)
    _check_group_invariants(circ, greedy_grouping(build_temporal_graph(circ)))


def test_grouping_never_increases_cost():
    for i in range(20):
        circ = random_circuit(8, 60, seed=i, diag_frac=0.7)
        h = build_temporal_graph(circ)
        g = greedy_grouping(h)
        for j in range(10):
            phi = random_assignment(h, 2 + (i + j) % 3, None, 100 * i + j)
            assert total_cost(g, phi) <= total_cost(h, phi)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 1))
def test_node_degree_bound(seed, diag_frac):
    g = greedy_grouping(build_temporal_graph(random_circuit(7, 50, seed=seed, diag_frac=diag_frac)))
    assert max(len(g.incidence(v)) for v in g.nodes()) <= 4
