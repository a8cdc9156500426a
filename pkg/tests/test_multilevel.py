import numpy as np
import pytest
from helpers import random_assignment, random_circuit

from dqcpart.circuit import CP, LayeredCircuit
from dqcpart.cost import Assignment, make_static_assignment, total_cost
from dqcpart.errors import InsufficientCapacity, InvalidLayer
from dqcpart.fm import run_fm
from dqcpart.generators import gen_cp_fraction
from dqcpart.grouping import greedy_grouping
from dqcpart.hypergraph import GATE, NodeRef, TemporalHypergraph, build_temporal_graph
from dqcpart.multilevel import (
    _remap,
    build_hierarchy,
    coarsen_blocks,
    coarsen_recursive,
    coarsen_window,
    contract_time,
    default_levels,
    multilevel_partition,
    project_assignment,
)


def wire_graph(n, d):
    return build_temporal_graph(LayeredCircuit(n, [[] for _ in range(d)])) if d else None


def graph(d, n=4, seed=0, grouped=False):
    h = build_temporal_graph(gen_cp_fraction(n, d, 0.6, seed))
    return greedy_grouping(h) if grouped else h


def canon(h):
    return sorted(h.dump().splitlines())


# -- contraction -------------------------------------------------------------

def test_contract_wire_only():
    h = TemporalHypergraph(2, [1, 2])
    for q in range(2):
        h.add_edge("state", [(q, 1)], [(q, 2)])
    c = contract_time(h, 2, 1)
    assert c.times == [1] and not c.edges


def test_contract_retimes_gate_edge():
    h = build_temporal_graph(LayeredCircuit(2, [[], [CP(0.3, 0, 1)]]))
    c = contract_time(h, 2, 1)
    (e,) = c.edges.values()
    assert e.kind == GATE and e.root == (NodeRef(0, 1),) and e.rec == (NodeRef(1, 1),)


def test_contract_errors():
    h = graph(4)
    with pytest.raises(InvalidLayer):
        contract_time(h, 1, 3)
    with pytest.raises(InvalidLayer):
        contract_time(h, 2, 2)
    with pytest.raises(InvalidLayer):
        contract_time(h, 9, 1)


def extend(phi_c, coarse, fine, tmap):
    """Copy each coarse row onto every fine layer that maps to it."""
    rows = [phi_c.phi[coarse.pos(tmap[t])] for t in fine.times]
    return Assignment(np.array(rows), phi_c.K, phi_c.cap, list(fine.times))


@pytest.mark.parametrize("grouped", [False, True])
def test_contraction_consistency(grouped):
    for seed in range(10):
        h = greedy_grouping(build_temporal_graph(random_circuit(5, 40, seed=seed, diag_frac=0.6))) \
            if grouped else build_temporal_graph(random_circuit(5, 40, seed=seed))
        i = seed % (h.d - 1)
        s, t = h.times[i + 1], h.times[i]
        c = contract_time(h, s, t)
        tmap = {x: x for x in h.times}
        tmap[s] = t
        for r in range(10):
            phi_c = random_assignment(c, 3, 2, r)
            assert total_cost(c, phi_c) == total_cost(h, extend(phi_c, c, h, tmap))


def test_sequential_contraction_matches_remap():
    h = graph(7, grouped=True)
    step = h
    for s, t in [(2, 1), (4, 3), (6, 5)]:
        step = contract_time(step, s, t)
    direct = _remap(h, {1: 1, 2: 1, 3: 3, 4: 3, 5: 5, 6: 5, 7: 7})
    assert step.times == direct.times == [1, 3, 5, 7]
    assert canon(step) == canon(direct)
    assert canon(coarsen_recursive(h, 1).graphs[1]) == canon(direct)


# -- hierarchies ----------------------------------------------------------------

@pytest.mark.parametrize("d,counts", [(8, [8, 4, 2, 1]), (5, [5, 3, 2, 1]), (1, [1]), (2, [2, 1])])
def test_recursive_counts(d, counts):
    hier = coarsen_recursive(graph(d))
    assert hier.layer_counts == counts
    assert len(counts) - 1 == (default_levels(d) if d > 1 else 0)


def test_recursive_level_cap():
    assert coarsen_recursive(graph(8), max_levels=2).layer_counts == [8, 4, 2]


@pytest.mark.parametrize("d,L,counts", [(9, 3, [9, 6, 3, 1]), (4, 2, [4, 2, 1]), (5, 5, [5, 4, 3, 2, 1]),
                                        (7, 2, [7, 4, 1])])
def test_window_counts(d, L, counts):
    assert coarsen_window(graph(d), L).layer_counts == counts


@pytest.mark.parametrize("d,L,counts", [(6, 2, [6, 4, 2, 1]), (9, 3, [9, 6, 3, 1]), (5, 5, [5, 1]),
                                        (7, 2, [7, 5, 3, 1])])
def test_block_counts(d, L, counts):
    assert coarsen_blocks(graph(d), L).layer_counts == counts


def test_block_spans_are_simultaneous():
    hier = coarsen_blocks(graph(9), 3)
    assert sorted(hier.spans(1).values()) == [(1,), (2, 3), (4,), (5, 6), (7,), (8, 9)]
    assert sorted(hier.spans(2).values()) == [(1, 2, 3), (4, 5, 6), (7, 8, 9)]


@pytest.mark.parametrize("method", ["window", "block", "recursive"])
def test_maps_are_monotone_and_surjective(method):
    h = graph(13, grouped=True)
    hier = build_hierarchy(h, method)
    assert hier.graphs[-1].d == 1
    for level, (g, m) in enumerate(zip(hier.graphs, hier.maps)):
        labels = [m[t] for t in h.times]
        assert labels == sorted(labels) and sorted(set(labels)) == g.times
        for v in g.nodes():
            assert v.time in g.times
        if level:
            prev = hier.maps[level - 1]
            # coarser levels only merge runs of the finer level
            for t in h.times:
                assert m[prev[t]] == m[t] or prev[t] == t


@pytest.mark.parametrize("method", ["window", "block", "recursive"])
def test_projection_preserves_cost_and_feasibility(method):
    for seed in range(4):
        h = graph(11, n=5, seed=seed, grouped=seed % 2 == 0)
        hier = build_hierarchy(h, method)
        for level in range(len(hier.graphs) - 1):
            fine, coarse = hier.graphs[level], hier.graphs[level + 1]
            phi = random_assignment(coarse, 3, 2, seed + level)
            out = project_assignment(phi, fine, hier.maps[level], hier.maps[level + 1])
            assert out.feasible()
            assert total_cost(fine, out) == total_cost(coarse, phi)


def test_projection_identity_and_static():
    h = graph(6)
    hier = coarsen_recursive(h)
    phi = random_assignment(h, 2, 3, 0)
    same = project_assignment(phi, h, hier.maps[0], hier.maps[0])
    assert (same.phi == phi.phi).all()
    top = hier.graphs[1]
    static = make_static_assignment(4, top.times, 2, 3)
    assert (project_assignment(static, h, hier.maps[0], hier.maps[1]).phi == static.phi[0]).all()


def test_unknown_method():
    with pytest.raises(ValueError):
        build_hierarchy(graph(3), "spiral")


# -- driver ------------------------------------------------------------------------

def test_flat_equals_run_fm():
    h = graph(12, n=8, seed=2)
    ml = multilevel_partition(h, "flat", K=2, passes=6, seed=4)
    direct = run_fm(h, make_static_assignment(8, 12, 2, 5), passes=6, seed=4 * 1000003)
    assert ml.cost == direct.cost and (ml.phi.phi == direct.phi.phi).all()


def test_single_layer_all_methods_agree():
    h = graph(1, n=6, seed=1)
    costs = {m: multilevel_partition(h, m, K=3, seed=0).cost for m in ("flat", "window", "block", "recursive")}
    assert len(set(costs.values())) == 1


@pytest.mark.parametrize("method", ["flat", "window", "block", "recursive"])
def test_driver_results_are_consistent(method):
    h = graph(16, n=8, seed=5, grouped=True)
    res = multilevel_partition(h, method, K=3, seed=1)
    assert res.phi.feasible() and res.phi.times == h.times
    assert res.cost == total_cost(h, res.phi)
    assert res.level_best == sorted(res.level_best, reverse=True)
    assert res.layer_counts[0] == 16
    lines = res.trace_csv().splitlines()
    assert lines[0] == "level,pass,cost,elapsed_ms" and len(lines) == 1 + 10 * len(res.layer_counts)


def test_restarts_keep_best_and_determinism():
    h = graph(10, n=6, seed=3)
    runs = [multilevel_partition(h, "recursive", K=2, seed=s).cost for s in range(7, 11)]
    best = multilevel_partition(h, "recursive", K=2, seed=7, restarts=4)
    assert best.cost == min(runs)
    again = multilevel_partition(h, "recursive", K=2, seed=7, restarts=4)
    assert again.phi.phi.tobytes() == best.phi.phi.tobytes()


def test_window_locks_nodes_refined_at_coarser_levels():
    from dqcpart.multilevel import _window_movable
    hier = coarsen_window(graph(9), 3)
    mask = _window_movable(hier, 0)
    # the first window folds layers 7..9 into 6; layers 1..5 are unchanged at level 1
    assert hier.spans(1)[6] == (6, 7, 8, 9)
    assert mask[:5].sum() == 0 and mask[5:].all()
    assert _window_movable(hier, len(hier.graphs) - 1) is None


def test_insufficient_capacity():
    with pytest.raises(InsufficientCapacity):
        multilevel_partition(graph(4), "recursive", K=2, cap=1)
