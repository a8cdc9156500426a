"""Temporal coarsening hierarchies, projection and the multilevel FM driver."""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cost import Assignment, GainState, make_static_assignment
from .errors import InvalidLayer
from .fm import run_fm
from .hypergraph import NodeRef, TemporalHypergraph

METHODS = ("flat", "window", "block", "recursive")


def _remap(h: TemporalHypergraph, tmap: dict[int, int]) -> TemporalHypergraph:
    """Rebuild ``h`` with node times sent through ``tmap``.

    Duplicates inside a root or receiver set are dropped, and edges left with
    equal singleton root and receiver sets (contracted state edges) vanish.
    """
    times = sorted(set(tmap[t] for t in h.times))
    out = TemporalHypergraph(h.n_q, times, grouped=h.grouped)
    for v, a in h.node_attrs.items():
        if tmap[v.time] == v.time:
            out.node_attrs[v] = a
    for e in h.edges.values():
        root = tuple(dict.fromkeys(NodeRef(v.qubit, tmap[v.time]) for v in e.root))
        rec = tuple(dict.fromkeys(NodeRef(v.qubit, tmap[v.time]) for v in e.rec))
        if len(root) == 1 and root == rec:
            continue
        out.add_edge(e.kind, root, rec, e.attr, e.first)
    return out


def contract_time(h: TemporalHypergraph, s: int, t: int) -> TemporalHypergraph:
    """Merge layer ``s`` into the adjacent layer ``t``."""
    if s not in h.times or t not in h.times or s == t:
        raise InvalidLayer(f"cannot contract layer {s} into {t}")
    if abs(h.pos(s) - h.pos(t)) != 1:
        raise InvalidLayer(f"layers {s} and {t} are not adjacent")
    tmap = {x: x for x in h.times}
    tmap[s] = t
    return _remap(h, tmap)


@dataclass
class Hierarchy:
    """Graphs from finest (index 0) to coarsest plus, per level, a map H0-layer -> layer label."""

    graphs: list[TemporalHypergraph]
    maps: list[dict[int, int]]

    @property
    def layer_counts(self) -> list[int]:
        return [g.d for g in self.graphs]

    def spans(self, level: int) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for t0, lab in sorted(self.maps[level].items()):
            out.setdefault(lab, []).append(t0)
        return {k: tuple(v) for k, v in out.items()}


def _hierarchy_from_runs(h0: TemporalHypergraph, levels: list[list[list[int]]]) -> Hierarchy:
    """Each level is a list of runs of H0 layers; a run is labelled by its first layer."""
    graphs, maps = [h0], [{t: t for t in h0.times}]
    for runs in levels:
        m = {t: run[0] for run in runs for t in run}
        graphs.append(_remap(h0, m))
        maps.append(m)
    return Hierarchy(graphs, maps)


def coarsen_recursive(h0: TemporalHypergraph, max_levels: int | None = None) -> Hierarchy:
    """Pairwise merging of adjacent layers, halving the depth per level."""
    runs = [[t] for t in h0.times]
    levels = []
    while len(runs) > 1 and (max_levels is None or len(levels) < max_levels):
        runs = [sum(runs[i:i + 2], []) for i in range(0, len(runs), 2)]
        levels.append(runs)
    return _hierarchy_from_runs(h0, levels)


def default_levels(d: int) -> int:
    return max(1, math.ceil(math.log2(d))) if d > 1 else 1


def recursive_level_count(d: int) -> int:
    """Graphs in a full recursive hierarchy for depth ``d`` (H0 included)."""
    return default_levels(d) + 1 if d > 1 else 1


def coarsen_window(h0: TemporalHypergraph, L: int | None = None) -> Hierarchy:
    """Collapse windows of ``w = d // L`` layers, sweeping from the last layer backwards."""
    d = h0.d
    L = L or default_levels(d)
    w = max(1, d // L)
    runs = [[t] for t in h0.times]
    levels = []
    ell = d
    while ell > 1:
        start = max(1, ell - w)
        runs = runs[:start - 1] + [sum(runs[start - 1:], [])]
        levels.append(list(runs))
        ell -= w
    return _hierarchy_from_runs(h0, levels)


def coarsen_blocks(h0: TemporalHypergraph, L: int | None = None) -> Hierarchy:
    """Blocks of ``b = d // L`` layers shrink by one layer per level, then merge fully."""
    d = h0.d
    L = L or default_levels(d)
    b = max(1, d // L)
    blocks = [[[t] for t in h0.times[i:i + b]] for i in range(0, d, b)]
    levels = []
    while any(len(blk) > 1 for blk in blocks):
        blocks = [blk[:-2] + [blk[-2] + blk[-1]] if len(blk) > 1 else blk for blk in blocks]
        levels.append([run for blk in blocks for run in blk])
    if len(blocks) > 1:
        levels.append([[t for blk in blocks for run in blk for t in run]])
    return _hierarchy_from_runs(h0, levels)


def build_hierarchy(h0: TemporalHypergraph, method: str, levels: int | None = None) -> Hierarchy:
    if method == "flat":
        return _hierarchy_from_runs(h0, [])
    if method == "recursive":
        return coarsen_recursive(h0, levels)
    if method == "window":
        return coarsen_window(h0, levels)
    if method == "block":
        return coarsen_blocks(h0, levels)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def project_assignment(phi: Assignment, fine: TemporalHypergraph, fine_map: dict[int, int],
                       coarse_map: dict[int, int]) -> Assignment:
    """Give each fine layer the row of the coarse layer that absorbed it.

    ``fine_map``/``coarse_map`` send H0 layers to labels at the two levels.
    """
    del fine_map  # fine labels are H0 layers themselves
    rows = [phi.phi[phi.times.index(coarse_map[t])] for t in fine.times]
    return Assignment(np.array(rows, dtype=np.int64), phi.K, phi.cap.copy(), list(fine.times))


def _window_movable(hier: Hierarchy, level: int) -> np.ndarray | None:
    """Lock layers that already existed unchanged at the next coarser level."""
    if level + 1 >= len(hier.graphs):
        return None
    coarse_spans = set(hier.spans(level + 1).values())
    g = hier.graphs[level]
    spans = hier.spans(level)
    mask = np.ones((g.d, g.n_q), dtype=np.uint8)
    for i, t in enumerate(g.times):
        if spans[t] in coarse_spans:
            mask[i] = 0
    return mask


@dataclass
class TraceRow:
    level: int
    pass_index: int
    cost: int
    elapsed_ms: float


@dataclass
class MLResult:
    phi: Assignment
    cost: int
    initial_cost: int
    seed: int
    level_best: list[int] = field(default_factory=list)
    trace: list[TraceRow] = field(default_factory=list)
    layer_counts: list[int] = field(default_factory=list)

    def trace_csv(self) -> str:
        """Per-pass trace as CSV: ``level,pass,cost,elapsed_ms``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "pass", "cost", "elapsed_ms"])
        for r in self.trace:
            w.writerow([r.level, r.pass_index, r.cost, f"{r.elapsed_ms:.3f}"])
        return buf.getvalue()


def _single_run(hier: Hierarchy, method: str, K: int, cap, passes: int, alternate: bool,
                move_cap: int | None, move_cap_fraction: float | None, seed: int,
                backend: str | None) -> MLResult:
    h0 = hier.graphs[0]
    top = len(hier.graphs) - 1
    phi = make_static_assignment(h0.n_q, hier.graphs[top].times, K, cap)
    initial = None
    level_best, trace = [], []
    t0 = time.perf_counter()
    for level in range(top, -1, -1):
        g = hier.graphs[level]
        if level < top:
            phi = project_assignment(phi, g, hier.maps[level], hier.maps[level + 1])
        movable = _window_movable(hier, level) if method == "window" else None
        if method == "flat":
            mc, frac = move_cap, move_cap_fraction
        else:
            mc = move_cap if move_cap is not None or move_cap_fraction is not None else h0.n_q
            frac = move_cap_fraction
        st = GainState(g, phi, seed=seed * 1000003 + level, movable=movable, backend=backend)
        if initial is None:
            initial = st.total_cost()
        offset = (time.perf_counter() - t0) * 1e3
        res = run_fm(g, phi, passes=passes, alternate=alternate, move_cap=mc,
                     move_cap_fraction=frac, state=st)
        phi = res.phi
        level_best.append(res.cost)
        for r in res.trace:
            trace.append(TraceRow(level, r.pass_index, r.cost, offset + r.elapsed_ms))
    return MLResult(phi, level_best[-1], initial, seed, level_best, trace, hier.layer_counts)


def multilevel_partition(h0: TemporalHypergraph, method: str = "recursive", K: int = 2, cap=None,
                         passes: int = 10, alternate: bool = True, move_cap: int | None = None,
                         move_cap_fraction: float | None = None, seed: int = 0, restarts: int = 1,
                         levels: int | None = None, backend: str | None = None) -> MLResult:
    """Coarsen, place statically on the coarsest graph, then refine level by level.

    ``cap`` defaults to ``n_q // K + 1`` per partition. With ``restarts > 1`` the
    seeds ``seed .. seed + restarts - 1`` are tried and the cheapest result kept.
    """
    if cap is None:
        cap = h0.n_q // K + 1
    cap = np.broadcast_to(np.asarray(cap, dtype=np.int64), (K,)).copy()
    hier = build_hierarchy(h0, method, levels)
    best = None
    for r in range(restarts):
        res = _single_run(hier, method, K, cap, passes, alternate, move_cap, move_cap_fraction,
                          seed + r, backend)
        if best is None or res.cost < best.cost:
            best = res
    return best
