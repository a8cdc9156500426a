"""Greedy merging of teleportation-compatible gate edges into hyper-edges."""
from __future__ import annotations

import math
from enum import Enum

from .hypergraph import GATE, GROUP, NodeRef, TemporalHypergraph

ANGLE_TOL = 1e-9


class Diag(Enum):
    DIAGONAL = "diagonal"
    ANTI_DIAGONAL = "anti-diagonal"
    NEITHER = "neither"


def diagonality(theta: float, tol: float = ANGLE_TOL) -> Diag:
    r = math.fmod(theta, 2 * math.pi)
    if r < 0:
        r += 2 * math.pi
    if r <= tol or 2 * math.pi - r <= tol:
        return Diag.DIAGONAL
    if abs(r - math.pi) <= tol:
        return Diag.ANTI_DIAGONAL
    return Diag.NEITHER


class _Open:
    __slots__ = ("attrs", "first", "first_t", "last_t", "recs", "root")

    def __init__(self, root: int, t: int):
        self.root = root
        self.first_t = self.last_t = t
        self.recs: list[NodeRef] = []
        self.attrs: list[float] = []
        self.first: list[int] = []


def greedy_grouping(h: TemporalHypergraph) -> TemporalHypergraph:
    """Return a copy of ``h`` with compatible gate edges merged into group edges.

    Layers are scanned in time order. Each gate joins the open group of the
    endpoint whose group has more receivers, ties going to the gate's first
    circuit operand; the other endpoint's group is closed. A non-diagonal
    single-qubit gate on a root closes that group. Closed groups with one
    receiver become plain gate edges again. Already grouped graphs are returned
    unchanged (as a copy).
    """
    out = h.copy()
    if h.grouped:
        return out
    by_time: dict[int, list] = {}
    for e in list(out.edges.values()):
        if e.kind == GATE:
            by_time.setdefault(e.root[0].time, []).append(e)
    open_: dict[int, _Open] = {}

    def close(q: int):
        g = open_.pop(q, None)
        if g is None or not g.recs:
            return
        if len(g.recs) == 1:
            r = g.recs[0]
            t = r.time
            lo, hi = sorted((g.root, r.qubit))
            out.add_edge(GATE, [(lo, t)], [(hi, t)], g.attrs[0], first=g.first[0])
        else:
            roots = [(g.root, t) for t in out.times if g.first_t <= t <= g.last_t]
            out.add_edge(GROUP, roots, g.recs, tuple(g.attrs))

    for t in out.times:
        busy: set[int] = set()
        for e in by_time.get(t, ()):
            out.remove_edge(e.id)
            a = e.first
            b = e.root[0].qubit if e.rec[0].qubit == a else e.rec[0].qubit
            busy.update((a, b))
            sa = len(open_[a].recs) if a in open_ else 0
            sb = len(open_[b].recs) if b in open_ else 0
            root, rec = (a, b) if sa >= sb else (b, a)
            close(rec)
            g = open_.get(root)
            if g is None:
                g = open_[root] = _Open(root, t)
            g.last_t = t
            g.recs.append(NodeRef(rec, t))
            g.attrs.append(e.attr)
            g.first.append(a)
        for q in list(open_):
            if q in busy:
                continue
            params = out.node_attrs.get(NodeRef(q, t))
            if params is not None and diagonality(params[0]) is Diag.NEITHER:
                close(q)
    for q in sorted(open_):
        close(q)
    out.grouped = True
    return out
