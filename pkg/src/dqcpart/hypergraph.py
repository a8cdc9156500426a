"""Temporal hypergraph: one node per (qubit, layer), state/gate/group edges."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .circuit import LayeredCircuit

STATE, GATE, GROUP = "state", "gate", "group"


class NodeRef(NamedTuple):
    qubit: int
    time: int


@dataclass
class Edge:
    """A (hyper-)edge with ordered root and receiver node tuples.

    ``attr`` is the CP angle for gate edges and the per-receiver angles for
    groups. ``first`` records the circuit's first operand of a gate edge.
    """

    id: int
    kind: str
    root: tuple[NodeRef, ...]
    rec: tuple[NodeRef, ...]
    attr: float | tuple[float, ...] | None = None
    first: int | None = None

    def nodes(self):
        yield from self.root
        yield from self.rec


@dataclass(frozen=True)
class CompiledGraph:
    """Flat arrays for the cost/FM kernels. Node index is ``pos * n_q + qubit``."""

    n_q: int
    n_layers: int
    edge_ids: np.ndarray
    root_ptr: np.ndarray
    root_idx: np.ndarray
    rec_ptr: np.ndarray
    rec_idx: np.ndarray
    inc_ptr: np.ndarray
    inc_edge: np.ndarray
    inc_role: np.ndarray  # 0 root, 1 receiver

    @property
    def n_nodes(self) -> int:
        return self.n_q * self.n_layers

    @property
    def n_edges(self) -> int:
        return len(self.edge_ids)


@dataclass
class TemporalHypergraph:
    """Nodes are addressed positionally; ``times`` lists the surviving layer labels.

    A freshly built graph has ``times == [1..d]``. Coarsened graphs keep the label
    of the earliest original layer in each merged run.
    """

    n_q: int
    times: list[int]
    node_attrs: dict[NodeRef, tuple[float, float, float]] = field(default_factory=dict)
    edges: dict[int, Edge] = field(default_factory=dict)
    grouped: bool = False
    _inc: dict[NodeRef, dict[int, None]] = field(default_factory=dict, repr=False)
    _next_id: int = 0

    @property
    def d(self) -> int:
        return len(self.times)

    def pos(self, t: int) -> int:
        return self._pos[t]

    def __post_init__(self):
        self._pos = {t: i for i, t in enumerate(self.times)}

    def nodes(self):
        for t in self.times:
            for q in range(self.n_q):
                yield NodeRef(q, t)

    def add_edge(self, kind, root, rec, attr=None, first=None) -> Edge:
        root = tuple(NodeRef(*v) for v in root)
        rec = tuple(NodeRef(*v) for v in rec)
        if set(root) & set(rec):
            raise ValueError("a node cannot be both root and receiver of one edge")
        for v in (*root, *rec):
            if v.time not in self._pos or not 0 <= v.qubit < self.n_q:
                raise ValueError(f"node {v} not in graph")
        e = Edge(self._next_id, kind, root, rec, attr, first)
        self._next_id += 1
        self.edges[e.id] = e
        for v in e.nodes():
            self._inc.setdefault(v, {})[e.id] = None
        return e

    def remove_edge(self, eid: int) -> Edge:
        e = self.edges.pop(eid)
        for v in e.nodes():
            self._inc[v].pop(eid, None)
        return e

    def incidence(self, v) -> set[int]:
        return set(self._inc.get(NodeRef(*v), ()))

    def incident_edges(self, v) -> list[Edge]:
        return [self.edges[i] for i in self._inc.get(NodeRef(*v), ())]

    def copy(self) -> TemporalHypergraph:
        h = TemporalHypergraph(self.n_q, list(self.times), dict(self.node_attrs), grouped=self.grouped)
        for e in self.edges.values():
            h.add_edge(e.kind, e.root, e.rec, e.attr, e.first)
        return h

    def count(self, kind: str) -> int:
        return sum(1 for e in self.edges.values() if e.kind == kind)

    def dump(self) -> str:
        """Line-per-edge text form: ``kind root:[(q,t)...] rec:[(q,t)...] attr:x``."""
        def fmt(nodes):
            return "[" + ",".join(f"({v.qubit},{v.time})" for v in nodes) + "]"

        def fattr(a):
            if a is None:
                return "-"
            if isinstance(a, tuple):
                return "[" + ",".join(f"{x:.12g}" for x in a) + "]"
            return f"{a:.12g}"

        lines = [f"{e.kind} root:{fmt(e.root)} rec:{fmt(e.rec)} attr:{fattr(e.attr)}"
                 for e in self.edges.values()]
        return "\n".join(lines) + ("\n" if lines else "")

    def compile(self) -> CompiledGraph:
        nq = self.n_q

        def idx(v: NodeRef) -> int:
            return self._pos[v.time] * nq + v.qubit

        ids = list(self.edges)
        root_ptr, rec_ptr = [0], [0]
        root_idx: list[int] = []
        rec_idx: list[int] = []
        per_node: list[list[tuple[int, int]]] = [[] for _ in range(nq * self.d)]
        for k, eid in enumerate(ids):
            e = self.edges[eid]
            for v in e.root:
                root_idx.append(idx(v))
                per_node[idx(v)].append((k, 0))
            for v in e.rec:
                rec_idx.append(idx(v))
                per_node[idx(v)].append((k, 1))
            root_ptr.append(len(root_idx))
            rec_ptr.append(len(rec_idx))
        inc_ptr = np.zeros(len(per_node) + 1, dtype=np.int64)
        inc_ptr[1:] = np.cumsum([len(x) for x in per_node])
        flat = [x for lst in per_node for x in lst]
        as64 = lambda a: np.asarray(a, dtype=np.int64)
        return CompiledGraph(
            n_q=nq,
            n_layers=self.d,
            edge_ids=as64(ids),
            root_ptr=as64(root_ptr),
            root_idx=as64(root_idx),
            rec_ptr=as64(rec_ptr),
            rec_idx=as64(rec_idx),
            inc_ptr=inc_ptr,
            inc_edge=as64([x[0] for x in flat]),
            inc_role=as64([x[1] for x in flat]),
        )


def build_temporal_graph(circ: LayeredCircuit) -> TemporalHypergraph:
    """State edges along each wire, one gate edge per CP (root = lower qubit)."""
    d = circ.depth
    h = TemporalHypergraph(circ.num_qubits, list(range(1, d + 1)))
    for t, layer in enumerate(circ.layers, start=1):
        for g in layer:
            if g.name == "u":
                h.node_attrs[NodeRef(g.qubits[0], t)] = g.params
    for q in range(circ.num_qubits):
        for t in range(1, d):
            h.add_edge(STATE, [(q, t)], [(q, t + 1)])
    for t, layer in enumerate(circ.layers, start=1):
        for g in layer:
            if g.name == "cp":
                a, b = g.qubits
                lo, hi = min(a, b), max(a, b)
                h.add_edge(GATE, [(lo, t)], [(hi, t)], g.params[0], first=a)
    return h
