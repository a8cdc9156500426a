"""Configuration-word cost model, assignments and the incremental gain state."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernel_class
from .errors import CapacityViolation, InsufficientCapacity
from .hypergraph import Edge, TemporalHypergraph


@dataclass
class Assignment:
    """Partition table ``phi[pos, qubit]`` over the surviving layers ``times``."""

    phi: np.ndarray
    K: int
    cap: np.ndarray
    times: list[int]

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=np.int64)
        self.cap = np.asarray(self.cap, dtype=np.int64)
        self._pos = {t: i for i, t in enumerate(self.times)}

    def __getitem__(self, v) -> int:
        q, t = v
        return int(self.phi[self._pos[t], q])

    def copy(self) -> Assignment:
        return Assignment(self.phi.copy(), self.K, self.cap.copy(), list(self.times))

    def occupancy(self) -> np.ndarray:
        occ = np.zeros((len(self.times), self.K), dtype=np.int64)
        for i, row in enumerate(self.phi):
            occ[i] = np.bincount(row, minlength=self.K)
        return occ

    def feasible(self) -> bool:
        return bool((self.occupancy() <= self.cap).all())


def make_static_assignment(n_q: int, d: int | list[int], K: int, cap) -> Assignment:
    """Fill partitions to capacity in qubit-index order; same row at every layer.

    ``d`` is either a depth (layers 1..d) or an explicit list of layer labels.
    """
    cap = np.broadcast_to(np.asarray(cap, dtype=np.int64), (K,)).copy()
    if cap.sum() < n_q:
        raise InsufficientCapacity(f"total capacity {int(cap.sum())} < {n_q} qubits")
    times = list(range(1, d + 1)) if isinstance(d, int) else list(d)
    row = np.empty(n_q, dtype=np.int64)
    k, used = 0, 0
    for q in range(n_q):
        while used >= cap[k]:
            k, used = k + 1, 0
        row[q] = k
        used += 1
    return Assignment(np.tile(row, (len(times), 1)), K, cap, times)


class CostTable:
    """popcount lookup: dense for small K, lazily cached otherwise."""

    def __init__(self, K: int, threshold: int = 16):
        if K > 64:
            raise ValueError("configuration words hold at most 64 partitions")
        self.K = K
        self.mode = "precomputed" if K <= threshold else "cached"
        if self.mode == "precomputed":
            idx = np.arange(2**K, dtype=np.int64)
            bits = np.zeros_like(idx)
            for i in range(K):
                bits += (idx >> i) & 1
            self._dense = bits
        else:
            self._cache: dict[int, int] = {}

    def __call__(self, cfg: int) -> int:
        if self.mode == "precomputed":
            return int(self._dense[cfg])
        c = self._cache.get(cfg)
        if c is None:
            c = self._cache[cfg] = int(cfg).bit_count()
        return c

    def __len__(self):
        return len(self._dense) if self.mode == "precomputed" else len(self._cache)


def build_cost_table(K: int, threshold: int = 16) -> CostTable:
    return CostTable(K, threshold)


def edge_config(edge: Edge, phi: Assignment) -> int:
    roots = {phi[v] for v in edge.root}
    cfg = 0
    for v in edge.rec:
        p = phi[v]
        if p not in roots:
            cfg |= 1 << p
    return cfg


def edge_cost(edge: Edge, phi: Assignment, table: CostTable | None = None) -> int:
    table = table or build_cost_table(phi.K)
    return table(edge_config(edge, phi))


def total_cost(h: TemporalHypergraph, phi: Assignment, table: CostTable | None = None) -> int:
    table = table or build_cost_table(phi.K)
    return sum(table(edge_config(e, phi)) for e in h.edges.values())


@dataclass(frozen=True)
class EdgeCostState:
    root_counts: tuple[int, ...]
    rec_counts: tuple[int, ...]
    cfg: int
    cost: int


class GainState:
    """Incremental cost/gain engine for one graph and assignment.

    Wraps the FM kernel (compiled or pure Python). ``movable`` optionally marks
    nodes allowed to move, as a boolean array over (pos, qubit).
    """

    def __init__(self, h: TemporalHypergraph, phi: Assignment, seed: int = 0,
                 movable: np.ndarray | None = None, backend: str | None = None):
        if list(phi.times) != list(h.times):
            raise ValueError("assignment layers do not match the graph")
        self.h = h
        self.K = phi.K
        self.cap = phi.cap.copy()
        self.cg = cg = h.compile()
        self._eindex = {int(eid): k for k, eid in enumerate(cg.edge_ids)}
        mv = np.ones(cg.n_nodes, dtype=np.uint8) if movable is None else \
            np.asarray(movable, dtype=np.uint8).reshape(-1)
        self.kernel = kernel_class(backend)(
            cg.root_ptr, cg.root_idx, cg.rec_ptr, cg.rec_idx, cg.inc_ptr, cg.inc_edge,
            cg.inc_role, cg.n_q, cg.n_layers, phi.K, self.cap,
            phi.phi.reshape(-1).astype(np.int64), mv, int(seed))

    def node(self, v) -> int:
        q, t = v
        return self.h.pos(t) * self.h.n_q + q

    def assignment(self) -> Assignment:
        phi = np.asarray(self.kernel.get_phi()).reshape(self.h.d, self.h.n_q)
        return Assignment(phi.copy(), self.K, self.cap.copy(), list(self.h.times))

    def set_assignment(self, phi: Assignment):
        self.kernel.set_phi(phi.phi.reshape(-1).astype(np.int64))

    def total_cost(self) -> int:
        return int(self.kernel.total_cost())

    def edge_state(self, eid: int) -> EdgeCostState:
        k = self._eindex[eid]
        rc, cc = self.kernel.edge_counts(k)
        return EdgeCostState(tuple(int(x) for x in rc), tuple(int(x) for x in cc),
                             int(self.kernel.edge_cfg(k)), int(self.kernel.edge_cost(k)))

    def gain(self, v, p: int) -> int:
        return int(self.kernel.gain(self.node(v), p))

    def scratch_gain(self, v, p: int) -> int:
        return int(self.kernel.scratch_gain(self.node(v), p))

    def apply_move(self, v, p: int) -> int:
        """Move node v to partition p, updating counts, costs and neighbour gains.

        Returns the change in total cost.
        """
        n = self.node(v)
        if p != self.kernel.part(n):
            if self.kernel.occ_at(self.h.pos(v[1]), p) >= self.cap[p]:
                raise CapacityViolation(f"partition {p} full at layer {v[1]}")
        return int(self.kernel.move(n, p))

    def part(self, v) -> int:
        return int(self.kernel.part(self.node(v)))


def init_edge_states(h: TemporalHypergraph, phi: Assignment, K: int | None = None,
                     seed: int = 0) -> GainState:
    if K is not None and K != phi.K:
        raise ValueError("K does not match the assignment")
    return GainState(h, phi, seed)


def gain(v, p: int, state: GainState) -> int:
    return state.gain(v, p)


def apply_move(v, p: int, state: GainState) -> int:
    return state.apply_move(v, p)


def gain_oracle(h: TemporalHypergraph, phi: Assignment, v, p: int) -> int:
    """Gain by direct recomputation of the edges around v (test oracle)."""
    after = phi.copy()
    q, t = v
    after.phi[h.pos(t), q] = p
    return sum(edge_cost(e, after) - edge_cost(e, phi) for e in h.incident_edges(v))
