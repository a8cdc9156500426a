"""Adapted Fiduccia-Mattheyses refinement over temporal hypergraphs."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from .cost import Assignment, GainState
from .hypergraph import NodeRef, TemporalHypergraph


def fm_pass(state: GainState, move_cap: int | None = None) -> tuple[Assignment, int]:
    """Exploitative pass: move, lock, then roll back to the best cumulative-gain prefix.

    Returns the resulting assignment and the accepted gain (<= 0).
    """
    cap = state.cg.n_nodes if move_cap is None else move_cap
    g, _ = state.kernel.fm_pass(cap, False)
    return state.assignment(), int(g)


def exploratory_pass(state: GainState, move_cap: int | None = None) -> tuple[Assignment, int]:
    """Like :func:`fm_pass` but keeps the final state; the net gain may be positive."""
    cap = state.cg.n_nodes if move_cap is None else move_cap
    g, _ = state.kernel.fm_pass(cap, True)
    return state.assignment(), int(g)


def best_move(state: GainState, locked=()) -> tuple[NodeRef, int] | None:
    """Lowest-gain admissible move with the given nodes locked, ties broken at random."""
    k = state.kernel
    k.unlock_all()
    for v in locked:
        k.lock(state.node(v))
    k.build_buckets()
    v, p = k.best_move()
    k.clear_buckets()
    k.unlock_all()
    if v < 0:
        return None
    pos, q = divmod(int(v), state.h.n_q)
    return NodeRef(q, state.h.times[pos]), int(p)


@dataclass
class PassRecord:
    pass_index: int
    cost: int
    elapsed_ms: float
    explore: bool = False


@dataclass
class FMResult:
    phi: Assignment
    cost: int
    initial_cost: int
    trace: list[PassRecord] = field(default_factory=list)

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pass", "cost", "elapsed_ms"])
        for r in self.trace:
            w.writerow([r.pass_index, r.cost, f"{r.elapsed_ms:.3f}"])
        return buf.getvalue()


def resolve_move_cap(n_nodes: int, move_cap_fraction: float | None, default: int) -> int:
    if move_cap_fraction is None:
        return max(1, default)
    if not 0 < move_cap_fraction <= 1:
        raise ValueError("move_cap_fraction must lie in (0, 1]")
    return max(1, int(round(move_cap_fraction * n_nodes)))


def run_fm(h: TemporalHypergraph, phi0: Assignment, passes: int = 10, alternate: bool = True,
           move_cap_fraction: float | None = None, move_cap: int | None = None, seed: int = 0,
           movable: np.ndarray | None = None, state: GainState | None = None,
           backend: str | None = None) -> FMResult:
    """Run a pass schedule and return the best assignment seen.

    With ``alternate`` the schedule is exploratory, exploitative, exploratory, ...
    The move cap defaults to 1/8 of the nodes; ``move_cap`` overrides the fraction.
    """
    st = state or GainState(h, phi0, seed=seed, movable=movable, backend=backend)
    n = st.cg.n_nodes
    cap = move_cap if move_cap is not None else resolve_move_cap(n, move_cap_fraction, n // 8)
    best_cost = initial = st.total_cost()
    best_phi = st.assignment()
    trace: list[PassRecord] = []
    t0 = time.perf_counter()
    for i in range(passes):
        explore = alternate and i % 2 == 0
        st.kernel.fm_pass(cap, explore)
        c = st.total_cost()
        if c < best_cost:
            best_cost, best_phi = c, st.assignment()
        trace.append(PassRecord(i, c, (time.perf_counter() - t0) * 1e3, explore))
    return FMResult(best_phi, best_cost, initial, trace)
