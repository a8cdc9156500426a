"""Turn a partitioned temporal hypergraph into a distributed circuit.

Wires are ``(qpu, slot)`` pairs. Slots are handed out lowest-first within a QPU and
returned when measured. A logical qubit's primary wire may change without any
operation when a linked copy takes over (nested state teleportation).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from .cost import Assignment, total_cost
from .errors import CapacityViolation
from .grouping import Diag, diagonality
from .hypergraph import GATE, GROUP, STATE, TemporalHypergraph

Wire = tuple[int, int]
_H = (math.pi / 2, 0.0, math.pi)
_X = (math.pi, 0.0, math.pi)


@dataclass(frozen=True)
class EbitGen:
    qpu_a: int
    qpu_b: int
    comm_a: Wire
    comm_b: Wire


@dataclass(frozen=True)
class StartProc:
    """Cat-entangle ``root`` onto each wire in ``comms`` using the e-bit halves ``local``."""

    root: Wire
    comms: tuple[Wire, ...]
    local: tuple[Wire, ...]


@dataclass(frozen=True)
class EndProc:
    """Disentangle each released copy, leaving the state on ``sink``."""

    sink: Wire
    released: tuple[Wire, ...]


@dataclass(frozen=True)
class LocalU:
    wire: Wire
    theta: float
    phi: float
    lam: float


@dataclass(frozen=True)
class LocalCP:
    wire_a: Wire
    wire_b: Wire
    theta: float


@dataclass(frozen=True)
class MeasureZ:
    wire: Wire
    bit: int


@dataclass(frozen=True)
class MeasureX:
    wire: Wire
    bit: int


@dataclass(frozen=True)
class CondX:
    wire: Wire
    bit: int


@dataclass(frozen=True)
class CondZ:
    wire: Wire
    bit: int


GATE_LEVEL_OPS = (LocalU, LocalCP, EbitGen, MeasureZ, CondX, CondZ)


@dataclass
class DistributedCircuit:
    ops: list
    n_q: int
    K: int
    cap: list[int]
    initial_locations: list[Wire]
    final_locations: list[Wire]
    location_trace: list[tuple[int, int, Wire]] = field(default_factory=list)
    comm_high_water: list[int] = field(default_factory=list)
    level: str = "primitive"

    @property
    def ebit_count(self) -> int:
        return sum(1 for op in self.ops if isinstance(op, EbitGen))

    def wires(self) -> set[Wire]:
        out = set(self.initial_locations)
        for op in self.ops:
            for v in asdict(op).values():
                if isinstance(v, tuple) and len(v) == 2 and all(isinstance(x, int) for x in v):
                    out.add(v)
                elif isinstance(v, tuple):
                    out.update(w for w in v if isinstance(w, tuple))
        return out


class _Slots:
    """Lowest-free slot allocation per QPU, tracking data versus communication wires."""

    def __init__(self, K: int):
        self.used: list[set[int]] = [set() for _ in range(K)]
        self.data: list[set[int]] = [set() for _ in range(K)]
        self.high = [0] * K

    def alloc(self, k: int) -> Wire:
        s = 0
        while s in self.used[k]:
            s += 1
        self.used[k].add(s)
        self._note(k)
        return (k, s)

    def free(self, w: Wire):
        self.used[w[0]].remove(w[1])
        self.data[w[0]].discard(w[1])

    def set_data(self, old: Wire | None, new: Wire):
        if old is not None:
            self.data[old[0]].discard(old[1])
        self.data[new[0]].add(new[1])
        self._note(new[0])
        if old is not None:
            self._note(old[0])

    def _note(self, k: int):
        self.high[k] = max(self.high[k], len(self.used[k]) - len(self.data[k]))


class _GroupRun:
    def __init__(self, edge, root: int, home: int, wire: Wire, need: dict[int, int]):
        self.edge = edge
        self.root = root
        self.t_end = edge.root[-1].time
        self.copies: dict[int, Wire] = {home: wire}
        self.primary = home
        self.visited = {home}
        self.need = need


def extract(h: TemporalHypergraph, phi: Assignment) -> DistributedCircuit:
    """Primitive-level distributed circuit for graph ``h`` under assignment ``phi``.

    Every cut state edge and every uncovered receiver partition costs exactly one
    e-bit, so the EbitGen count equals ``total_cost(h, phi)``.
    """
    n, K = h.n_q, phi.K
    cap = [int(c) for c in phi.cap]
    times = h.times
    P = lambda q, t: phi[(q, t)]
    slots = _Slots(K)
    ops: list = []
    trace: list[tuple[int, int, Wire]] = []
    loc: dict[int, Wire] = {}

    def relocate(q: int, w: Wire):
        slots.set_data(loc.get(q), w)
        loc[q] = w
        trace.append((len(ops), q, w))

    for q in range(n):
        relocate(q, slots.alloc(P(q, times[0])))
    initial = [loc[q] for q in range(n)]
    _check_capacity(loc, cap, times[0])

    gates_at: dict[int, list] = {}
    groups_at: dict[int, list] = {}
    recv_at: dict[int, list] = {}
    for e in h.edges.values():
        if e.kind == GATE:
            gates_at.setdefault(e.root[0].time, []).append(e)
        elif e.kind == GROUP:
            groups_at.setdefault(e.root[0].time, []).append(e)
            for r, theta in zip(e.rec, e.attr):
                recv_at.setdefault(r.time, []).append((e, r, theta))
        elif e.kind != STATE:
            raise ValueError(f"unknown edge kind {e.kind}")

    runs: dict[int, _GroupRun] = {}
    by_edge: dict[int, _GroupRun] = {}

    def link(src: Wire, k: int) -> Wire:
        a = slots.alloc(src[0])
        c = slots.alloc(k)
        ops.append(EbitGen(src[0], k, a, c))
        ops.append(StartProc(src, (c,), (a,)))
        slots.free(a)
        return c

    def end(sink: Wire, w: Wire):
        ops.append(EndProc(sink, (w,)))
        slots.free(w)

    for i, t in enumerate(times):
        # state movement into layer t
        if i > 0:
            for q in range(n):
                src, dst = P(q, times[i - 1]), P(q, t)
                if src == dst:
                    continue
                run = runs.get(q)
                if run is None:
                    old = loc[q]
                    c = link(old, dst)
                    end(c, old)
                    relocate(q, c)
                    continue
                if dst in run.copies and dst in run.visited:
                    end(run.copies[run.primary], run.copies.pop(dst))
                if dst not in run.copies:
                    run.copies[dst] = link(run.copies[run.primary], dst)
                run.primary = dst
                run.visited.add(dst)
                relocate(q, run.copies[dst])
            _check_capacity(loc, cap, t)

        for e in groups_at.get(t, ()):
            q = e.root[0].qubit
            need: dict[int, int] = {}
            for v in (*e.root, *e.rec):
                k = P(*v)
                need[k] = max(need.get(k, 0), v.time)
            runs[q] = by_edge[e.id] = _GroupRun(e, q, P(q, t), loc[q], need)

        for q in range(n):
            params = h.node_attrs.get((q, t))
            if params is None:
                continue
            ops.append(LocalU(loc[q], *params))
            run = runs.get(q)
            if run is not None and diagonality(params[0]) is Diag.ANTI_DIAGONAL:
                for k, w in sorted(run.copies.items()):
                    if k != run.primary:
                        ops.append(LocalU(w, *_X))

        for e in gates_at.get(t, ()):
            a, b = e.root[0].qubit, e.rec[0].qubit
            if P(a, t) == P(b, t):
                ops.append(LocalCP(loc[a], loc[b], e.attr))
            else:
                c = link(loc[a], P(b, t))
                ops.append(LocalCP(c, loc[b], e.attr))
                end(loc[a], c)
        for e, r, theta in recv_at.get(t, ()):
            run = by_edge[e.id]
            k = P(*r)
            if k not in run.copies:
                run.copies[k] = link(run.copies[run.primary], k)
            ops.append(LocalCP(run.copies[k], loc[r.qubit], theta))

        for q in sorted(runs):
            run = runs[q]
            sink = run.copies[run.primary]
            for k in sorted(run.copies):
                if k != run.primary and (run.need.get(k, 0) <= t or run.t_end <= t):
                    end(sink, run.copies.pop(k))
            if run.t_end <= t:
                del runs[q]
                del by_edge[run.edge.id]

    return DistributedCircuit(ops, n, K, cap, initial, [loc[q] for q in range(n)], trace,
                              list(slots.high))


def _check_capacity(loc: dict[int, Wire], cap: list[int], t: int):
    counts = [0] * len(cap)
    for w in loc.values():
        counts[w[0]] += 1
    for k, c in enumerate(counts):
        if c > cap[k]:
            raise CapacityViolation(f"QPU {k} holds {c} data qubits at layer {t} (cap {cap[k]})")


def decompose_primitives(dc: DistributedCircuit) -> DistributedCircuit:
    """Expand StartProc/EndProc/MeasureX into U, CP, EbitGen, MeasureZ, CondX, CondZ."""
    out: list = []
    bit = 0
    index_map = []
    for op in dc.ops:
        index_map.append(len(out))
        if isinstance(op, StartProc):
            for c, a in zip(op.comms, op.local):
                out += [LocalU(a, *_H), LocalCP(op.root, a, math.pi), LocalU(a, *_H),
                        MeasureZ(a, bit), CondX(c, bit)]
                bit += 1
        elif isinstance(op, EndProc):
            for w in op.released:
                out += [LocalU(w, *_H), MeasureZ(w, bit), CondZ(op.sink, bit)]
                bit += 1
        elif isinstance(op, MeasureX):
            out += [LocalU(op.wire, *_H), MeasureZ(op.wire, bit)]
            bit += 1
        else:
            out.append(op)
    index_map.append(len(out))
    trace = [(index_map[i], q, w) for i, q, w in dc.location_trace]
    return DistributedCircuit(out, dc.n_q, dc.K, dc.cap, dc.initial_locations, dc.final_locations,
                              trace, dc.comm_high_water, "gate")


def circuit_depth(ops) -> int:
    """ASAP depth over wires; a classically controlled op may share its measurement's layer."""
    last: dict[Wire, int] = {}
    bit_layer: dict[int, int] = {}
    depth = 0
    for op in ops:
        if isinstance(op, (CondX, CondZ)):
            lay = max(last.get(op.wire, 0) + 1, bit_layer.get(op.bit, 0))
            ws = (op.wire,)
        else:
            if isinstance(op, LocalU) or isinstance(op, MeasureZ) or isinstance(op, MeasureX):
                ws = (op.wire,)
            elif isinstance(op, LocalCP):
                ws = (op.wire_a, op.wire_b)
            elif isinstance(op, EbitGen):
                ws = (op.comm_a, op.comm_b)
            else:
                raise ValueError(f"depth needs a gate-level circuit, got {type(op).__name__}")
            lay = 1 + max(last.get(w, 0) for w in ws)
            if isinstance(op, (MeasureZ, MeasureX)):
                bit_layer[op.bit] = lay
        for w in ws:
            last[w] = lay
        depth = max(depth, lay)
    return depth


def report(dc: DistributedCircuit) -> dict:
    gate = dc if dc.level == "gate" else decompose_primitives(dc)
    return {
        "ebits": dc.ebit_count,
        "depth": circuit_depth(gate.ops),
        "comm_high_water": list(dc.comm_high_water),
    }


def ebit_conservation_check(h: TemporalHypergraph, phi: Assignment, dc: DistributedCircuit) -> bool:
    return dc.ebit_count == total_cost(h, phi)


def _op_dict(op) -> dict:
    d = {"op": type(op).__name__}
    for k, v in asdict(op).items():
        if isinstance(v, tuple) and v and isinstance(v[0], tuple):
            d[k] = [list(w) for w in v]
        elif isinstance(v, tuple):
            d[k] = list(v)
        else:
            d[k] = v
    return d


def to_json(dc: DistributedCircuit) -> dict:
    return {
        "schema": 1,
        "level": dc.level,
        "n_q": dc.n_q,
        "K": dc.K,
        "cap": dc.cap,
        "initial_locations": [list(w) for w in dc.initial_locations],
        "final_locations": [list(w) for w in dc.final_locations],
        "ops": [_op_dict(op) for op in dc.ops],
        "summary": report(dc),
    }


_OPS = {c.__name__: c for c in (EbitGen, StartProc, EndProc, LocalU, LocalCP, MeasureZ,
                                MeasureX, CondX, CondZ)}


def from_json(data: dict | str) -> DistributedCircuit:
    if isinstance(data, str):
        data = json.loads(data)

    def conv(v):
        if isinstance(v, list) and v and isinstance(v[0], list):
            return tuple(tuple(w) for w in v)
        if isinstance(v, list):
            return tuple(v)
        return v

    ops = []
    for d in data["ops"]:
        d = dict(d)
        cls = _OPS[d.pop("op")]
        ops.append(cls(**{k: conv(v) for k, v in d.items()}))
    summ = data.get("summary", {})
    return DistributedCircuit(ops, data["n_q"], data["K"], list(data["cap"]),
                              [tuple(w) for w in data["initial_locations"]],
                              [tuple(w) for w in data["final_locations"]], [],
                              list(summ.get("comm_high_water", [])), data.get("level", "primitive"))


def to_qasm(dc: DistributedCircuit) -> str:
    """OpenQASM 2 text of the gate-level circuit; e-bit generation appears as ``// EPR`` pragmas."""
    gate = dc if dc.level == "gate" else decompose_primitives(dc)
    size = [0] * dc.K
    for k, s in gate.wires():
        size[k] = max(size[k], s + 1)
    nbits = 1 + max((op.bit for op in gate.ops if hasattr(op, "bit")), default=-1)
    w = lambda x: f"p{x[0]}[{x[1]}]"
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    lines += [f"qreg p{k}[{size[k]}];" for k in range(dc.K) if size[k]]
    lines += [f"creg m{b}[1];" for b in range(nbits)]
    lines += ["creg out[%d];" % dc.n_q] if dc.n_q else []
    for op in gate.ops:
        if isinstance(op, EbitGen):
            lines.append(f"// EPR {w(op.comm_a)} {w(op.comm_b)}")
            lines.append(f"reset {w(op.comm_a)};")
            lines.append(f"reset {w(op.comm_b)};")
            lines.append(f"h {w(op.comm_a)};")
            lines.append(f"cx {w(op.comm_a)},{w(op.comm_b)};")
        elif isinstance(op, LocalU):
            lines.append(f"u3({op.theta!r},{op.phi!r},{op.lam!r}) {w(op.wire)};")
        elif isinstance(op, LocalCP):
            lines.append(f"cu1({op.theta!r}) {w(op.wire_a)},{w(op.wire_b)};")
        elif isinstance(op, MeasureZ):
            lines.append(f"measure {w(op.wire)} -> m{op.bit}[0];")
        elif isinstance(op, CondX):
            lines.append(f"if(m{op.bit}==1) x {w(op.wire)};")
        elif isinstance(op, CondZ):
            lines.append(f"if(m{op.bit}==1) z {w(op.wire)};")
    for q, loc in enumerate(dc.final_locations):
        lines.append(f"measure {w(loc)} -> out[{q}];")
    return "\n".join(lines) + "\n"
