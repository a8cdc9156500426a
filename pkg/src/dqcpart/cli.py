"""``dqcpart`` command line: partition, extract, verify and bench."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .circuit import LayeredCircuit, schedule_layers
from .cost import Assignment
from .errors import DQCError
from .extraction import decompose_primitives, extract, from_json, to_json, to_qasm
from .generators import gen_cp_fraction, gen_qaoa, gen_qft, gen_qv
from .grouping import greedy_grouping
from .hypergraph import build_temporal_graph
from .multilevel import METHODS, multilevel_partition, recursive_level_count
from .qasm import parse_qasm
from .transpile import transpile_to_ucp
from .verify import check_equivalence

SCHEMA = 1
CSV_FIELDS = ["family", "n_q", "d", "param", "K", "method", "grouped", "seed", "cost",
              "ebit_fraction", "time_ms", "schema"]


class UsageError(Exception):
    pass


def parse_gen(spec: str, seed: int) -> tuple[LayeredCircuit, dict]:
    """``cp:n,d,p[,seed]``, ``qft:n``, ``qaoa:n,prob[,layers[,seed]]``, ``qv:n,layers[,seed]``."""
    fam, _, rest = spec.partition(":")
    args = [a for a in rest.split(",") if a]
    try:
        if fam == "cp" and len(args) in (3, 4):
            n, d, p = int(args[0]), int(args[1]), float(args[2])
            s = int(args[3]) if len(args) == 4 else seed
            return gen_cp_fraction(n, d, p, s), {"family": "cp", "param": p, "gen_seed": s}
        if fam == "qft" and len(args) == 1:
            return gen_qft(int(args[0])), {"family": "qft", "param": "", "gen_seed": None}
        if fam == "qaoa" and len(args) in (2, 3, 4):
            n, prob = int(args[0]), float(args[1])
            layers = int(args[2]) if len(args) > 2 else 1
            s = int(args[3]) if len(args) > 3 else seed
            return gen_qaoa(n, prob, layers, s), {"family": "qaoa", "param": prob, "gen_seed": s}
        if fam == "qv" and len(args) in (2, 3):
            n, layers = int(args[0]), int(args[1])
            s = int(args[2]) if len(args) > 2 else seed
            return gen_qv(n, layers, s), {"family": "qv", "param": layers, "gen_seed": s}
    except ValueError as exc:
        raise UsageError(f"bad generator spec {spec!r}: {exc}") from None
    raise UsageError(f"bad generator spec {spec!r}")


def load_circuit(input_path: str | None, gen: str | None, seed: int) -> tuple[LayeredCircuit, dict]:
    if (input_path is None) == (gen is None):
        raise UsageError("give exactly one of --input or --gen")
    if gen is not None:
        circ, meta = parse_gen(gen, seed)
        meta["gen"] = gen
        return circ, meta
    try:
        with open(input_path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise UsageError(f"cannot read {input_path}: {exc.strerror}") from None
    gates, n = parse_qasm(text)
    return schedule_layers(transpile_to_ucp(gates), n), {"family": "qasm", "param": "", "input": input_path}


def resolve_cap(cap: str, n_q: int, K: int) -> list[int]:
    if cap == "auto":
        c = n_q // K + 1
    elif cap == "tight":
        c = math.ceil(n_q / K)
    else:
        try:
            c = int(cap)
        except ValueError:
            raise UsageError(f"--cap must be an integer, 'auto' or 'tight', got {cap!r}") from None
    return [c] * K


def resolve_move_cap(value: str) -> float | None:
    if value == "auto":
        return None
    try:
        f = float(value)
    except ValueError:
        raise UsageError(f"--move-cap must be a fraction or 'auto', got {value!r}") from None
    if not 0 < f <= 1:
        raise UsageError("--move-cap fraction must lie in (0, 1]")
    return f


def run_partition(circ: LayeredCircuit, K: int, cap: list[int], method: str, grouped: bool,
                  passes: int, move_cap_fraction: float | None, explore: bool, seed: int,
                  restarts: int = 1, levels: int | None = None):
    """Partition ``circ``; flat FM gets the same total pass budget as the recursive method."""
    t0 = time.perf_counter()
    h = build_temporal_graph(circ)
    if grouped:
        h = greedy_grouping(h)
    if method == "flat":
        passes = passes * recursive_level_count(h.d)
    res = multilevel_partition(h, method, K, cap, passes=passes, alternate=explore,
                               move_cap_fraction=move_cap_fraction, seed=seed,
                               restarts=restarts, levels=levels)
    return h, res, (time.perf_counter() - t0) * 1e3


def _fraction(cost: int, denom: int):
    return cost / denom if denom else None


def cmd_partition(a) -> int:
    circ, meta = load_circuit(a.input, a.gen, a.seed)
    if circ.depth == 0:
        raise UsageError("circuit has no gates")
    cap = resolve_cap(a.cap, circ.num_qubits, a.qpus)
    h, res, ms = run_partition(circ, a.qpus, cap, a.method, a.group == "on", a.passes,
                               resolve_move_cap(a.move_cap), a.explore == "on", a.seed,
                               a.restarts, a.levels)
    n2 = circ.two_qubit_count
    out = {
        "schema": SCHEMA,
        "circuit": {**meta, "n_q": circ.num_qubits, "depth": circ.depth, "two_qubit_gates": n2},
        "K": a.qpus,
        "cap": cap,
        "method": a.method,
        "grouped": a.group == "on",
        "seed": a.seed,
        "cost": res.cost,
        "initial_cost": res.initial_cost,
        "ebit_fraction": _fraction(res.cost, n2),
        "ebit_per_qubit": _fraction(res.cost, circ.num_qubits),
        "time_ms": 0.0 if a.no_timing else round(ms, 3),
        "level_best": res.level_best,
        "trace": [{"level": r.level, "pass": r.pass_index, "cost": r.cost,
                   "elapsed_ms": 0.0 if a.no_timing else round(r.elapsed_ms, 3)} for r in res.trace],
        "assignment": res.phi.phi.tolist(),
    }
    _write(json.dumps(out, indent=2) + "\n", a.out)
    if a.trace_csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "pass", "cost", "elapsed_ms"])
        for r in out["trace"]:
            w.writerow([r["level"], r["pass"], r["cost"], r["elapsed_ms"]])
        _write(buf.getvalue(), a.trace_csv)
    return 0


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _circuit_from_meta(meta: dict, a) -> LayeredCircuit:
    if a.input or a.gen:
        return load_circuit(a.input, a.gen, a.seed)[0]
    if "gen" in meta:
        return parse_gen(meta["gen"], meta.get("gen_seed") or 0)[0]
    if "input" in meta:
        return load_circuit(meta["input"], None, 0)[0]
    raise UsageError("cannot reconstruct the circuit; pass --input or --gen")


def cmd_extract(a) -> int:
    part = _load_json(a.partition)
    circ = _circuit_from_meta(part["circuit"], a)
    h = build_temporal_graph(circ)
    if part.get("grouped"):
        h = greedy_grouping(h)
    phi = Assignment(np.array(part["assignment"]), part["K"], part["cap"], list(h.times))
    if phi.phi.shape != (h.d, h.n_q):
        raise UsageError("assignment does not match the circuit")
    dc = extract(h, phi)
    if a.level == "gate":
        dc = decompose_primitives(dc)
    data = to_json(dc)
    data["circuit"] = part["circuit"]
    _write(json.dumps(data, indent=2) + "\n", a.out)
    if a.qasm:
        _write(to_qasm(dc), a.qasm)
    return 0


def cmd_verify(a) -> int:
    data = _load_json(a.extracted)
    circ = _circuit_from_meta(data.get("circuit", {}), a)
    dc = from_json(data)
    rep = check_equivalence(circ, dc, mode=a.mode, tol=a.tol, shots=a.shots, seed=a.seed)
    print(f"tvd={rep.tvd:.6g} tol={rep.tol:.6g} mode={rep.mode} {'PASS' if rep.passed else 'FAIL'}")
    return 0 if rep.passed else 1


def _bench_cell(cell):
    gen, K, cap_s, method, grouped, seed, passes, explore, no_timing = cell
    circ, meta = parse_gen(gen, seed)
    cap = resolve_cap(cap_s, circ.num_qubits, K)
    _, res, ms = run_partition(circ, K, cap, method, grouped, passes, None, explore, seed)
    n2 = circ.two_qubit_count
    frac = _fraction(res.cost, n2)
    return {
        "family": meta["family"], "n_q": circ.num_qubits, "d": circ.depth, "param": meta["param"],
        "K": K, "method": method, "grouped": int(grouped), "seed": seed, "cost": res.cost,
        "ebit_fraction": "" if frac is None else f"{frac:.6f}",
        "time_ms": "0.0" if no_timing else f"{ms:.3f}", "schema": SCHEMA,
    }


def cmd_bench(a) -> int:
    methods = a.methods.split(",")
    for m in methods:
        if m not in METHODS:
            raise UsageError(f"unknown method {m!r}")
    groupings = {"on": [True], "off": [False], "both": [False, True]}[a.group]
    for g in a.gen:
        parse_gen(g, 0)
    cells = [(g, a.qpus, a.cap, m, grp, s, a.passes, a.explore == "on", a.no_timing)
             for g in a.gen for grp in groupings for m in methods
             for s in range(a.seed, a.seed + a.seeds)]
    if a.jobs > 1:
        with ProcessPoolExecutor(a.jobs) as ex:
            rows = list(ex.map(_bench_cell, cells))
    else:
        rows = [_bench_cell(c) for c in cells]
    rows.sort(key=lambda r: (r["family"], r["n_q"], r["d"], str(r["param"]), r["K"],
                             METHODS.index(r["method"]), r["grouped"], r["seed"]))
    buf = io.StringIO()
    w = csv.DictWriter(buf, CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _write(buf.getvalue(), a.out)
    return 0


def _write(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def _circuit_args(p: argparse.ArgumentParser):
    p.add_argument("--input", help="OpenQASM 2.0 file")
    p.add_argument("--gen", help="generator spec, e.g. cp:32,32,0.5 | qft:16 | qaoa:16,0.5 | qv:8,4")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dqcpart", description="Partition quantum circuits across QPUs.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("partition", help="partition a circuit and write a result JSON")
    _circuit_args(p)
    p.add_argument("--qpus", type=int, required=True)
    p.add_argument("--cap", default="tight", help="per-QPU capacity: int, 'auto' (n//K+1) or 'tight' (ceil(n/K))")
    p.add_argument("--method", choices=METHODS, default="recursive")
    p.add_argument("--group", choices=("on", "off"), default="on")
    p.add_argument("--passes", type=int, default=10, help="FM passes per level")
    p.add_argument("--move-cap", default="auto", help="fraction of nodes moved per pass, or 'auto'")
    p.add_argument("--explore", choices=("on", "off"), default="on")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--no-timing", action="store_true", help="zero all timings for reproducible output")
    p.add_argument("--trace-csv", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("extract", help="build the distributed circuit for a partition JSON")
    p.add_argument("--partition", required=True)
    _circuit_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--level", choices=("primitive", "gate"), default="gate")
    p.add_argument("--qasm", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("verify", help="compare an extracted circuit with its source")
    p.add_argument("--extracted", required=True)
    _circuit_args(p)
    p.add_argument("--mode", choices=("exact", "sampled"), default="sampled")
    p.add_argument("--shots", type=int, default=4096)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="sweep generators, methods and seeds into CSV")
    p.add_argument("--gen", action="append", required=True)
    p.add_argument("--qpus", type=int, default=4)
    p.add_argument("--cap", default="auto")
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--group", choices=("on", "off", "both"), default="on")
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--passes", type=int, default=10)
    p.add_argument("--explore", choices=("on", "off"), default="on")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-timing", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    try:
        return a.func(a)
    except UsageError as exc:
        ap.exit(2, f"dqcpart {a.cmd}: error: {exc}\n")
    except DQCError as exc:
        ap.exit(2, f"dqcpart {a.cmd}: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
