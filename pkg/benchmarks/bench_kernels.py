"""Compare the compiled and pure-Python FM kernels on CP-fraction circuits.

Usage: python3 benchmarks/bench_kernels.py [--sizes 16,32,64] [--passes 10]

Both kernels share the RNG and tie-breaking, so they must report identical costs;
the script checks this and prints the per-size speed-up.
"""
import argparse
import time

from dqcpart._backend import _fm_c
from dqcpart.cost import GainState, make_static_assignment
from dqcpart.generators import gen_cp_fraction
from dqcpart.grouping import greedy_grouping
from dqcpart.hypergraph import build_temporal_graph


def run(backend, h, K, cap, passes, seed):
    phi = make_static_assignment(h.n_q, h.times, K, cap)
    st = GainState(h, phi, seed=seed, backend=backend)
    cap_moves = max(1, st.cg.n_nodes // 8)
    t0 = time.perf_counter()
    costs = []
    for i in range(passes):
        st.kernel.fm_pass(cap_moves, i % 2 == 0)
        costs.append(st.total_cost())
    return time.perf_counter() - t0, costs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="16,32,64")
    ap.add_argument("--passes", type=int, default=10)
    ap.add_argument("--K", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    if _fm_c is None:
        raise SystemExit("compiled kernel not built; run `pip install -e . --no-build-isolation`")
    print(f"{'n_q x d':>9} {'python s':>10} {'cython s':>10} {'speed-up':>9}  same")
    for n in (int(x) for x in a.sizes.split(",")):
        h = greedy_grouping(build_temporal_graph(gen_cp_fraction(n, n, 0.5, a.seed)))
        cap = n // a.K + 1
        tp, cp_ = run("python", h, a.K, cap, a.passes, a.seed)
        tc, cc = run("cython", h, a.K, cap, a.passes, a.seed)
        print(f"{n:>4} x {n:<3} {tp:>10.3f} {tc:>10.4f} {tp / tc:>8.1f}x  {cp_ == cc}")


if __name__ == "__main__":
    main()
