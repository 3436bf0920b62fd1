"""Compare the compiled (numba) and pure-numpy kernel backends.

    python3 benchmarks/bench_kernels.py --sizes 5000 20000 50000 --events 8 --bound 10

Times are best-of-``--repeat`` wall-clock seconds after one warm-up call, so
numba compilation is excluded.
"""
import argparse
import time

from qnsc import kernels, sup_qc
from qnsc._accel import HAVE_NUMBA
from qnsc.oracle import SamplerParams, sample_generator


def best_of(fn, repeat):
    fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(g, bound):
    d, m = g.delta, g.marked
    return {
        "forward_reach": lambda: kernels.forward_reach(d, g.initial),
        "backward_reach": lambda: kernels.backward_reach(d, m),
        "counter_expand": lambda: kernels.counter_expand(d, m, g.initial, bound),
        "pair_product": lambda: kernels.pair_product(d, d, g.initial, g.initial),
        "first_passage": lambda: kernels.first_passage(d, m),
        "sup_qc": lambda: sup_qc(g, bound),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[5_000, 20_000, 50_000])
    ap.add_argument("--events", type=int, default=8)
    ap.add_argument("--bound", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)

    backends = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]
    if not HAVE_NUMBA:
        print("numba unavailable or disabled: timing the numpy backend only")
    print(f"{'states':>8} {'kernel':<15}" + "".join(f"{b:>11}" for b in backends) + ("    speedup" if len(backends) == 2 else ""))
    for n in args.sizes:
        g = sample_generator(SamplerParams(seed=args.seed, max_states=n, event_count=args.events,
                                           marked_fraction=0.3, transition_density=0.5), exact_states=True)
        names = list(cases(g, args.bound))
        times = {b: {} for b in backends}
        for b in backends:
            with kernels.use_backend(b):
                for name, fn in cases(g, args.bound).items():
                    times[b][name] = best_of(fn, args.repeat)
        for name in names:
            row = [times[b][name] for b in backends]
            line = f"{g.n_states:>8} {name:<15}" + "".join(f"{t:>10.4f}s" for t in row)
            if len(row) == 2:
                line += f"{row[1] / row[0]:>10.1f}x"
            print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
