"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

from ocam import kernels
from ocam.synth.rng import SplitMix64


def _data(n, seed=1):
    rng = SplitMix64(seed)
    x = [rng.randbelow(max(2, n // 10)) for _ in range(n)]
    y = [rng.gauss() for _ in range(n)]
    return x, y


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the Python backend is timed")
    print(f"{'kernel':<28}{'backend':<10}{'best (ms)':>12}{'speed-up':>10}")
    cases = [(f"kendall_counts n={n}", "kendall_counts", _data(n)) for n in (200, 2000, 20000)]
    cases += [(f"mwu_null_counts {a}x{b}", "mwu_null_counts", (a, b)) for a, b in ((6, 6), (20, 25))]
    for label, fn_name, fn_args in cases:
        timings = {}
        for name, mod in backends.items():
            fn = getattr(mod, fn_name)
            number = 3
            best = min(timeit.repeat(lambda: fn(*fn_args), number=number, repeat=args.repeat)) / number
            timings[name] = best
        base = timings["python"]
        for name, t in timings.items():
            print(f"{label:<28}{name:<10}{t * 1e3:>12.3f}{base / t:>9.1f}x")


if __name__ == "__main__":
    main()
