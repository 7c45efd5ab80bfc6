"""Compare the compiled and pure-Python kernels.

Times ``regular_filter`` on random automata and masks, then one full solve
of a regular-heavy model with each backend plugged in.

    python benchmarks/bench_kernels.py [--length 200] [--repeat 5]
"""

from __future__ import annotations

import argparse
import random
import time
import timeit

from stringzinc import flatten_int, parse_model
from stringzinc.solver import Solver, _pykernels, kernels

MODEL = """
var string({n}) of {{"a", "b", "c"}}: x;
constraint str_len(x) = {n};
constraint str_dfa(x, 4, ["a", "b", "c"], [| 2, 1, 3 | 2, 4, 1 | 1, 3, 3 | 4, 4, 2 |], 1, {{4}});
constraint str_gcc(x, ["c"], [{c}]);
solve satisfy;
"""


def random_case(rng: random.Random, n: int, q: int, s: int) -> tuple:
    table = [rng.randint(0, q) for _ in range(q * s)]
    finals = sum(1 << f for f in range(1, q + 1) if rng.random() < 0.5) or 1 << q
    masks = [rng.randint(1, (1 << s) - 1) for _ in range(n)]
    return masks, q, s, table, 1, finals


def bench_filter(impl, cases: list, repeat: int) -> float:
    def run() -> None:
        for c in cases:
            impl(*c)
    return min(timeit.repeat(run, number=1, repeat=repeat))


def bench_solve(impl, n: int) -> tuple:
    saved = kernels.regular_filter
    kernels.regular_filter = impl
    try:
        text = flatten_int(parse_model(MODEL.format(n=n, c=n // 3)), n).emit()
        t = time.perf_counter()
        res = Solver(text).solve(time_limit=120)
        return time.perf_counter() - t, res.status
    finally:
        kernels.regular_filter = saved


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", type=int, default=200, help="word length")
    ap.add_argument("--cases", type=int, default=200, help="random filter calls")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    try:
        from stringzinc.solver import _kernels
    except ImportError:
        print("compiled kernels are not built; only the Python backend is available")
        _kernels = None

    rng = random.Random(args.seed)
    cases = [random_case(rng, args.length, rng.randint(2, 12), rng.randint(2, 8))
             for _ in range(args.cases)]
    backends = [("python", _pykernels.regular_filter)]
    if _kernels is not None:
        backends.append(("cython", _kernels.regular_filter))
        for c in cases:
            assert _kernels.regular_filter(*c) == _pykernels.regular_filter(*c)

    print(f"regular_filter: {args.cases} calls, length {args.length}")
    times = {}
    for name, impl in backends:
        times[name] = bench_filter(impl, cases, args.repeat)
        print(f"  {name:7s} {times[name] * 1e3:9.2f} ms")
    if len(times) == 2:
        print(f"  speedup {times['python'] / times['cython']:.1f}x")

    print(f"full solve, regular + gcc model at length {args.length}")
    for name, impl in backends:
        dt, status = bench_solve(impl, args.length)
        print(f"  {name:7s} {dt:9.2f} s  {status}")


if __name__ == "__main__":
    main()
