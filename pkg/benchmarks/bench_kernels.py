"""Time the numba kernels against their pure-numpy/Python twins.

    python benchmarks/bench_kernels.py [--lines N] [--repeat R]

The first jit call (compilation, or cache load) is reported separately.
"""

import argparse
import random
import time

import numpy as np

from fpmine import kernels

SNIPPETS = [
    "const x = items.map((v) => v * 2);",
    "// plain comment",
    "",
    "/* block */ let s = 'str // not a comment';",
    "const re = /a[/]b/g; // trailing",
    "const t = `tpl ${a + `inner`} done`;",
    "/**",
    " * doc",
    " */",
    "function f(n) { return n ? f(n - 1) : 0; }",
]


def source(lines: int, seed: int = 0) -> bytes:
    rng = random.Random(seed)
    return ("\n".join(rng.choice(SNIPPETS) for _ in range(lines)) + "\n").encode()


def best(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lines", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    data = source(args.lines)
    _, classes = kernels.classify_lines_py(data)
    rng = np.random.default_rng(0)
    starts = rng.integers(1, args.lines, size=args.lines // 10)
    ends = starts + rng.integers(0, 30, size=starts.shape[0])

    if not kernels.NUMBA_AVAILABLE:
        print("numba is not installed; only the fallback can be timed")
    t0 = time.perf_counter()
    kernels.classify_lines_jit(data[:100])
    kernels.union_count_jit(starts[:2], ends[:2], classes)
    print(f"jit warm-up: {time.perf_counter() - t0:.3f} s")

    assert np.array_equal(kernels.classify_lines_jit(data)[1], classes)
    assert kernels.union_count_jit(starts, ends, classes) == kernels.union_count_py(starts, ends, classes)

    rows = [
        ("classify_lines", lambda: kernels.classify_lines_py(data), lambda: kernels.classify_lines_jit(data)),
        ("union_count", lambda: kernels.union_count_py(starts, ends, classes),
         lambda: kernels.union_count_jit(starts, ends, classes)),
    ]
    print(f"{len(data) / 1e6:.1f} MB, {args.lines} lines, {starts.shape[0]} intervals, best of {args.repeat}")
    print(f"{'kernel':<16}{'fallback s':>12}{'jit s':>12}{'speedup':>10}")
    for name, py, jit in rows:
        tp, tj = best(py, args.repeat), best(jit, args.repeat)
        print(f"{name:<16}{tp:>12.4f}{tj:>12.4f}{tp / tj:>9.1f}x")


if __name__ == "__main__":
    main()
