"""Time the compiled and numpy point-cloud kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--sizes 2000,8000,20000]

Both backends must return identical values; the script checks that before
reporting timings.
"""

import argparse
import timeit

import numpy as np

from salimits import kernels


def circle_cloud(n, rng, noise=0.01):
    theta = rng.uniform(0, 2 * np.pi, n)
    r = 1 + rng.normal(0, noise, n)
    return np.ascontiguousarray(np.column_stack([r * np.cos(theta), r * np.sin(theta)]))


def cases(sizes, rng):
    for n in sizes:
        A, B = circle_cloud(n, rng), circle_cloud(n, rng)
        yield f"hausdorff-grid n={n}", lambda m, A=A, B=B: m.directed_sq_grid(A, B, 0.02)
        yield f"components n={n}", lambda m, A=A: m.components_grid(A, 0.05)[0]
    A, B = circle_cloud(1500, rng), circle_cloud(1500, rng)
    yield "hausdorff-brute n=1500", lambda m: m.directed_sq_brute(A, B)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--sizes", default="2000,8000,20000")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if kernels.compiled is None:
        raise SystemExit("compiled kernels are not built; reinstall with Cython available")
    rng = np.random.default_rng(args.seed)
    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"{'case':<26}{'numpy [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for name, fn in cases(sizes, rng):
        if fn(kernels.pure) != fn(kernels.compiled):
            raise SystemExit(f"{name}: backends disagree")
        slow = min(timeit.repeat(lambda: fn(kernels.pure), number=1, repeat=args.repeat))
        fast = min(timeit.repeat(lambda: fn(kernels.compiled), number=1, repeat=args.repeat))
        print(f"{name:<26}{slow:>12.4f}{fast:>12.4f}{slow / fast:>9.1f}x")


if __name__ == "__main__":
    main()
