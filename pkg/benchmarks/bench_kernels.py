"""Compare the compiled and pure-Python GF(q) kernels.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from pmrc import kernels
from pmrc.secure import build_code

CASES = [
    # (label, rows, cols, q)
    ("rank 20x20 q=257", 20, 20, 257),
    ("rank 60x80 q=65537", 60, 80, 65537),
    ("rref 40x40 q=2^31-1", 40, 40, 2147483647),
    ("matmul 64x64 q=2^31-1", 64, 64, 2147483647),
]


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_case(label, rows, cols, q, impl, repeat, rng):
    a = rng.integers(0, q, size=(rows, cols), dtype=np.int64)
    if label.startswith("rank"):
        return timeit(lambda: kernels.rank(a, q, impl=impl), repeat)
    if label.startswith("rref"):
        return timeit(lambda: kernels.rref(a, q, impl=impl), repeat)
    b = rng.integers(0, q, size=(cols, rows), dtype=np.int64)
    return timeit(lambda: kernels.matmul(a, b, q, impl=impl), repeat)


def bench_audit(impl, repeat):
    """A secrecy audit is dominated by small rank computations."""
    from pmrc import secrecy_audit
    saved = kernels._impl
    kernels._impl = impl
    try:
        code = build_code("msr", 8, 3, 6, 1, 1)
        return timeit(lambda: secrecy_audit.audit_all(code), repeat)
    finally:
        kernels._impl = saved


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    rng = np.random.default_rng(0)
    names = sorted(backends)
    print(f"{'case':<26}" + "".join(f"{n:>12}" for n in names) + "     speedup")
    rows = [(label, [bench_case(label, r, c, q, backends[n], args.repeat, rng) for n in names])
            for label, r, c, q in CASES]
    rows.append(("audit msr(8,3,6) l=1 l'=1", [bench_audit(backends[n], args.repeat) for n in names]))
    for label, times in rows:
        speed = ""
        if "cython" in names:
            speed = f"{times[names.index('python')] / times[names.index('cython')]:10.1f}x"
        print(f"{label:<26}" + "".join(f"{t * 1e3:10.2f}ms" for t in times) + speed)


if __name__ == "__main__":
    main()
