"""Benchmark the compiled kernels against the pure-Python fallback.

Times the three hot loops (interval classification, contiguous phase
extraction, gather-style phase extraction) over a 10^6 range at the default
precision policy, then a full set generation end to end.

Usage: python benchmarks/bench_kernels.py [n_max]
"""

import sys
import time
from fractions import Fraction

import numpy as np

from reclab import AlphaSpec, Precision, gen_Sk, realize
from reclab import kernels

QUARTER = (Fraction(1, 4), Fraction(3, 4))


def timed(fn, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> int:
    n_max = int(sys.argv[1]) if len(sys.argv) > 1 else 10**6
    k = 2
    alpha = AlphaSpec.parse("surd:0,1,1,2")
    prec = Precision.for_run(k, n_max)
    a = realize(alpha, prec)
    ns = np.arange(1, n_max + 1, dtype=np.int64)

    if kernels._compiled is None:
        print("compiled kernels unavailable; nothing to compare")
        return 1

    jobs = {
        "classify_range": lambda: kernels.classify_range(
            a.mantissa, a.err, prec.bits, k, 1, n_max + 1, *QUARTER
        ),
        "phase_range": lambda: kernels.phase_range(
            a.mantissa, a.err, prec.bits, k, 1, n_max + 1
        ),
        "phases_at": lambda: kernels.phases_at(a.mantissa, a.err, prec.bits, k, ns),
        "gen_Sk (end to end)": lambda: gen_Sk(k, alpha, n_max).elements,
    }

    print(f"n_max={n_max}  k={k}  bits={prec.bits}")
    print(f"{'kernel':<22}{'pure':>12}{'compiled':>12}{'speedup':>10}")
    for name, job in jobs.items():
        kernels.use_backend("pure")
        t_pure, r_pure = timed(job)
        kernels.use_backend("compiled")
        t_comp, r_comp = timed(job)
        kernels.use_backend("auto")
        assert np.array_equal(r_pure, r_comp), f"{name}: backends disagree"
        print(f"{name:<22}{t_pure:>11.3f}s{t_comp:>11.3f}s{t_pure / t_comp:>9.1f}x")
    print("outputs bit-identical across backends")
    return 0


if __name__ == "__main__":
    sys.exit(main())
