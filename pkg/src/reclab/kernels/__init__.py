"""Hot inner loops: bulk classification and phase extraction for {n^k * alpha}.

The per-n work is a k-register forward-difference update mod 2^B (additions
only; no multiplications in the loop), so the same exact integer recurrence
runs either in the compiled extension (``_speedups``, built from Cython) or in
the pure-Python fallback (``_pure``).  The backend is selected at import; both
produce bit-identical output, which ``tests/test_kernels.py`` asserts.

Membership codes: 0 = outside, 1 = inside, 2 = uncertain.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from math import comb

import numpy as np

from ..fixedpoint import GUARD_BITS, PrecisionError

from . import _pure

OUTSIDE, INSIDE, UNCERTAIN = 0, 1, 2

CHUNK = 1 << 16

# Largest bit width the compiled limb loops accept (one spare carry bit per
# operand is reserved in the top limb).
_COMPILED_MAX_BITS = 64 * 8 - 1

try:
    from . import _speedups as _compiled
except ImportError:
    _compiled = None

_FORCED = os.environ.get("RECLAB_KERNEL_BACKEND", "auto")


def use_backend(name: str) -> None:
    """Force 'pure' or 'compiled', or restore 'auto'; for tests and benchmarks."""
    global _FORCED
    if name not in ("auto", "pure", "compiled"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "compiled" and _compiled is None:
        raise RuntimeError("compiled kernels are not available")
    _FORCED = name


def backend_name(bits: int | None = None) -> str:
    if _FORCED == "pure":
        return "pure"
    if _FORCED == "compiled":
        return "compiled"
    if _compiled is not None and (bits is None or 64 <= bits <= _COMPILED_MAX_BITS):
        return "compiled"
    return "pure"


def _mod_diff_table(mantissa: int, k: int, n0: int, bits: int) -> list[int]:
    """Forward differences of P(n) = mantissa * n^k mod 2^bits, at n0."""
    mod = 1 << bits
    p = [(mantissa * pow(n0 + i, k, mod)) % mod for i in range(k + 1)]
    return [
        sum((-1) ** (j - i) * comb(j, i) * p[i] for i in range(j + 1)) % mod
        for j in range(k + 1)
    ]


def _plain_diff_table(coeff: int, k: int, n0: int) -> list[int]:
    """Forward differences of coeff * n^k at n0, exact (all entries >= 0)."""
    p = [coeff * (n0 + i) ** k for i in range(k + 1)]
    return [
        sum((-1) ** (j - i) * comb(j, i) * p[i] for i in range(j + 1))
        for j in range(k + 1)
    ]


def interval_thresholds(lo: Fraction, hi: Fraction, bits: int) -> tuple[int, int]:
    """(ceil(lo*2^B), floor(hi*2^B)): the closed-interval comparison anchors."""
    t_lo = -((-lo.numerator << bits) // lo.denominator)
    t_hi = (hi.numerator << bits) // hi.denominator
    return t_lo, t_hi


def _check_budget(err0: int, bits: int, k: int, stop: int) -> None:
    if stop > 1 and err0 * (stop - 1) ** k >= 1 << (bits - GUARD_BITS):
        raise PrecisionError(
            f"insufficient precision: err = {err0} * {stop - 1}^{k} "
            f">= 2^{bits - GUARD_BITS}; re-realize alpha at higher B"
        )


def _to_limbs(x: int, nlimbs: int) -> np.ndarray:
    return np.frombuffer(x.to_bytes(nlimbs * 8, "little"), dtype="<u8").copy()


def _table_to_limbs(table: list[int], nlimbs: int) -> np.ndarray:
    return np.stack([_to_limbs(t, nlimbs) for t in table])


def classify_range(
    mantissa: int,
    err0: int,
    bits: int,
    k: int,
    start: int,
    stop: int,
    lo: Fraction,
    hi: Fraction,
) -> np.ndarray:
    """Membership codes of {n^k * (mantissa/2^B)} in closed [lo, hi], n in [start, stop).

    Requires interval endpoints at least the worst-case error radius away from
    0 and 1, so the uncertainty interval never wraps; point queries near the
    circle seam go through fixedpoint.interval_test instead.
    """
    if start < 1 or stop < start:
        raise ValueError("need 1 <= start <= stop")
    count = stop - start
    if count == 0:
        return np.empty(0, dtype=np.uint8)
    _check_budget(err0, bits, k, stop)
    t_lo, t_hi = interval_thresholds(Fraction(lo), Fraction(hi), bits)
    err_max = err0 * (stop - 1) ** k
    if t_lo - err_max <= 0 or t_hi + err_max >= 1 << bits:
        raise PrecisionError(
            "interval endpoints within the error radius of the circle seam; "
            "use a higher precision or fixedpoint.interval_test"
        )
    vtab = _mod_diff_table(mantissa, k, start, bits)
    etab = _plain_diff_table(err0, k, start)
    out = np.empty(count, dtype=np.uint8)
    if backend_name(bits) == "compiled":
        nlimbs = bits // 64 + 1
        _compiled.classify_block(
            _table_to_limbs(vtab, nlimbs),
            _table_to_limbs(etab, nlimbs),
            _to_limbs(t_lo, nlimbs),
            _to_limbs(t_hi, nlimbs),
            k,
            bits,
            out,
        )
    else:
        _pure.classify_block(vtab, etab, bits, k, count, t_lo, t_hi, out)
    return out


def phase_range(
    mantissa: int, err0: int, bits: int, k: int, start: int, stop: int
) -> np.ndarray:
    """Phases {n^k * (mantissa/2^B)} truncated to 53 bits, n in [start, stop)."""
    if start < 1 or stop < start:
        raise ValueError("need 1 <= start <= stop")
    if bits < 53:
        raise PrecisionError("phase extraction needs at least 53 bits")
    count = stop - start
    if count == 0:
        return np.empty(0, dtype=np.float64)
    _check_budget(err0, bits, k, stop)
    vtab = _mod_diff_table(mantissa, k, start, bits)
    out = np.empty(count, dtype=np.float64)
    if backend_name(bits) == "compiled":
        nlimbs = bits // 64 + 1
        _compiled.phase_block(_table_to_limbs(vtab, nlimbs), k, bits, out)
    else:
        _pure.phase_block(vtab, bits, k, count, out)
    return out


def phases_at(mantissa: int, err0: int, bits: int, k: int, ns: np.ndarray) -> np.ndarray:
    """Phases {n^k * (mantissa/2^B)} for the given n values (any order)."""
    if bits < 53:
        raise PrecisionError("phase extraction needs at least 53 bits")
    ns = np.asarray(ns, dtype=np.int64)
    if ns.size == 0:
        return np.empty(0, dtype=np.float64)
    if ns.min() < 1:
        raise ValueError("n values must be positive")
    _check_budget(err0, bits, k, int(ns.max()) + 1)
    out = np.empty(ns.size, dtype=np.float64)
    if backend_name(bits) == "compiled":
        nlimbs = bits // 64 + 1
        _compiled.phases_at(
            np.ascontiguousarray(ns), _to_limbs(mantissa, nlimbs), k, bits, out
        )
    else:
        _pure.phases_at(mantissa, bits, k, ns, out)
    return out


def chunk_spans(start: int, stop: int, cuts: tuple[int, ...] = ()) -> list[tuple[int, int]]:
    """Fixed chunk boundaries for [start, stop): multiples of CHUNK plus cuts.

    The layout depends only on the range (never on the worker count), which is
    what makes parallel runs bit-reproducible.
    """
    edges = {start, stop}
    edges.update(n for n in range(-(-start // CHUNK) * CHUNK, stop, CHUNK))
    edges.update(c for c in cuts if start < c < stop)
    ordered = sorted(edges)
    return list(zip(ordered[:-1], ordered[1:]))


def _classify_task(args) -> np.ndarray:
    return classify_range(*args)


def classify_spans(
    mantissa: int,
    err0: int,
    bits: int,
    k: int,
    spans: list[tuple[int, int]],
    lo: Fraction,
    hi: Fraction,
    workers: int = 1,
) -> list[np.ndarray]:
    """Classify each span independently, optionally across processes."""
    tasks = [(mantissa, err0, bits, k, a, b, lo, hi) for a, b in spans]
    if workers <= 1 or len(tasks) <= 1:
        return [_classify_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_classify_task, tasks, chunksize=1))
