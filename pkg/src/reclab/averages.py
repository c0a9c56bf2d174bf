"""Exponential-sum averages and the weighted-vs-unweighted comparison.

Phases are exact fixed point until the last step; cos/sin are applied to the
truncated 53-bit phase, so observed deviations measure equidistribution, not
arithmetic noise.  All reductions are fixed-shape pairwise trees over fixed
chunks, which makes every result bit-identical across worker counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .fixedpoint import AlphaSpec, Precision, UnitValue, frac_npow, realize
from .sequences import SetStream, gen_SkPrime, block_interval

CHUNK = kernels.CHUNK
REDUCTION = f"pairwise-tree/chunk={CHUNK}"

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, slots=True)
class ComplexAvg:
    re: float
    im: float
    n_terms: int
    reduction: str = REDUCTION

    @property
    def modulus(self) -> float:
        return math.hypot(self.re, self.im)


def _tree_sum(parts: list[complex]) -> complex:
    """Pairwise reduction with a shape fixed by the part count alone."""
    if not parts:
        return 0j
    vals = list(parts)
    while len(vals) > 1:
        vals = [
            vals[i] + vals[i + 1] if i + 1 < len(vals) else vals[i]
            for i in range(0, len(vals), 2)
        ]
    return vals[0]


def _phase_sum(phases: np.ndarray) -> complex:
    w = TWO_PI * phases
    return complex(np.cos(w).sum(), np.sin(w).sum())


def _element_phases(a: UnitValue, k: int, elems: np.ndarray) -> np.ndarray:
    if elems.dtype == object:
        # powered streams can exceed int64; fall back to per-element exact ops
        return np.array(
            [frac_npow(int(e), k, a).to_float() for e in elems], dtype=np.float64
        )
    return kernels.phases_at(a.mantissa, a.err, a.bits, k, elems)


def _element_task(args) -> complex:
    a_m, a_err, bits, k, elems = args
    return _phase_sum(kernels.phases_at(a_m, a_err, bits, k, elems))


def _range_task(args) -> complex:
    a_m, a_err, bits, k, lo, hi = args
    return _phase_sum(kernels.phase_range(a_m, a_err, bits, k, lo, hi))


def _chunk_sums_elements(a, k, elems, cuts=(), workers=1) -> tuple[list[complex], list[int]]:
    """Per-chunk complex sums over an element array, split at the given cuts."""
    spans = kernels.chunk_spans(0, len(elems), cuts=tuple(cuts)) if len(elems) else []
    if elems.dtype == object:
        parts = [_phase_sum(_element_phases(a, k, elems[lo:hi])) for lo, hi in spans]
        return parts, [hi for _, hi in spans]
    tasks = [(a.mantissa, a.err, a.bits, k, elems[lo:hi]) for lo, hi in spans]
    if workers <= 1 or len(tasks) <= 1:
        parts = [_element_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_element_task, tasks, chunksize=1))
    return parts, [hi for _, hi in spans]


def weyl_sum(
    seq: SetStream | None,
    k: int,
    alpha: AlphaSpec,
    n_terms: int,
    bits: int | None = None,
    workers: int = 1,
) -> ComplexAvg:
    """Average of e(a^k * alpha) over the first n_terms elements.

    seq=None averages over the raw integers 1..n_terms.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be positive")
    if seq is None:
        prec = Precision.for_run(k, n_terms, bits)
        a = realize(alpha, prec)
        spans = kernels.chunk_spans(1, n_terms + 1)
        tasks = [(a.mantissa, a.err, prec.bits, k, lo, hi) for lo, hi in spans]
        if workers <= 1 or len(tasks) <= 1:
            parts = [_range_task(t) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(_range_task, tasks, chunksize=1))
    else:
        if n_terms > len(seq.elements):
            raise ValueError(
                f"stream holds {len(seq.elements)} elements, {n_terms} requested"
            )
        elems = seq.elements[:n_terms]
        top = int(elems[-1]) if elems.dtype != object else int(max(elems))
        prec = Precision.for_run(k, max(top, 2), bits)
        a = realize(alpha, prec)
        parts, _ = _chunk_sums_elements(a, k, elems, workers=workers)
    z = _tree_sum(parts)
    return ComplexAvg(z.real / n_terms, z.imag / n_terms, n_terms)


def weyl_trajectory(
    seq: SetStream | None,
    k: int,
    alpha: AlphaSpec,
    n_terms: int,
    checkpoints: list[int],
    bits: int | None = None,
    workers: int = 1,
) -> list[tuple[int, ComplexAvg]]:
    """A_N at each checkpoint N, from one pass of per-chunk partial sums."""
    checkpoints = sorted(set(c for c in checkpoints if 1 <= c <= n_terms))
    if not checkpoints:
        return []
    if seq is None:
        prec = Precision.for_run(k, n_terms, bits)
        a = realize(alpha, prec)
        spans = kernels.chunk_spans(1, n_terms + 1, cuts=tuple(c + 1 for c in checkpoints))
        tasks = [(a.mantissa, a.err, prec.bits, k, lo, hi) for lo, hi in spans]
        if workers <= 1 or len(tasks) <= 1:
            parts = [_range_task(t) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(_range_task, tasks, chunksize=1))
        ends = [hi - 1 for _, hi in spans]
    else:
        if n_terms > len(seq.elements):
            raise ValueError(
                f"stream holds {len(seq.elements)} elements, {n_terms} requested"
            )
        elems = seq.elements[:n_terms]
        top = int(elems[-1]) if elems.dtype != object else int(max(elems))
        prec = Precision.for_run(k, max(top, 2), bits)
        a = realize(alpha, prec)
        parts, ends = _chunk_sums_elements(
            a, k, elems, cuts=tuple(checkpoints), workers=workers
        )
    out = []
    for c in checkpoints:
        z = _tree_sum([p for p, e in zip(parts, ends) if e <= c])
        out.append((c, ComplexAvg(z.real / c, z.imag / c, c)))
    return out


@dataclass(frozen=True, slots=True)
class BlockStat:
    j: int
    count: int
    re: float
    im: float
    re_lo: float  # analytic cosine bound, lower
    re_hi: float  # analytic cosine bound, upper

    @property
    def sign_ok(self) -> bool:
        slack = 1e-9  # trig evaluation slack; the bounds themselves are exact
        return self.count == 0 or (self.re_lo - slack <= self.re <= self.re_hi + slack)


@dataclass(frozen=True, slots=True)
class TrajectoryPoint:
    j: int
    n_elements: int
    re: float
    im: float


@dataclass(frozen=True, slots=True)
class BWindow:
    n: int
    re: float
    im: float
    combo_re: float  # 2*A_{2N} - A_N
    combo_im: float

    @property
    def identity_residual(self) -> float:
        return math.hypot(self.re - self.combo_re, self.im - self.combo_im)


@dataclass
class WindowReport:
    k: int
    j_max: int
    stream: SetStream
    blocks: list[BlockStat]
    trajectory: list[TrajectoryPoint]
    b_windows: list[BWindow]

    @property
    def sign_ok(self) -> bool:
        return all(b.sign_ok for b in self.blocks)

    def trajectory_gaps(self) -> list[tuple[int, float]]:
        """Distance between consecutive block-aligned averages (skipping empty prefixes)."""
        gaps = []
        prev = None
        for t in self.trajectory:
            if t.n_elements == 0:
                continue
            if prev is not None:
                gaps.append((t.j, math.hypot(t.re - prev.re, t.im - prev.im)))
            prev = t
        return gaps


def _block_bounds(j: int) -> tuple[float, float]:
    lo, hi = block_interval(j)
    # cos is monotone on phase intervals that avoid 0 and 1/2, so the certified
    # phase interval pins Re(e(phase)) between the endpoint cosines
    assert hi <= Fraction(1, 2) or lo >= Fraction(1, 2)
    a, b = math.cos(TWO_PI * float(lo)), math.cos(TWO_PI * float(hi))
    return min(a, b), max(a, b)


def block_sign_report(
    k: int,
    alpha: AlphaSpec,
    j_max: int,
    bits: int | None = None,
    workers: int = 1,
) -> WindowReport:
    """Per-block averages, the block-aligned average trajectory, and B_N windows."""
    stream = gen_SkPrime(k, alpha, j_max, bits=bits, workers=workers)
    a = realize(alpha, Precision(stream.bits)) if stream.bits else None
    n_elems = len(stream.elements)
    block_ends = [b.start_index + b.count for b in stream.blocks]
    pows = [1 << e for e in range(1, n_elems.bit_length()) if (1 << e) <= n_elems]
    halves = [p // 2 for p in pows]
    cuts = sorted(set(block_ends) | set(pows) | set(halves))
    parts, ends = ([], []) if n_elems == 0 else _chunk_sums_elements(
        a, k, stream.elements, cuts=tuple(cuts), workers=workers
    )

    def prefix(count: int) -> complex:
        take = [p for p, e in zip(parts, ends) if e <= count]
        return _tree_sum(take)

    blocks = []
    trajectory = []
    for b, end in zip(stream.blocks, block_ends):
        lo_b, hi_b = _block_bounds(b.j)
        if b.count:
            z = (prefix(end) - prefix(b.start_index)) / b.count
            blocks.append(BlockStat(b.j, b.count, z.real, z.imag, lo_b, hi_b))
        else:
            blocks.append(BlockStat(b.j, 0, 0.0, 0.0, lo_b, hi_b))
        if end:
            z = prefix(end) / end
            trajectory.append(TrajectoryPoint(b.j, end, z.real, z.imag))
        else:
            trajectory.append(TrajectoryPoint(b.j, 0, 0.0, 0.0))

    b_windows = []
    for n in halves:
        if n == 0 or 2 * n > n_elems:
            continue
        direct = (prefix(2 * n) - prefix(n)) / n
        a_n = prefix(n) / n
        a_2n = prefix(2 * n) / (2 * n)
        combo = 2 * a_2n - a_n
        b_windows.append(BWindow(n, direct.real, direct.imag, combo.real, combo.imag))
    return WindowReport(k, j_max, stream, blocks, trajectory, b_windows)


def _weighted_task(args) -> complex:
    (a_m, a_err, b_m, b_err, bits, k, lo, hi, t_lo, t_hi, g_int, c) = args
    cls = kernels.classify_range(
        a_m, a_err, bits, k, lo, hi, t_lo, t_hi
    )
    w = (cls == kernels.INSIDE).astype(np.float64) - g_int
    if c == 0:
        return complex(w.sum(), 0.0)
    phases = kernels.phase_range(b_m, b_err, bits, 1, lo, hi)
    ph = TWO_PI * phases
    return complex((np.cos(ph) * w).sum(), (np.sin(ph) * w).sum())


def weighted_average_diff(
    k: int,
    alpha: AlphaSpec,
    beta: AlphaSpec,
    weight_interval: tuple[Fraction, Fraction],
    exponents: tuple[int, ...],
    m_start: int,
    n_stop: int,
    bits: int | None = None,
    workers: int = 1,
) -> float:
    """Sup-norm distance between g-weighted and mean-weighted rotation averages.

    The product of characters e(m_i x) over T^i collapses to a unimodular
    constant times e(c n beta) with c = sum i*m_i, so the L2 distance of the
    two averages is the modulus of a scalar sum: |avg e(c n beta) * (g({n^k
    alpha}) - integral g)| over n in (m_start, n_stop].
    """
    if len(exponents) != k - 1:
        raise ValueError(f"need {k - 1} character exponents for order {k}")
    if not 0 <= m_start < n_stop:
        raise ValueError("need 0 <= m_start < n_stop")
    lo, hi = Fraction(weight_interval[0]), Fraction(weight_interval[1])
    if not 0 <= lo < hi <= 1:
        raise ValueError("weight interval must satisfy 0 <= lo < hi <= 1")
    if lo == 0 and hi == 1:
        return 0.0  # weight identically 1 and integral 1: the sums coincide
    c = sum(i * m for i, m in enumerate(exponents, start=1))
    prec = Precision.for_run(k, n_stop, bits)
    a = realize(alpha, prec)
    b = realize(beta, prec)
    cb_m = (abs(c) * b.mantissa) % (1 << prec.bits)
    if c < 0:
        cb_m = ((1 << prec.bits) - cb_m) % (1 << prec.bits)
    cb_err = abs(c) * b.err
    g_int = float(hi - lo)
    spans = kernels.chunk_spans(m_start + 1, n_stop + 1)
    tasks = [
        (a.mantissa, a.err, cb_m, cb_err, prec.bits, k, s, e, lo, hi, g_int, c)
        for s, e in spans
    ]
    if workers <= 1 or len(tasks) <= 1:
        parts = [_weighted_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_weighted_task, tasks, chunksize=1))
    return abs(_tree_sum(parts)) / (n_stop - m_start)


def _arc_intersection_length(starts: list[int], length: int, circumference: int) -> int:
    """Exact length of the intersection of arcs [s, s+length) on Z/circumference."""
    segments = [(starts[0], length)]
    for s in starts[1:]:
        clipped = []
        for a, la in segments:
            rel = (a - s) % circumference
            # overlap of [rel, rel+la) with [0, length) in shifted coordinates
            end = rel + la
            if rel < length:
                clipped.append(((rel + s) % circumference, min(end, length) - rel))
            if end > circumference and end - circumference > 0:
                over = min(end - circumference, length)
                if over > 0:
                    clipped.append((s % circumference, over))
        segments = clipped
        if not segments:
            return 0
    return sum(la for _, la in segments)


def _recurrence_task(args) -> int:
    (a_m, a_err, bits, k, lo_n, hi_n, t_lo, t_hi, b_m, den, arc_lo_u, arc_len_u) = args
    cls = kernels.classify_range(a_m, a_err, bits, k, lo_n, hi_n, t_lo, t_hi)
    circumference = den << bits
    total = 0
    for idx in np.nonzero(cls == kernels.INSIDE)[0]:
        n = lo_n + int(idx)
        starts = [arc_lo_u]
        for i in range(1, k):
            starts.append((arc_lo_u - i * n * b_m * den) % circumference)
        total += _arc_intersection_length(starts, arc_len_u, circumference)
    return total


def recurrence_average(
    k: int,
    alpha: AlphaSpec,
    beta: AlphaSpec,
    arc: tuple[Fraction, Fraction],
    n_stop: int,
    bits: int | None = None,
    workers: int = 1,
) -> float:
    """(1/N) sum over members n of the measure of A meet T^-n A ... T^-(k-1)n A.

    T is the circle rotation by beta and A the arc [arc_lo, arc_hi); the
    intersections are exact integer interval arithmetic on the circle.
    """
    arc_lo, arc_hi = Fraction(arc[0]), Fraction(arc[1])
    if not 0 <= arc_lo <= arc_hi <= 1:
        raise ValueError("arc must satisfy 0 <= lo <= hi <= 1")
    if arc_lo == arc_hi:
        return 0.0  # empty arc: every intersection is empty
    prec = Precision.for_run(k, max(n_stop * k, 2), bits)
    a = realize(alpha, prec)
    b = realize(beta, prec)
    den = math.lcm(arc_lo.denominator, arc_hi.denominator)
    arc_lo_u = int(arc_lo * den) << prec.bits
    arc_len_u = int((arc_hi - arc_lo) * den) << prec.bits
    t_lo, t_hi = Fraction(1, 4), Fraction(3, 4)
    spans = kernels.chunk_spans(1, n_stop + 1)
    tasks = [
        (a.mantissa, a.err, prec.bits, k, s, e, t_lo, t_hi,
         b.mantissa, den, arc_lo_u, arc_len_u)
        for s, e in spans
    ]
    if workers <= 1 or len(tasks) <= 1:
        totals = [_recurrence_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            totals = list(pool.map(_recurrence_task, tasks, chunksize=1))
    total = sum(totals)
    return float(Fraction(total, den << prec.bits) / n_stop)
