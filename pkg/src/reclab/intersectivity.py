"""Arithmetic-progression search with set-restricted differences.

The dense set lives in a single big-integer bitmap (bit n = membership of n),
so the inner test "n, n+d, ..., n+kd all present" is a word-parallel shifted
AND over the whole range at once; the d-loop over the difference set is the
only Python-level iteration.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .fixedpoint import AlphaSpec, Precision, frac_npow, realize
from .sequences import SetStream


@dataclass
class DenseSet:
    """Subset of [1, n_max] as a bitmap; bit i set iff i is a member."""

    n_max: int
    bitmap: int
    uncertain_count: int = 0

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be positive")
        if self.bitmap < 0 or self.bitmap >> (self.n_max + 1):
            raise ValueError("bitmap has bits outside [1, n_max]")
        if self.bitmap & 1:
            raise ValueError("bit 0 must be clear (sets start at 1)")

    @classmethod
    def from_elements(cls, elements, n_max: int) -> "DenseSet":
        bm = 0
        for n in elements:
            n = int(n)
            if not 1 <= n <= n_max:
                raise ValueError(f"element {n} outside [1, {n_max}]")
            bm |= 1 << n
        return cls(n_max, bm)

    @classmethod
    def full(cls, n_max: int) -> "DenseSet":
        return cls(n_max, ((1 << n_max) - 1) << 1)

    @classmethod
    def empty(cls, n_max: int) -> "DenseSet":
        return cls(n_max, 0)

    @classmethod
    def random_half(cls, n_max: int, seed: int) -> "DenseSet":
        """Each of 1..n_max independently present with probability 1/2."""
        rng = random.Random(seed)
        return cls(n_max, rng.getrandbits(n_max) << 1)

    def __contains__(self, n: int) -> bool:
        return 1 <= n <= self.n_max and bool(self.bitmap >> n & 1)

    def __len__(self) -> int:
        return self.bitmap.bit_count()

    @property
    def density(self) -> Fraction:
        return Fraction(self.bitmap.bit_count(), self.n_max)

    def elements(self) -> list[int]:
        out = []
        bm = self.bitmap
        while bm:
            low = bm & -bm
            out.append(low.bit_length() - 1)
            bm ^= low
        return out

    def save(self, path: str | Path) -> None:
        with Path(path).open("w") as fh:
            fh.write(f"# reclab-denseset n_max={self.n_max}\n")
            for n in self.elements():
                fh.write(f"{n}\n")

    @classmethod
    def load(cls, path: str | Path, n_max: int | None = None) -> "DenseSet":
        """Read a set file: integers one per line, or inclusive ranges "a-b"."""
        elems: list[int] = []
        declared = None
        with Path(path).open() as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    for kv in line[1:].split():
                        if kv.startswith("n_max="):
                            declared = int(kv.split("=", 1)[1])
                    continue
                if "-" in line[1:]:
                    a, b = line.split("-", 1)
                    elems.extend(range(int(a), int(b) + 1))
                else:
                    elems.append(int(line))
        if n_max is None:
            n_max = declared if declared is not None else (max(elems) if elems else 1)
        return cls.from_elements(elems, n_max)


@dataclass(frozen=True, slots=True)
class APWitness:
    start: int
    diff: int
    length: int

    def terms(self) -> list[int]:
        return [self.start + i * self.diff for i in range(self.length)]

    def validate(self, dense: DenseSet, diffs) -> bool:
        return all(t in dense for t in self.terms()) and self.diff in diffs


@dataclass(frozen=True, slots=True)
class ScanStats:
    total_witnesses: int
    diffs_with_witness: int
    diffs_searched: int


def _diff_values(s, limit: int) -> list[int]:
    if isinstance(s, SetStream):
        return [int(d) for d in s.elements[: s.count_upto(limit)]]
    return sorted(int(d) for d in s if 1 <= int(d) <= limit)


def _stride_mask(bm: int, d: int, k: int) -> int:
    m = bm
    for j in range(1, k + 1):
        m &= bm >> (j * d)
        if not m:
            return 0
    return m


def find_ap(dense: DenseSet, s, k: int) -> APWitness | None:
    """Lexicographically first (k+1)-term progression with difference in s.

    Exhaustive over d in s up to n_max/k (smallest d wins, then smallest
    start); returns None only when no witness exists in range.
    """
    if k < 1:
        raise ValueError("k must be positive")
    for d in _diff_values(s, dense.n_max // k):
        m = _stride_mask(dense.bitmap, d, k)
        if m:
            return APWitness((m & -m).bit_length() - 1, d, k + 1)
    return None


def intersectivity_scan(dense: DenseSet, s, k: int) -> ScanStats:
    """Count every witness, not just the first; the positive-control probe."""
    if k < 1:
        raise ValueError("k must be positive")
    total = 0
    with_witness = 0
    diffs = _diff_values(s, dense.n_max // k)
    for d in diffs:
        c = _stride_mask(dense.bitmap, d, k).bit_count()
        if c:
            with_witness += 1
            total += c
    return ScanStats(total, with_witness, len(diffs))


def build_witness(
    k: int,
    alpha: AlphaSpec,
    delta: Fraction,
    n_max: int,
    bits: int | None = None,
) -> DenseSet:
    """The no-progression witness: n with {n^k * (alpha/k!)} in [0, delta).

    For a (k+1)-term progression with difference d, the k-th finite difference
    of n -> n^k * (alpha/k!) telescopes to d^k * alpha, so d would satisfy
    dist(d^k * alpha) <= 2^k * delta < 1/4 and could not be a member of the
    order-k set.  The bound 2^k * delta < 1/4 is enforced, never assumed.
    """
    delta = Fraction(delta)
    if not 0 < delta:
        raise ValueError("delta must be positive")
    if 2**k * delta >= Fraction(1, 4):
        raise ValueError(
            f"delta too large: need 2^k * delta < 1/4, got {2 ** k * delta}"
        )
    prec = Precision.for_run(k, n_max, bits)
    gamma = realize(alpha.scaled(math.factorial(k)), prec)
    top = delta.numerator << prec.bits  # compare against delta * 2^B exactly
    bm = 0
    uncertain = 0
    mod = 1 << prec.bits
    for n in range(1, n_max + 1):
        v = frac_npow(n, k, gamma)
        v_lo, v_hi = v.mantissa - v.err, v.mantissa + v.err
        if v_lo >= 0 and v_hi * delta.denominator < top:
            bm |= 1 << n  # certified in [0, delta)
        elif not (v_lo * delta.denominator >= top and v_hi < mod):
            uncertain += 1  # straddles an endpoint or wraps across 0
    return DenseSet(n_max, bm, uncertain)
