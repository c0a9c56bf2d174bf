"""Exact fixed-point arithmetic on [0,1) modulo 1.

Values are stored as B-bit integer mantissas (value = mantissa / 2^B) together
with a rigorous error radius in units of 2^-B.  All ring operations are exact
integer arithmetic mod 2^B; the error radius only grows, never shrinks, so a
classification made against it is a certificate, not an estimate.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from fractions import Fraction

# Hard cap on wide-integer operands; runs that would need more are rejected
# up front so memory use stays predictable.
MAX_WIDE_BITS = 4096

# Guard bits kept between the error radius and the working precision.
GUARD_BITS = 60

PRECISION_ENV_VAR = "RECLAB_PRECISION_BITS"


class PrecisionError(ArithmeticError):
    """The configured precision cannot absorb the requested operation."""


class Membership(enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    UNCERTAIN = "uncertain"


@dataclass(frozen=True, slots=True)
class Precision:
    """Working precision in bits, subject to the run policy.

    Policy: B = k * ceil(log2(n_max)) + 64.  The integer part of n^k * alpha
    consumes about k*log2(n_max) bits; 64 guard bits keep the accumulated
    error radius below 2^-60.
    """

    bits: int

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("precision must be positive")
        if self.bits > MAX_WIDE_BITS:
            raise PrecisionError(
                f"precision {self.bits} exceeds the {MAX_WIDE_BITS}-bit wide-integer cap"
            )

    @staticmethod
    def policy_bits(k: int, n_max: int) -> int:
        if k < 1 or n_max < 1:
            raise ValueError("k and n_max must be positive")
        # (n_max - 1).bit_length() is ceil(log2(n_max)), exactly
        return k * max(1, (n_max - 1).bit_length()) + 64

    @classmethod
    def for_run(cls, k: int, n_max: int, override: int | None = None) -> "Precision":
        """Resolve the precision for a run of order k up to n_max.

        Resolution order: explicit override, then RECLAB_PRECISION_BITS, then
        the policy default.  Overrides below the policy minimum are rejected.
        """
        minimum = cls.policy_bits(k, n_max)
        if override is None:
            env = os.environ.get(PRECISION_ENV_VAR)
            override = int(env) if env else None
        if override is None:
            return cls(minimum)
        if override < minimum:
            raise PrecisionError(
                f"requested {override} bits but the (k={k}, n_max={n_max}) policy needs {minimum}"
            )
        return cls(override)


@dataclass(frozen=True, slots=True)
class UnitValue:
    """A point of [0,1): mantissa/2^bits with error radius err * 2^-bits."""

    mantissa: int
    err: int
    bits: int

    def __post_init__(self):
        if not 0 <= self.mantissa < (1 << self.bits):
            raise ValueError("mantissa out of range for declared bit width")
        if self.err < 0:
            raise ValueError("error radius must be non-negative")

    @classmethod
    def exact(cls, value: Fraction | int, bits: int) -> "UnitValue":
        """The dyadic point nearest below value mod 1; err reflects any truncation."""
        frac = Fraction(value) % 1
        scaled = frac * (1 << bits)
        mant = int(scaled)  # floor; frac >= 0
        return cls(mant, 0 if scaled == mant else 1, bits)

    @property
    def value(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.bits)

    def add(self, other: "UnitValue") -> "UnitValue":
        if other.bits != self.bits:
            raise ValueError("mixed precisions")
        return UnitValue(
            (self.mantissa + other.mantissa) & ((1 << self.bits) - 1),
            self.err + other.err,
            self.bits,
        )

    def mul_int(self, c: int) -> "UnitValue":
        return UnitValue(
            (self.mantissa * c) % (1 << self.bits),
            self.err * abs(c),
            self.bits,
        )

    def circle_sub(self, other: "UnitValue") -> "UnitValue":
        if other.bits != self.bits:
            raise ValueError("mixed precisions")
        return UnitValue(
            (self.mantissa - other.mantissa) % (1 << self.bits),
            self.err + other.err,
            self.bits,
        )

    def to_float(self) -> float:
        """Truncate to the top 53 bits; exact and backend-independent."""
        if self.bits >= 53:
            top = self.mantissa >> (self.bits - 53)
        else:
            top = self.mantissa << (53 - self.bits)
        return float(top) * 2.0**-53

    def to_decimal(self, digits: int = 30) -> str:
        """Truncated decimal expansion, deterministic digit by digit."""
        scaled = (self.mantissa * 10**digits) >> self.bits
        return "0." + str(scaled).rjust(digits, "0")


@dataclass(frozen=True, slots=True)
class AlphaSpec:
    """Quadratic surd (p + q*sqrt(d)) / r, the symbolic source of alpha.

    Text format: "surd:p,q,r,d" (e.g. "surd:0,1,1,2" is sqrt(2)).
    """

    p: int
    q: int
    r: int
    d: int
    label: str = ""

    def __post_init__(self):
        if self.r == 0:
            raise ValueError("malformed surd: r must be nonzero")
        if self.q == 0:
            raise ValueError("not irrational: q = 0")
        if self.d <= 0:
            raise ValueError("malformed surd: d must be positive")
        if math.isqrt(self.d) ** 2 == self.d:
            raise ValueError(f"not irrational: d = {self.d} is a perfect square")

    @classmethod
    def parse(cls, text: str, label: str = "") -> "AlphaSpec":
        if not text.startswith("surd:"):
            raise ValueError(f"unrecognized alpha spec {text!r}; expected surd:p,q,r,d")
        parts = text[len("surd:"):].split(",")
        if len(parts) != 4:
            raise ValueError(f"surd spec needs 4 integers, got {text!r}")
        p, q, r, d = (int(x) for x in parts)
        return cls(p, q, r, d, label or text)

    def to_text(self) -> str:
        return f"surd:{self.p},{self.q},{self.r},{self.d}"

    def scaled(self, divisor: int) -> "AlphaSpec":
        """The surd for alpha / divisor (same d, denominator multiplied)."""
        if divisor == 0:
            raise ValueError("divisor must be nonzero")
        return AlphaSpec(self.p, self.q, self.r * divisor, self.d,
                         f"({self.label or self.to_text()})/{divisor}")


def realize(a: AlphaSpec, prec: Precision) -> UnitValue:
    """Fixed-point image of frac(alpha) with |stored - true| <= 2^-B.

    Computed from an integer square root at guard precision, truncated (never
    rounded): the guard approximation brackets sqrt(d), and the bracket is
    tightened until both ends agree on floor(alpha * 2^B).
    """
    bits = prec.bits
    p, q, r = a.p, a.q, a.r
    if r < 0:
        p, q, r = -p, -q, -r
    guard = 2 * bits
    while guard <= 64 * bits:
        s = math.isqrt(a.d << (2 * guard))
        # s <= sqrt(d)*2^guard < s+1
        if q > 0:
            num_lo, num_hi = p * (1 << guard) + q * s, p * (1 << guard) + q * (s + 1)
        else:
            num_lo, num_hi = p * (1 << guard) + q * (s + 1), p * (1 << guard) + q * s
        den = r << guard
        x_lo = (num_lo << bits) // den
        x_hi = (num_hi << bits) // den
        if x_lo == x_hi:
            return UnitValue(x_lo % (1 << bits), 1, bits)
        guard *= 2
    raise PrecisionError("square-root bracket failed to settle; alpha too close to dyadic")


def frac_npow(n: int, k: int, a: UnitValue) -> UnitValue:
    """Exact fractional part of n^k * (a.mantissa / 2^B), err = n^k * a.err."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    width = k * n.bit_length() + a.bits
    if width > MAX_WIDE_BITS:
        raise PrecisionError(
            f"n^k * mantissa needs ~{width} bits, beyond the {MAX_WIDE_BITS}-bit cap"
        )
    scale = n**k
    err = scale * a.err
    if err >= 1 << (a.bits - GUARD_BITS):
        raise PrecisionError(
            f"insufficient precision: n^k * err = {err} >= 2^{a.bits - GUARD_BITS}; "
            "re-realize alpha at higher B"
        )
    return UnitValue((scale * a.mantissa) % (1 << a.bits), err, a.bits)


def dist_to_integer(a: UnitValue) -> UnitValue:
    """min(a, 1-a): distance to the closest integer, same error radius."""
    other = ((1 << a.bits) - a.mantissa) % (1 << a.bits)
    return UnitValue(min(a.mantissa, other), a.err, a.bits)


def interval_test(a: UnitValue, lo: Fraction, hi: Fraction) -> Membership:
    """Certified membership of a in the closed interval [lo, hi].

    INSIDE iff the whole uncertainty interval sits in [lo, hi]; OUTSIDE iff it
    is disjoint from it; UNCERTAIN otherwise (only possible within err of an
    endpoint).  The uncertainty interval wraps mod 1, so a value within err of
    0 or 1 is compared as a circle arc, not a real segment.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    if not (0 <= lo < hi <= 1):
        raise ValueError("need 0 <= lo < hi <= 1")
    v = a.value
    e = Fraction(a.err, 1 << a.bits)
    if 2 * e >= 1:
        return Membership.UNCERTAIN
    left, right = v - e, v + e
    if left >= 0 and right <= 1:
        if lo <= left and right <= hi:
            return Membership.INSIDE
        if right < lo or left > hi:
            return Membership.OUTSIDE
        return Membership.UNCERTAIN
    if left < 0:
        # arc [1+left, 1) U [0, right]
        if lo == 0 and hi == 1:
            return Membership.INSIDE
        if right < lo and 1 + left > hi:
            return Membership.OUTSIDE
        return Membership.UNCERTAIN
    # right > 1: arc [left, 1) U [0, right-1]
    if lo == 0 and hi == 1:
        return Membership.INSIDE
    if right - 1 < lo and left > hi:
        return Membership.OUTSIDE
    return Membership.UNCERTAIN
