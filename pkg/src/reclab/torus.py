"""The skew product R on the k-torus and its recurrence certificates.

R adds binomial-weighted lower coordinates plus the rotation parameter to each
coordinate, so the n-th iterate evaluates degree-i polynomials in n; the last
coordinate of R^(jn) carries (jn)^k * alpha, which is what the certificates
probe.  Everything here is exact fixed-point arithmetic: closed-form orbits
and iterated stepping produce identical mantissas, and the identity linking
orbit coordinates to m * n^k * alpha has residual exactly zero.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .fixedpoint import (
    AlphaSpec,
    Precision,
    UnitValue,
    dist_to_integer,
    frac_npow,
    realize,
)
from .lemma import LemmaSolution, solve_canonical
from .sequences import SetStream


@dataclass(frozen=True, slots=True)
class TorusPoint:
    coords: tuple[UnitValue, ...]

    @property
    def k(self) -> int:
        return len(self.coords)

    @property
    def bits(self) -> int:
        return self.coords[0].bits

    @classmethod
    def zero(cls, k: int, bits: int) -> "TorusPoint":
        return cls(tuple(UnitValue(0, 0, bits) for _ in range(k)))

    @classmethod
    def from_fractions(cls, values, bits: int) -> "TorusPoint":
        return cls(tuple(UnitValue.exact(Fraction(v), bits) for v in values))


@dataclass(frozen=True)
class SkewSystem:
    k: int
    alpha: UnitValue
    binom: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if not self.binom:
            table = tuple(
                tuple(math.comb(i, j) for j in range(i + 1)) for i in range(self.k + 1)
            )
            object.__setattr__(self, "binom", table)


@dataclass(frozen=True, slots=True)
class EpsilonBall:
    """Box around 0 in the max metric; per-coordinate radius epsilon / (2M)."""

    epsilon: Fraction
    M: int

    def __post_init__(self):
        if not 0 < self.epsilon < Fraction(1, 4):
            raise ValueError("need 0 < epsilon < 1/4")
        if self.M < 1:
            raise ValueError("M must be positive")

    @property
    def radius(self) -> Fraction:
        return self.epsilon / (2 * self.M)

    def radius_units(self, bits: int) -> int:
        r = self.radius
        return (r.numerator << bits) // r.denominator


def step(sys: SkewSystem, p: TorusPoint) -> TorusPoint:
    """One application of R."""
    if p.k != sys.k:
        raise ValueError("point dimension does not match system")
    out = []
    for i in range(1, sys.k + 1):
        acc = p.coords[i - 1]
        for j in range(1, i):
            acc = acc.add(p.coords[i - j - 1].mul_int(sys.binom[i][j]))
        acc = acc.add(sys.alpha)
        out.append(acc)
    return TorusPoint(tuple(out))


def orbit_point(sys: SkewSystem, p: TorusPoint, n: int) -> TorusPoint:
    """R^n(p) in closed form: coordinate i picks up sum C(i,s) n^s t_{i-s} + n^i alpha."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if p.k != sys.k:
        raise ValueError("point dimension does not match system")
    if n == 0:
        return p
    out = []
    for i in range(1, sys.k + 1):
        acc = p.coords[i - 1]
        for s in range(1, i):
            acc = acc.add(p.coords[i - 1 - s].mul_int(sys.binom[i][s] * n**s))
        acc = acc.add(frac_npow(n, i, sys.alpha))
        out.append(acc)
    return TorusPoint(tuple(out))


def orbit_last_coord(sys: SkewSystem, p: TorusPoint, j: int, n: int) -> UnitValue:
    """c_{j,n}: the last coordinate of R^(jn)(p), evaluated in closed form."""
    if j < 0 or n < 0:
        raise ValueError("j and n must be >= 0")
    total = j * n
    k = sys.k
    if total == 0:
        return p.coords[k - 1]
    acc = p.coords[k - 1]
    for s in range(1, k):
        acc = acc.add(p.coords[k - 1 - s].mul_int(sys.binom[k][s] * total**s))
    return acc.add(frac_npow(total, k, sys.alpha))


def verify_orbit_identity(
    sys: SkewSystem, sol: LemmaSolution, p: TorusPoint, n: int
) -> UnitValue:
    """Residual of sum_j l_j c_{j,n} = m n^k alpha + (sum l_j) t_k, mod 1.

    Both sides reduce to the same integer mod 2^B, so the returned mantissa is
    exactly zero whenever the inputs are well formed; the error radius bounds
    how far the stored coordinates may sit from the ideal real orbit.
    """
    if sol.k != sys.k:
        raise ValueError("solution order does not match system dimension")
    bits = sys.alpha.bits
    lhs = UnitValue(0, 0, bits)
    for j in range(1, sys.k + 1):
        lhs = lhs.add(orbit_last_coord(sys, p, j, n).mul_int(sol.l[j - 1]))
    l_sum = sum(sol.l)
    rhs = p.coords[-1].mul_int(l_sum)
    if n > 0:
        rhs = rhs.add(frac_npow(n, sys.k, sys.alpha).mul_int(sol.m))
    return lhs.circle_sub(rhs)


@dataclass
class CertificateReport:
    """Outcome of the empty-intersection certificate over a set of times.

    A certified n guarantees that the epsilon-ball around 0 misses all of
    R^(-n), ..., R^(-kn) of itself for the skew system with rotation parameter
    system_alpha = alpha / m: ball returns would force the distance of
    n^k * m * system_alpha = n^k * alpha to an integer below epsilon.
    """

    k: int
    epsilon: Fraction
    n_checked: int
    certified: int
    failures: list[int]
    uncertain: list[int]
    m: int
    system_alpha: AlphaSpec

    @property
    def all_certified(self) -> bool:
        return not self.failures and not self.uncertain


def nonrecurrence_certificate(
    k: int,
    alpha: AlphaSpec,
    s: SetStream,
    epsilon: Fraction,
    n_limit: int,
    bits: int | None = None,
) -> CertificateReport:
    """Check dist(n^k * alpha) > epsilon for every stream member up to n_limit."""
    epsilon = Fraction(epsilon)
    if not 0 < epsilon < Fraction(1, 4):
        raise ValueError("need 0 < epsilon < 1/4")
    sol = solve_canonical(k)
    prec = Precision.for_run(k, max(n_limit, 2), bits)
    a = realize(alpha, prec)
    shift = epsilon.numerator << prec.bits
    failures: list[int] = []
    uncertain: list[int] = []
    checked = 0
    for n in s.elements:
        n = int(n)
        if n > n_limit:
            break
        checked += 1
        d = dist_to_integer(frac_npow(n, k, a))
        if (d.mantissa - d.err) * epsilon.denominator > shift:
            continue
        if (d.mantissa + d.err) * epsilon.denominator <= shift:
            failures.append(n)
        else:
            uncertain.append(n)
    return CertificateReport(
        k=k,
        epsilon=epsilon,
        n_checked=checked,
        certified=checked - len(failures) - len(uncertain),
        failures=failures,
        uncertain=uncertain,
        m=sol.m,
        system_alpha=alpha.scaled(sol.m),
    )


def _radical_inverse(i: int, base: int) -> Fraction:
    num, den = 0, 1
    while i:
        num = num * base + i % base
        den *= base
        i //= base
    return Fraction(num, den)


_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71)


def _seed_shift(seed: int, dim: int) -> Fraction:
    if seed == 0:
        return Fraction(0)
    h = (seed * 0x9E3779B97F4A7C15 + (dim + 1) * 0xBF58476D1CE4E5B9) % (1 << 64)
    return Fraction(h, 1 << 64)


@lru_cache(maxsize=1 << 17)
def _sample_units(r_units: int, bits: int, k: int, index: int, seed: int) -> tuple[int, ...]:
    out = []
    for dim in range(k):
        x = (Fraction(1, 2) + _seed_shift(seed, dim) + _radical_inverse(index, _PRIMES[dim])) % 1
        u = 2 * x - 1
        scaled = u * r_units
        out.append((scaled.numerator // scaled.denominator) % (1 << bits))
    return tuple(out)


def ball_sample(ball: EpsilonBall, k: int, bits: int, index: int, seed: int = 0) -> TorusPoint:
    """Deterministic low-discrepancy point of the ball, addressable by index.

    A shifted radical-inverse sequence: index 0 with seed 0 is the exact
    center, and every sample is an exact dyadic point (err = 0), so ball
    membership of its orbit is decidable, not approximate.
    """
    units = _sample_units(ball.radius_units(bits), bits, k, index, seed)
    return TorusPoint(tuple(UnitValue(m, 0, bits) for m in units))


@dataclass(frozen=True, slots=True)
class ReturnCheck:
    samples: int
    returning: int
    uncertain: int


def _return_count(sys, ball, n, index_range, seed):
    bits = sys.alpha.bits
    mod = 1 << bits
    r_units = ball.radius_units(bits)
    k = sys.k
    # per (j, i): integer multipliers for lower coordinates, the alpha term,
    # and its error radius; sample coordinates are exact so only alpha errs
    plans = []
    for j in range(1, k + 1):
        total = j * n
        per_coord = []
        for i in range(1, k + 1):
            mults = [sys.binom[i][s] * total**s for s in range(1, i)]
            av = frac_npow(total, i, sys.alpha)
            per_coord.append((mults, av.mantissa, av.err))
        plans.append(per_coord)
    returning = uncertain = 0
    for idx in index_range:
        t = _sample_units(r_units, bits, k, idx, seed)
        verdict = 1  # 1 in, 0 out, 2 uncertain
        for per_coord in plans:
            for i in range(1, k + 1):
                mults, a_m, a_err = per_coord[i - 1]
                q = t[i - 1] + a_m
                for s, c in enumerate(mults, start=1):
                    q += c * t[i - 1 - s]
                q %= mod
                dist = min(q, mod - q)
                if dist + a_err <= r_units:
                    continue
                verdict = 0 if dist > r_units + a_err else 2
                break
            if verdict != 1:
                break
        if verdict == 1:
            returning += 1
        elif verdict == 2:
            uncertain += 1
    return returning, uncertain


def _return_task(args):
    return _return_count(*args)


def monte_carlo_return_check(
    sys: SkewSystem,
    ball: EpsilonBall,
    n: int,
    samples: int,
    seed: int = 0,
    workers: int = 1,
) -> ReturnCheck:
    """Count sampled ball points whose R^(jn) images stay in the ball for all j <= k.

    Sampling is per-index deterministic, so the count is independent of how
    the index range is partitioned across workers.
    """
    if samples < 0:
        raise ValueError("samples must be >= 0")
    if n < 1:
        raise ValueError("n must be positive")
    if samples == 0:
        return ReturnCheck(0, 0, 0)
    if workers <= 1 or samples < 2048:
        ret, unc = _return_count(sys, ball, n, range(samples), seed)
        return ReturnCheck(samples, ret, unc)
    width = -(-samples // workers)
    tasks = [
        (sys, ball, n, range(lo, min(lo + width, samples)), seed)
        for lo in range(0, samples, width)
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_return_task, tasks))
    return ReturnCheck(samples, sum(p[0] for p in parts), sum(p[1] for p in parts))
