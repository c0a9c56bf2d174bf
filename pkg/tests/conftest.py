"""Shared oracle helpers: high-precision references independent of the library."""

from fractions import Fraction

import mpmath
import pytest

from reclab import AlphaSpec


def mp_value(spec: AlphaSpec, dps: int = 60) -> mpmath.mpf:
    """The surd evaluated with mpmath at the requested decimal precision."""
    with mpmath.workdps(dps):
        return (spec.p + spec.q * mpmath.sqrt(spec.d)) / spec.r


def mp_frac_pow(spec: AlphaSpec, n: int, k: int, dps: int = 60) -> mpmath.mpf:
    """{n^k * alpha} via mpmath; digits lost to the integer part are restored."""
    scale = n**k
    with mpmath.workdps(dps + len(str(scale))):
        return mpmath.frac(scale * (spec.p + spec.q * mpmath.sqrt(spec.d)) / spec.r)


def oracle_members(
    spec: AlphaSpec, k: int, n_range, lo: Fraction, hi: Fraction, dps: int = 60
) -> list[int]:
    """Brute-force membership filter using the mpmath reference."""
    lo_f, hi_f = mpmath.mpf(lo.numerator) / lo.denominator, mpmath.mpf(hi.numerator) / hi.denominator
    out = []
    for n in n_range:
        f = mp_frac_pow(spec, n, k, dps)
        if lo_f <= f <= hi_f:
            out.append(n)
    return out


@pytest.fixture(scope="session")
def sqrt2() -> AlphaSpec:
    return AlphaSpec.parse("surd:0,1,1,2")


@pytest.fixture(scope="session")
def sqrt3() -> AlphaSpec:
    return AlphaSpec.parse("surd:0,1,1,3")


@pytest.fixture(scope="session")
def golden() -> AlphaSpec:
    return AlphaSpec.parse("surd:1,1,2,5")
