"""Integer solutions of the power-sum system behind the orbit identity.

The system asks for integers l_1..l_k and a nonzero m with

    sum_j j^i * l_j = 0   for i = 1..k-1
    sum_j j^k * l_j = m.

Two independent solvers are kept: a closed form from finite differences, and
exact rational elimination.  They must agree up to a positive integer factor;
the cross-check is part of the module contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

MAX_ORDER = 20  # 20! still fits comfortably in wide integers


@dataclass(frozen=True, slots=True)
class LemmaSolution:
    k: int
    l: tuple[int, ...]
    m: int
    M: int

    def __post_init__(self):
        if self.m == 0:
            raise ValueError("m must be nonzero")
        verify_solution(self.k, self.l, self.m)
        if self.M != sum(abs(x) for x in self.l):
            raise ValueError("M must be sum of |l_j|")


def verify_solution(k: int, l: tuple[int, ...], m: int) -> None:
    """Exact integer check of all k equations; raises on any violation."""
    if len(l) != k:
        raise ValueError(f"need {k} coefficients, got {len(l)}")
    for i in range(1, k):
        s = sum(j**i * l[j - 1] for j in range(1, k + 1))
        if s != 0:
            raise ValueError(f"power-sum equation i={i} violated: {s} != 0")
    s = sum(j**k * l[j - 1] for j in range(1, k + 1))
    if s != m:
        raise ValueError(f"top equation violated: {s} != {m}")


def _check_order(k: int) -> None:
    if not 1 <= k <= MAX_ORDER:
        raise ValueError(f"k must be in 1..{MAX_ORDER} (factorial overflow policy)")


def solve_canonical(k: int) -> LemmaSolution:
    """Closed-form solution l_j = (-1)^(k-j) * C(k,j), m = k!.

    These are the k-th finite-difference weights: applied to the monomials
    j^i they annihilate every degree below k and produce k! at degree k.
    """
    _check_order(k)
    l = tuple((-1) ** (k - j) * math.comb(k, j) for j in range(1, k + 1))
    m = math.factorial(k)
    return LemmaSolution(k, l, m, sum(abs(x) for x in l))


def solve_by_elimination(k: int) -> LemmaSolution:
    """Exact Gaussian elimination on the k x k power-sum matrix.

    Solves with right-hand side (0,...,0,1) over the rationals (the matrix is
    a scaled Vandermonde matrix in the distinct nodes 1..k, hence nonsingular),
    then clears denominators; the resulting m is the least positive one among
    integer multiples of the rational solution.
    """
    _check_order(k)
    rows = [[Fraction(j**i) for j in range(1, k + 1)] for i in range(1, k + 1)]
    rhs = [Fraction(0)] * (k - 1) + [Fraction(1)]
    aug = [row + [b] for row, b in zip(rows, rhs)]

    for col in range(k):
        pivot = next(r for r in range(col, k) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        for r in range(col + 1, k):
            if aug[r][col] == 0:
                continue
            f = aug[r][col] / aug[col][col]
            for c in range(col, k + 1):
                aug[r][c] -= f * aug[col][c]

    x = [Fraction(0)] * k
    for i in range(k - 1, -1, -1):
        acc = aug[i][k]
        for j in range(i + 1, k):
            acc -= aug[i][j] * x[j]
        x[i] = acc / aug[i][i]

    scale = math.lcm(*(xi.denominator for xi in x))
    l = tuple(int(xi * scale) for xi in x)
    return LemmaSolution(k, l, scale, sum(abs(v) for v in l))
