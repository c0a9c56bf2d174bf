from fractions import Fraction

import numpy as np
import pytest

from reclab import (
    PrecisionError,
    SetStream,
    density,
    dist_to_integer,
    frac_npow,
    gen_Sk,
    gen_SkPrime,
    power_set,
    realize,
)
from reclab.fixedpoint import Precision
from reclab.sequences import SKPRIME_EVEN, SKPRIME_ODD, block_interval, block_span
from conftest import oracle_members


class TestGenSk:
    def test_small_members(self, sqrt2):
        s = gen_Sk(2, sqrt2, 5)
        assert list(s.elements) == [1, 2, 3, 4, 5]
        assert 1 in s and 6 not in s
        assert s.uncertain_count == 0

    def test_six_not_member(self, sqrt2):
        s = gen_Sk(2, sqrt2, 10)
        assert 6 not in s  # {36 sqrt2} ~ 0.9117 lies outside [1/4, 3/4]

    def test_exhaustive_against_oracle(self, sqrt2):
        n_max = 10**4
        s = gen_Sk(2, sqrt2, n_max)
        expect = oracle_members(
            sqrt2, 2, range(1, n_max + 1), Fraction(1, 4), Fraction(3, 4)
        )
        assert list(s.elements) == expect
        assert s.uncertain_count == 0

    @pytest.mark.parametrize("k", [1, 3, 5])
    def test_exhaustive_higher_orders(self, sqrt2, k):
        n_max = 2000
        s = gen_Sk(k, sqrt2, n_max)
        expect = oracle_members(
            sqrt2, k, range(1, n_max + 1), Fraction(1, 4), Fraction(3, 4)
        )
        assert list(s.elements) == expect

    def test_deterministic_and_worker_invariant(self, sqrt2):
        a = gen_Sk(3, sqrt2, 3 * 10**4)
        b = gen_Sk(3, sqrt2, 3 * 10**4)
        c = gen_Sk(3, sqrt2, 3 * 10**4, workers=2)
        assert np.array_equal(a.elements, b.elements)
        assert np.array_equal(a.elements, c.elements)

    def test_nonrecurrence_seed_invariant(self, sqrt2):
        s = gen_Sk(2, sqrt2, 2000)
        a = realize(sqrt2, Precision(s.bits))
        quarter = Fraction(1, 4)
        for n in s.elements[::97]:
            d = dist_to_integer(frac_npow(int(n), 2, a))
            assert Fraction(d.mantissa + d.err, 1 << s.bits) >= quarter


class TestGenSkPrime:
    def test_jmax_zero_empty(self, sqrt2):
        s = gen_SkPrime(2, sqrt2, 0)
        assert len(s) == 0 and s.blocks == []

    def test_block_spans_share_endpoint_downward(self):
        assert block_span(1) == (2, 5)  # {2, 3, 4}
        assert block_span(2) == (5, 9)  # {5, ..., 8}
        assert block_span(3) == (9, 17)
        assert block_interval(2) == SKPRIME_EVEN
        assert block_interval(3) == SKPRIME_ODD

    def test_block4_matches_bruteforce(self, sqrt2):
        s = gen_SkPrime(2, sqrt2, 6)
        lo, hi = block_span(4)
        expect = oracle_members(sqrt2, 2, range(lo, hi), *SKPRIME_EVEN)
        assert list(s.block_elements(4)) == expect

    def test_all_blocks_match_bruteforce(self, sqrt2):
        j_max = 9
        s = gen_SkPrime(2, sqrt2, j_max)
        assert s.uncertain_count == 0
        for j in range(1, j_max + 1):
            lo, hi = block_span(j)
            expect = oracle_members(sqrt2, 2, range(lo, hi), *block_interval(j))
            assert list(s.block_elements(j)) == expect

    def test_elements_ascending_and_blocks_contiguous(self, sqrt2):
        s = gen_SkPrime(2, sqrt2, 10)
        assert np.all(np.diff(s.elements) > 0)
        offset = 0
        for b in s.blocks:
            assert b.start_index == offset
            offset += b.count
        assert offset == len(s)


class TestPowerSet:
    def test_basic(self, sqrt2):
        base = SetStream("file", 1, None, np.asarray([1, 2, 3], dtype=np.int64))
        assert list(power_set(base, 2).elements) == [1, 4, 9]
        single = SetStream("file", 1, None, np.asarray([2], dtype=np.int64))
        assert list(power_set(single, 3).elements) == [8]

    def test_from_gen(self, sqrt2):
        s = gen_Sk(2, sqrt2, 5)
        assert list(power_set(s, 2).elements) == [1, 4, 9, 16, 25]

    def test_large_powers_stay_exact(self):
        base = SetStream("file", 1, None, np.asarray([10**9], dtype=np.int64))
        p = power_set(base, 4)
        assert p.elements.dtype == object and p.elements[0] == 10**36

    def test_overflow_rejected(self):
        base = SetStream("file", 1, None, np.asarray([10**18], dtype=np.int64))
        with pytest.raises(PrecisionError):
            power_set(base, 100)


class TestDensity:
    def test_small(self, sqrt2):
        s = gen_Sk(2, sqrt2, 5)
        assert s.density(5) == 1

    def test_empty(self):
        s = SetStream("file", 1, None, np.empty(0, dtype=np.int64))
        assert density(s, 100) == 0

    def test_exact_fraction(self, sqrt2):
        s = gen_Sk(2, sqrt2, 1000)
        d = s.density(1000)
        assert d == Fraction(s.count_upto(1000), 1000)


def test_save_load_roundtrip(tmp_path, sqrt2):
    s = gen_SkPrime(2, sqrt2, 7)
    path = tmp_path / "stream.txt"
    s.save(path)
    back = SetStream.load(path)
    assert np.array_equal(back.elements, s.elements)
    assert back.kind == "skprime" and back.k == 2
    assert back.alpha.to_text() == sqrt2.to_text()
    assert [(b.j, b.start_index, b.count) for b in back.blocks] == [
        (b.j, b.start_index, b.count) for b in s.blocks
    ]
