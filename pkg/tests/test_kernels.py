import random
from fractions import Fraction

import numpy as np
import pytest

from reclab import Precision, PrecisionError, frac_npow, interval_test, realize
from reclab import kernels
from reclab.fixedpoint import Membership, UnitValue

QUARTER = (Fraction(1, 4), Fraction(3, 4))

HAS_COMPILED = kernels._compiled is not None

needs_compiled = pytest.mark.skipif(not HAS_COMPILED, reason="compiled kernels not built")


@pytest.fixture(autouse=True)
def restore_backend():
    yield
    kernels.use_backend("auto")


def _both_backends(fn):
    kernels.use_backend("pure")
    pure = fn()
    kernels.use_backend("compiled")
    compiled = fn()
    kernels.use_backend("auto")
    return pure, compiled


@needs_compiled
@pytest.mark.parametrize("bits", [96, 104, 127, 128, 129, 192, 320, 511])
@pytest.mark.parametrize("k", [1, 2, 5])
def test_classify_backend_equivalence(sqrt2, bits, k):
    a = realize(sqrt2, Precision(bits))
    # stay inside the error budget: err0 * stop^k < 2^(bits - 60)
    stop = min(4001, 1 + int(2 ** ((bits - 62) / k)))
    pure, compiled = _both_backends(
        lambda: kernels.classify_range(a.mantissa, a.err, bits, k, 1, stop, *QUARTER)
    )
    assert len(pure) == stop - 1
    assert np.array_equal(pure, compiled)
    assert set(np.unique(pure)) <= {0, 1, 2}


@needs_compiled
@pytest.mark.parametrize("bits", [96, 128, 167, 256])
def test_phase_backend_equivalence(sqrt2, bits):
    a = realize(sqrt2, Precision(bits))
    pure, compiled = _both_backends(
        lambda: kernels.phase_range(a.mantissa, a.err, bits, 2, 5, 3005)
    )
    assert np.array_equal(pure, compiled)
    ns = np.arange(5, 3005, dtype=np.int64)
    pure_at, compiled_at = _both_backends(
        lambda: kernels.phases_at(a.mantissa, a.err, bits, 2, ns)
    )
    assert np.array_equal(pure_at, compiled_at)
    assert np.array_equal(pure, pure_at)


def test_wide_precision_falls_back_to_pure(sqrt2):
    bits = 600  # beyond the compiled limb budget
    assert kernels.backend_name(bits) == "pure"
    a = realize(sqrt2, Precision(bits))
    cls = kernels.classify_range(a.mantissa, a.err, bits, 2, 1, 101, *QUARTER)
    assert len(cls) == 100


def test_classify_matches_interval_test(sqrt2):
    prec = Precision.for_run(3, 2000)
    a = realize(sqrt2, prec)
    cls = kernels.classify_range(a.mantissa, a.err, prec.bits, 3, 1, 2001, *QUARTER)
    code = {
        Membership.OUTSIDE: kernels.OUTSIDE,
        Membership.INSIDE: kernels.INSIDE,
        Membership.UNCERTAIN: kernels.UNCERTAIN,
    }
    rng = random.Random(5)
    for n in rng.sample(range(1, 2001), 300):
        expect = interval_test(frac_npow(n, 3, a), *QUARTER)
        assert cls[n - 1] == code[expect]


def test_phases_match_unitvalue_truncation(sqrt2):
    prec = Precision.for_run(2, 500)
    a = realize(sqrt2, prec)
    phases = kernels.phase_range(a.mantissa, a.err, prec.bits, 2, 1, 501)
    for n in (1, 2, 97, 500):
        assert phases[n - 1] == frac_npow(n, 2, a).to_float()


@pytest.mark.parametrize("k", [1, 2, 4])
def test_phases_at_scattered_indices(sqrt2, k):
    prec = Precision.for_run(k, 10**6)
    a = realize(sqrt2, prec)
    rng = random.Random(k)
    ns = np.asarray(sorted(rng.sample(range(1, 10**6), 200)), dtype=np.int64)
    phases = kernels.phases_at(a.mantissa, a.err, prec.bits, k, ns)
    for n, ph in zip(ns[::13], phases[::13]):
        assert ph == frac_npow(int(n), k, a).to_float()


def test_uncertain_exactly_on_endpoints():
    # mantissa of 1/4 with err 1: n=1 and n=3 land exactly on the endpoints
    bits = 80
    quarter = 1 << (bits - 2)
    cls = kernels.classify_range(quarter, 1, bits, 1, 1, 5, *QUARTER)
    assert list(cls) == [
        kernels.UNCERTAIN,  # 1/4: error radius straddles the lower endpoint
        kernels.INSIDE,     # 1/2
        kernels.UNCERTAIN,  # 3/4: straddles the upper endpoint
        kernels.OUTSIDE,    # 0
    ]
    for n, expect in enumerate(cls, start=1):
        v = frac_npow(n, 1, UnitValue(quarter, 1, bits))
        code = {
            Membership.OUTSIDE: kernels.OUTSIDE,
            Membership.INSIDE: kernels.INSIDE,
            Membership.UNCERTAIN: kernels.UNCERTAIN,
        }[interval_test(v, *QUARTER)]
        assert code == expect


def test_budget_rejected(sqrt2):
    a = realize(sqrt2, Precision(80))
    with pytest.raises(PrecisionError):
        kernels.classify_range(a.mantissa, a.err, 80, 3, 1, 10**6, *QUARTER)


def test_seam_interval_rejected(sqrt2):
    a = realize(sqrt2, Precision(100))
    with pytest.raises(PrecisionError):
        kernels.classify_range(
            a.mantissa, a.err, 100, 2, 1, 1001, Fraction(0), Fraction(1, 2)
        )


def test_chunk_spans_fixed_layout():
    spans = kernels.chunk_spans(1, 200001)
    assert spans[0][0] == 1 and spans[-1][1] == 200001
    assert all(a < b for a, b in spans)
    assert [b for _, b in spans[:-1]] == [a for a, _ in spans[1:]]
    # cuts split chunks without moving the fixed boundaries
    with_cuts = kernels.chunk_spans(1, 200001, cuts=(7, 70000))
    assert {7, 70000} <= {a for a, _ in with_cuts}
    assert {a for a, _ in spans} <= {a for a, _ in with_cuts}


def test_classify_spans_workers_agree(sqrt2):
    prec = Precision.for_run(2, 3 * 10**5)
    a = realize(sqrt2, prec)
    spans = kernels.chunk_spans(1, 3 * 10**5)
    serial = kernels.classify_spans(a.mantissa, a.err, prec.bits, 2, spans, *QUARTER)
    parallel = kernels.classify_spans(
        a.mantissa, a.err, prec.bits, 2, spans, *QUARTER, workers=2
    )
    assert all(np.array_equal(x, y) for x, y in zip(serial, parallel))


def test_empty_range(sqrt2):
    a = realize(sqrt2, Precision(96))
    assert len(kernels.classify_range(a.mantissa, a.err, 96, 2, 5, 5, *QUARTER)) == 0
    assert len(kernels.phase_range(a.mantissa, a.err, 96, 2, 5, 5)) == 0
