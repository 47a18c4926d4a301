import math
from fractions import Fraction

import pytest

from fracroots.contfrac import CFExpansion, cf_of_real, halve_cf, value_from_cf
from fracroots.errors import InputError, VerificationFailure
from fracroots.families import (
    EMPTY,
    INFINITE,
    build_empty_family,
    build_infinite_family,
    build_root2_case,
    count_statistics,
    parse_family,
    sample_thetas,
    verify_empty,
    verify_infinite,
)
from fracroots.mtheta import ExpQuadratic, RationalTheta
from fracroots.realnum import QuadIrr, RecipLogTheta, quadratic


def test_empty_family_closed_forms():
    fp = build_empty_family(c=1)
    assert fp.variant == EMPTY
    assert fp.closed_form == quadratic(-1, 1, 5)  # theta = e^(sqrt 5 - 1)
    for c in range(1, 21):
        assert build_empty_family(c=c).closed_form == quadratic(-c, 1, c * (c + 4))
        assert value_from_cf([1], [c, 1]) == quadratic(c, 1, c * (c + 4), 2 * c)


def test_empty_family_criterion_boundary():
    # a0 = 2 allows even-indexed quotients up to 4
    assert build_empty_family(a=[2], period=[3, 4]).variant == EMPTY
    with pytest.raises(InputError) as info:
        build_empty_family(a=[2], period=[3, 5])
    assert info.value.details["index"] % 2 == 0
    with pytest.raises(InputError):
        build_empty_family(a=[1], period=[2])  # a_{2k} = 2 > 3*1 - 2


def test_empty_family_needs_positive_c_and_period():
    with pytest.raises(InputError):
        build_empty_family(c=0)
    with pytest.raises(InputError):
        build_empty_family(a=[1, 1])


def test_infinite_family_closed_forms_and_bounds():
    fp = build_infinite_family(c=4)
    assert fp.variant == INFINITE
    assert fp.closed_form == quadratic(0, 2, 5)  # theta = e^(2 sqrt 5)
    for c in range(1, 11):
        fp = build_infinite_family(c=c)
        assert fp.closed_form == quadratic(4 - c, 1, c * (c + 1))
        # l * log(theta) = 2 at 256 bits
        prod = fp.ell.ball(256) * fp.theta.log_ball(256)
        assert prod.contains(2) and prod.width_bits() < -240


def test_infinite_family_invariant():
    with pytest.raises(InputError):
        build_infinite_family(a=[0, 2], period=[5, 3])
    with pytest.raises(InputError):
        build_infinite_family(a=[1, 2], period=[4, 3])


def test_halving_identity_matches_numeric_expansion():
    for c in (1, 4, 9):
        fp = build_infinite_family(c=c)
        pre, per = halve_cf(fp.preperiod, fp.period)
        assert pre[:2] == [0, 4] and per[0] == 2 and per[1] == 2 * c
        numeric = cf_of_real(RecipLogTheta(fp.theta, 1), 40)
        assert numeric.terms(40) == CFExpansion(pre, per).terms(40)


def test_parse_family():
    assert parse_family("empty:c=3").c == 3
    assert parse_family("infinite:a=[0;2,period(4,7)]").period == (4, 7)
    for bad in ("empty", "odd:c=3", "empty:c=x", "empty:b=3"):
        with pytest.raises(InputError):
            parse_family(bad)


@pytest.mark.parametrize("c", [1, 2, 5, 10])
def test_verify_empty_passes(c):
    rep = verify_empty(build_empty_family(c=c), K=25, N=10**4)
    assert rep.passed, rep.failures


def test_verify_root2_case_passes():
    rep = verify_empty(build_root2_case(), K=25, N=10**4)
    assert rep.passed, rep.failures


def test_verify_empty_negative_control_fails_with_certificate():
    rep = verify_empty(build_empty_family(c=1), K=5, N=100, threshold_factor=Fraction(1, 10))
    assert not rep.passed
    assert "certificate" in rep.failures[0]
    with pytest.raises(VerificationFailure):
        rep.raise_for_failure()


@pytest.mark.parametrize("c", [1, 4, 10])
def test_verify_infinite_passes(c):
    rep = verify_infinite(build_infinite_family(c=c), K=20)
    assert rep.passed, rep.failures
    assert "18 certified atypical continuants" in rep.notes


def test_verify_rejects_wrong_variant():
    with pytest.raises(InputError):
        verify_empty(build_infinite_family(c=4))
    with pytest.raises(InputError):
        verify_infinite(build_empty_family(c=4))
    with pytest.raises(InputError):
        verify_infinite(build_infinite_family(c=4), K=2)


def test_count_statistics():
    s = count_statistics(RationalTheta(2), 10**15)
    assert s.count == 2
    assert math.isclose(s.expected, math.log(2) / 12 * math.log(10**15), rel_tol=1e-12)
    assert 1.99 < s.expected < 2.0
    assert count_statistics(build_empty_family(c=1).theta, 10**12).count == 0


def test_samplers_are_seeded_and_in_range():
    a = sample_thetas(10, 99)
    assert [t.canonical() for t in a] == [t.canonical() for t in sample_thetas(10, 99)]
    for t in a:
        assert isinstance(t, ExpQuadratic) and isinstance(t.exponent, QuadIrr)
        assert 0 < float(t.exponent) < 3
    for t in sample_thetas(20, 5, "rational"):
        assert isinstance(t, RationalTheta) and t.log_below(3)
    with pytest.raises(InputError):
        sample_thetas(1, 1, "bogus")
