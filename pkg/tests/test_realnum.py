import math
import random
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracle import REF_BITS, ball_contains
from fracroots.errors import InputError, UndecidedError
from fracroots.mtheta import RationalTheta
from fracroots.realnum import (
    Affine,
    Ball,
    Decided,
    ExactInteger,
    LogOfRational,
    QuadIrr,
    Rational,
    RecipLogTheta,
    RefinePolicy,
    SqrtRational,
    evaluate,
    exp_ball,
    expm1_ball,
    floor_certified,
    frac_compare,
    is_integer_certified,
    log2_ball,
    log_ball,
    quadratic,
    sqrt_ball,
    squarefree_split,
)

fractions = st.fractions(min_value=-1000, max_value=1000, max_denominator=10**6)
positive = st.fractions(min_value=Fraction(1, 10**6), max_value=1000, max_denominator=10**6)


def ref(x):
    with mp.workprec(REF_BITS):
        return mp.mpf(x.numerator) / x.denominator


# ---------------------------------------------------------------------------
# Ball


def test_exact_dyadic_and_non_dyadic():
    assert Ball.exact(Fraction(3, 8)).is_exact()
    assert Ball.exact(Fraction(3, 8)).lo == Fraction(3, 8)
    with pytest.raises(ValueError):
        Ball.exact(Fraction(1, 3))
    b = Ball.exact(Fraction(1, 3), 40)
    assert b.contains(Fraction(1, 3)) and b.width_bits() <= -39


def test_lower_endpoint_above_upper_rejected():
    with pytest.raises(ValueError):
        Ball(2, 1, 0)


@given(fractions, fractions, st.integers(8, 200))
def test_from_bounds_contains_interval(x, y, prec):
    lo, hi = min(x, y), max(x, y)
    b = Ball.from_bounds(lo, hi, prec)
    assert b.lo <= lo and hi <= b.hi


@given(fractions, fractions)
def test_ring_operations_contain_exact_result(x, y):
    bx, by = Ball.from_bounds(x, x, 80), Ball.from_bounds(y, y, 80)
    assert (bx + by).contains(x + y)
    assert (bx - by).contains(x - y)
    assert (bx * by).contains(x * y)
    assert bx.sqr().contains(x * x)
    if y != 0:
        assert bx.div(by, 80).contains(x / y)
        assert by.recip(80).contains(1 / y)


def test_recip_of_ball_straddling_zero_raises():
    with pytest.raises(ZeroDivisionError):
        Ball(-1, 1, 0).recip(10)


def test_comparisons_are_certain():
    a, b = Ball(1, 2, 0), Ball(3, 4, 0)
    assert a.lt(b) and b.gt(a) and not b.lt(a)
    assert not a.lt(Ball(2, 5, 0)) and a.le(Ball(2, 5, 0))
    assert a.overlaps(Ball(2, 5, 0))


def test_strict_floor():
    assert Ball.from_bounds(Fraction(5, 4), Fraction(7, 4), 20).strict_floor() == 1
    assert Ball(1, 1, 0).strict_floor() is None  # exactly on an integer
    assert Ball.from_bounds(Fraction(3, 4), Fraction(5, 4), 20).strict_floor() is None


def test_round_is_outward():
    b = Ball.from_bounds(Fraction(1, 3), Fraction(1, 3), 200)
    r = b.round(10)
    assert r.contains(b)


def test_json_round_trip():
    b = Ball.from_bounds(Fraction(-22, 7), Fraction(355, 113), 100)
    assert Ball.from_json(b.to_json()) == b


# ---------------------------------------------------------------------------
# transcendental kernels


def test_exp_of_zero_is_exact_one():
    b = exp_ball(Ball(0, 0), 50)
    assert b.lo == 1 and b.hi == 1


@pytest.mark.parametrize("x,ref_value", [
    (Fraction(1), lambda: mp.e),
    (Fraction(1, 7), lambda: mp.exp(mp.mpf(1) / 7)),
    (Fraction(-5, 2), lambda: mp.exp(mp.mpf(-5) / 2)),
    (Fraction(40), lambda: mp.exp(40)),
])
def test_exp_ball_contains_reference(x, ref_value):
    b = exp_ball(Ball.exact(x, 200), 100)
    with mp.workprec(REF_BITS):
        assert ball_contains(b, ref_value())


def test_exp_around_sqrt2():
    # e^sqrt(2) = 4.11325037878292751717...
    root = sqrt_ball(Ball(2, 2), 60)
    b = exp_ball(root, 40)
    with mp.workprec(REF_BITS):
        assert ball_contains(b, mp.exp(mp.sqrt(2)))
    assert b.width_bits() < -30


def test_expm1_small_argument_keeps_relative_accuracy():
    t = Ball.exact(Fraction(1, 2**60))
    b = expm1_ball(t, 80)
    with mp.workprec(REF_BITS):
        assert ball_contains(b, mp.expm1(mp.mpf(2) ** -60))
    assert b.width_bits() < -60 - 70


def test_log2_constant():
    # log 2 = 0.6931471805599453094172321...
    b = log2_ball(120)
    with mp.workprec(REF_BITS):
        assert ball_contains(b, mp.log(2))
    assert b.width_bits() <= -118


@given(positive)
@settings(max_examples=60, deadline=None)
def test_log_ball_contains_reference(x):
    b = log_ball(Ball.from_bounds(x, x, 120), 90)
    with mp.workprec(REF_BITS):
        assert ball_contains(b, mp.log(ref(x)))


@given(positive)
@settings(max_examples=60, deadline=None)
def test_exp_of_log_contains_x(x):
    b = exp_ball(log_ball(Ball.from_bounds(x, x, 120), 100), 90)
    assert b.contains(x)


def test_sqrt_ball_contains_and_narrows():
    b = sqrt_ball(Ball(2, 2), 30)
    with mp.workprec(REF_BITS):
        assert ball_contains(b, mp.sqrt(2))
    assert b.width_bits() <= -28


# ---------------------------------------------------------------------------
# value specs and evaluate


def test_evaluate_log2_at_20_bits():
    b = evaluate(LogOfRational(2), 20)
    with mp.workprec(REF_BITS):
        assert ball_contains(b, mp.log(2))
    assert b.width_bits() <= -20


def test_evaluate_rational_is_exact():
    b = evaluate(Rational(Fraction(3, 2)), 10)
    assert b.is_exact() and b.lo == Fraction(3, 2)


def test_evaluate_sqrt2_at_30_bits():
    b = evaluate(SqrtRational(2), 30)
    assert b.width_bits() <= -30
    with mp.workprec(REF_BITS):
        assert ball_contains(b, mp.sqrt(2))


def test_evaluate_rejects_tiny_precision_and_bad_specs():
    with pytest.raises(InputError):
        evaluate(Rational(1), 1)
    with pytest.raises(InputError):
        LogOfRational(1)
    with pytest.raises(InputError):
        SqrtRational(-2)


@given(positive.filter(lambda x: x > 1), st.integers(2, 300))
@settings(max_examples=50, deadline=None)
def test_width_contract_and_inclusion(theta, p):
    b = evaluate(LogOfRational(theta), p)
    assert b.width_bits() <= -p
    with mp.workprec(REF_BITS):
        assert ball_contains(b, mp.log(ref(theta)))


@pytest.mark.parametrize("spec", [
    LogOfRational(Fraction(7, 3)),
    SqrtRational(Fraction(5, 7)),
    RecipLogTheta(RationalTheta(Fraction(9, 4)), 2),
])
@pytest.mark.parametrize("k", [0, 5, 64, 300])
def test_monotone_refinement(spec, k):
    p = 40
    assert evaluate(spec, p + k).subset_of(evaluate(spec, p)) or spec.exact() is not None


# ---------------------------------------------------------------------------
# floors and fractional parts


def test_floor_of_exact_integer():
    d = floor_certified(Rational(1))
    assert isinstance(d, ExactInteger) and d.value == 1 and d.integral


def test_floor_of_recip_log2_minus_half():
    # 1/log 2 - 1/2 = 0.94269504...
    d = floor_certified(Affine(RecipLogTheta(RationalTheta(2)), 1, Fraction(-1, 2)))
    assert isinstance(d, Decided) and d.value == 0


def test_floor_of_recip_sqrt2_minus_one_via_quadratic_path():
    # 1/(sqrt 2 - 1) = 1 + sqrt 2
    x = 1 / (quadratic(0, 1, 2) - 1)
    assert x == quadratic(1, 1, 2)
    d = floor_certified(x)
    assert isinstance(d, ExactInteger) and d.value == 2 and not d.integral


def test_floor_certified_matches_exact_rational_floor():
    rng = random.Random(11)
    for _ in range(10**4):
        x = Fraction(rng.randint(-10**9, 10**9), rng.randint(1, 10**6))
        d = floor_certified(Rational(x))
        assert d.value == math.floor(x)
        assert d.integral == (x.denominator == 1)


def test_is_integer_certified():
    assert is_integer_certified(Rational(4))
    assert not is_integer_certified(quadratic(0, 1, 2))
    assert not is_integer_certified(RecipLogTheta(RationalTheta(2)))


def test_frac_compare_recip_log2_below_half():
    # {1/log 2} = 0.4426950... < 1/2
    assert frac_compare(RecipLogTheta(RationalTheta(2)), Fraction(1, 2), "<")


def test_frac_compare_exact_rational_path():
    assert frac_compare(Rational(Fraction(7, 2)), Fraction(1, 2), ">=")
    assert not frac_compare(Rational(Fraction(7, 2)), Fraction(1, 2), "<")


def test_tight_policy_reports_undecided():
    tight = RefinePolicy(start=8, growth=2, cap=8)
    # {2 B/log 2} is 1/2 - 1.6e-17 at B = 777451915729368; 8 bits cannot separate it
    x = RecipLogTheta(RationalTheta(2), 2 * 777451915729368)
    with pytest.raises(UndecidedError):
        frac_compare(x, Fraction(1, 2), "<", tight)


def test_refine_policy_schedule():
    assert list(RefinePolicy(64, 2, 300).schedule()) == [64, 128, 256, 300]
    with pytest.raises(InputError):
        RefinePolicy(64, 1, 300)
    assert list(RefinePolicy.fixed(100).schedule()) == [100]


# ---------------------------------------------------------------------------
# quadratic irrationals


def test_squarefree_split():
    assert squarefree_split(72) == (6, 2)
    assert squarefree_split(1) == (1, 1)


def test_quadratic_canonical_form():
    q = quadratic(2, 2, 8, 4)  # (2 + 2 sqrt 8)/4 = (1 + 2 sqrt 2)/2
    assert isinstance(q, QuadIrr) and (q.a, q.b, q.c, q.d) == (1, 2, 2, 2)
    assert quadratic(1, 3, 9, 2) == Fraction(5, 1)
    assert str(quadratic(74, -9, 19, 12)) == "(74-9*sqrt(19))/12"


@given(
    st.integers(-50, 50), st.integers(-50, 50).filter(bool), st.integers(2, 60), st.integers(1, 30),
    st.integers(-50, 50), st.integers(-50, 50).filter(bool), st.integers(1, 30),
)
@settings(max_examples=200)
def test_field_arithmetic_matches_reference(a, b, d, c, a2, b2, c2):
    x = quadratic(a, b, d, c)
    y = quadratic(a2, b2, d, c2)
    with mp.workprec(300):
        rx = (a + b * mp.sqrt(d)) / c
        ry = (a2 + b2 * mp.sqrt(d)) / c2
        for got, want in [(x + y, rx + ry), (x - y, rx - ry), (x * y, rx * ry)]:
            assert abs(mp.mpf(float(got)) - want) <= 1e-9 * (1 + abs(want))
        if ry != 0 and y != 0:
            q = x / y
            assert abs(mp.mpf(float(q)) - rx / ry) <= 1e-9 * (1 + abs(rx / ry))
    if isinstance(x, QuadIrr):
        assert x.floor() == math.floor(rx)
        assert (x < y) == (rx < ry)


def test_non_minimal_radicand_compares_and_combines_by_value():
    # (2 + sqrt 8)/2 is 1 + sqrt 2 written with a square left in the radicand
    loose = QuadIrr(2, 1, 2, 8)
    tight = quadratic(1, 1, 2)
    assert loose == tight and hash(loose) == hash(tight)
    assert loose - tight == 0
    assert loose * quadratic(-1, 1, 2) == 1
    with pytest.raises(ValueError):
        loose + quadratic(0, 1, 3)


def test_squarefree_split_absorbs_large_square_cofactor():
    p = 1_000_003  # prime above the trial-division limit
    assert squarefree_split(7 * p * p) == (p, 7)
    assert squarefree_split(p * p) == (p, 1)
