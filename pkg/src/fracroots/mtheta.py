"""M_theta(n), M'_theta(n), the typical value, and certified membership in the atypical set.

With t = log(theta)/n the two functions are linked by

    1/(theta^(1/n) - 1) = n/log(theta) - 1/2 + f(t),   f(t) = 1/(e^t - 1) - 1/t + 1/2,

and n is atypical exactly when ``1/2 - f(t) <= {n/log theta} < 1/2``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .contfrac import CFValue, format_cf
from .errors import DomainError, InputError, InternalDisagreement, UndecidedError
from .realnum import (
    DEFAULT_POLICY,
    Affine,
    Ball,
    BallFunction,
    Decided,
    ExactInteger,
    LogOfRational,
    QuadIrr,
    RecipLogTheta,
    RefinePolicy,
    Undecided,
    as_real,
    ball_compare,
    compare,
    exact_ball,
    expm1_ball,
    exp_ball,
    floor_certified,
    floor_exact,
    floor_value,
    frac_ball,
    log2_ball,
    quadratic,
)
from .realnum.ball import _series_guard

HALF = Ball(1, 1, -1)

# ---------------------------------------------------------------------------
# theta


class _ThetaBase:
    """Shared behaviour; subclasses define ``log_exact`` and ``_log_ball``."""

    def log_ball(self, prec: int) -> Ball:
        ex = self.log_exact()
        if ex is not None:
            return exact_ball(ex, prec)
        return self._log_ball(prec)

    @property
    def log_is_rational(self) -> bool:
        return isinstance(self.log_exact(), Fraction)

    def recip_log(self, multiplier=1) -> RecipLogTheta:
        return RecipLogTheta(self, Fraction(multiplier))

    def root_exact(self, n: int):
        """theta^(1/n) in closed form when it is rational or quadratic, else None."""
        return None

    def log_below(self, bound) -> bool:
        """Certified ``log(theta) < bound`` for a rational bound."""
        return compare(_LogValue(self), bound, "<")

    def __str__(self) -> str:
        return self.canonical()


@dataclass(frozen=True)
class _LogValue:
    theta: object

    def exact(self):
        return self.theta.log_exact()

    def ball(self, prec: int) -> Ball:
        return self.theta.log_ball(prec)

    def canonical(self) -> str:
        return f"log({self.theta.canonical()})"


@dataclass(frozen=True)
class RationalTheta(_ThetaBase):
    """theta = u/v > 1; log theta is irrational (Lindemann)."""

    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        if self.value <= 1:
            raise InputError(f"theta must exceed 1, got {self.value}")

    def log_exact(self):
        return None

    def _log_ball(self, prec: int) -> Ball:
        return LogOfRational(self.value).ball(prec)

    def root_exact(self, n: int):
        u, v = self.value.numerator, self.value.denominator
        if n == 1:
            return self.value
        if n == 2:
            return quadratic(0, 1, u * v, v)
        ru, rv = _iroot(u, n), _iroot(v, n)
        if ru is not None and rv is not None:
            return Fraction(ru, rv)
        return None

    def canonical(self) -> str:
        return f"rational:{self.value.numerator}/{self.value.denominator}"


@dataclass(frozen=True)
class ExpRational(_ThetaBase):
    """theta = e^(p/q) with p/q > 0; log theta is rational."""

    exponent: Fraction

    def __post_init__(self):
        object.__setattr__(self, "exponent", Fraction(self.exponent))
        if self.exponent <= 0:
            raise InputError("exp-rational needs a positive exponent")

    def log_exact(self):
        return self.exponent

    def canonical(self) -> str:
        return f"exp-rational:{self.exponent.numerator}/{self.exponent.denominator}"


@dataclass(frozen=True)
class ExpQuadratic(_ThetaBase):
    """theta = e^w with w = (a + b sqrt d)/c an irrational positive quadratic."""

    exponent: QuadIrr

    def __post_init__(self):
        if not isinstance(self.exponent, QuadIrr):
            raise InputError("exp-quadratic needs an irrational exponent; use exp-rational")
        if self.exponent.sign() <= 0:
            raise InputError("exp-quadratic needs a positive exponent")

    def log_exact(self):
        return self.exponent

    def canonical(self) -> str:
        return f"exp-quadratic:{self.exponent}"


@dataclass(frozen=True)
class FromCF(_ThetaBase):
    """theta = e^(2/l) where l is given by its partial quotients."""

    ell: CFValue

    def __post_init__(self):
        if self.ell.term(0) < 0:
            raise InputError("from-cf needs a0 >= 0 so that theta > 1")
        if self.ell.term(0) == 0 and self.ell.term(1) < 1:
            raise InputError("from-cf needs l > 0")

    def log_exact(self):
        ex = self.ell.exact()
        if ex is None:
            return None
        return 2 / ex

    def _log_ball(self, prec: int) -> Ball:
        return self.ell.ball(prec + 4).recip(prec + 2).scale2(1)

    def canonical(self) -> str:
        return f"from-cf:{self.ell.canonical()}"


ThetaSpec = RationalTheta | ExpRational | ExpQuadratic | FromCF


def _iroot(x: int, n: int) -> int | None:
    if x < 0:
        return None
    if x < 2 or n >= x.bit_length():
        return x if x < 2 else None
    r = round(x ** (1.0 / n)) if x.bit_length() < 1000 else None
    if r is None:
        lo, hi = 0, 1 << (x.bit_length() // n + 1)
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if mid**n <= x:
                lo = mid
            else:
                hi = mid - 1
        r = lo
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**n == x:
            return cand
    return None


# -- grammar --------------------------------------------------------------

_QUAD_RE = re.compile(
    r"^\(\s*([+-]?\d+)\s*([+-])\s*(\d+)\s*\*\s*sqrt\(\s*(\d+)\s*\)\s*\)\s*(?:/\s*([+-]?\d+))?$"
)


def parse_quadratic(text: str):
    """``(a+b*sqrt(d))/c`` to a QuadIrr (or Fraction when rational)."""
    m = _QUAD_RE.match(text.strip())
    if not m:
        raise InputError(f"bad quadratic literal {text!r}; expected (a+b*sqrt(d))/c")
    a = int(m.group(1))
    b = int(m.group(3)) * (-1 if m.group(2) == "-" else 1)
    d = int(m.group(4))
    c = int(m.group(5) or 1)
    if c == 0:
        raise InputError("zero denominator in quadratic literal")
    return quadratic(a, b, d, c)


def parse_cf(text: str) -> tuple[list[int], list[int] | None]:
    """``[a0;a1,a2,period(p1,p2)]`` to (preperiod, period)."""
    t = text.strip().replace(" ", "")
    if not (t.startswith("[") and t.endswith("]")):
        raise InputError(f"bad continued fraction {text!r}")
    body = t[1:-1]
    period = None
    m = re.search(r"period\(([^)]*)\)$", body)
    if m:
        if not m.group(1):
            raise InputError("empty period")
        period = [int(x) for x in m.group(1).split(",")]
        body = body[: m.start()].rstrip(",")
    head, _, rest = body.partition(";")
    try:
        pre = ([int(head)] if head else []) + [int(x) for x in rest.split(",") if x]
    except ValueError as exc:
        raise InputError(f"bad continued fraction {text!r}") from exc
    if not pre and period is None:
        raise InputError("empty continued fraction")
    return pre, period


def parse_theta(text: str) -> ThetaSpec:
    kind, sep, arg = text.strip().partition(":")
    if not sep:
        raise InputError(f"bad theta {text!r}; expected kind:value")
    try:
        if kind == "rational":
            return RationalTheta(Fraction(arg))
        if kind == "exp-rational":
            return ExpRational(Fraction(arg))
        if kind == "exp-quadratic":
            w = parse_quadratic(arg)
            if isinstance(w, Fraction):
                return ExpRational(w)
            return ExpQuadratic(w)
        if kind == "from-cf":
            pre, period = parse_cf(arg)
            if period is None:
                raise InputError("from-cf needs a period(...) marker: l must be irrational")
            return FromCF(CFValue(tuple(pre), tuple(period)))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad theta {text!r}: {exc}") from exc
    raise InputError(f"unknown theta kind {kind!r}")


# ---------------------------------------------------------------------------
# f(t)


def _f_point(man: int, exp: int, prec: int) -> Ball:
    """Enclosure of f at the exact dyadic t = man * 2**exp > 0."""
    t = Ball(man, man, exp)
    w = prec + _series_guard(prec)
    if t.lt(1):
        # f = (t^3/4 - R (1 - t/2)) / (t (t + t^2/2 + R)),  R = sum_{k>=3} t^k/k!
        # avoids the cancellation of 1/(e^t - 1) against 1/t
        t2 = t.sqr()
        t3 = t2 * t
        term = t3.div(6, w)
        R = term
        k = 3
        while True:
            k += 1
            term = (term * t).div(k, w)
            R = (R + term).round(w)
            if term.mag_bits() < R.mag_bits() - w - 2:
                break
        # tail after term_k is at most term_k * t/(k+1) / (1 - t/(k+1)) <= term_k
        tail = term.abs()
        R = R + Ball(-tail.hi_man, tail.hi_man, tail.exp)
        num = t3.scale2(-2) - R * (1 - t.scale2(-1))
        den = t * (t + t2.scale2(-1) + R)
        return num.div(den, w).round(prec + 2)
    e = expm1_ball(t, w)
    return (e.recip(w) - t.recip(w) + HALF).round(prec + 2)


def f_ball(t: Ball, prec: int) -> Ball:
    """Enclosure of f over a positive ball (f is increasing)."""
    if t.lo_man <= 0:
        raise InputError("f(t) needs t > 0")
    lo = _f_point(t.lo_man, t.exp, prec)
    if t.is_exact():
        return lo
    hi = _f_point(t.hi_man, t.exp, prec)
    return Ball._pair(lo.lo_man, lo.exp, hi.hi_man, hi.exp)


def f_eval(t, p: int = 64) -> Ball:
    """Ball containing f(t) = 1/(e^t - 1) - 1/t + 1/2 with width at most ``2**-p``."""
    t = as_real(t)
    tb = t.ball(p + 8)
    if tb.lo_man <= 0:
        if compare(t, 0, "<="):
            raise InputError("f(t) needs t > 0")
    wp = p + 8
    for _ in range(40):
        tb = t.ball(wp)
        if tb.lo_man > 0:
            b = f_ball(tb, wp)
            if b.is_exact() or b.width_bits() <= -p:
                return b
        wp = wp * 2
    raise UndecidedError(f"f(t) could not reach width 2^-{p}", cap_bits=wp)


@dataclass(frozen=True)
class FOfT:
    """f(t) as a real value."""

    t: object

    def exact(self):
        return None

    def ball(self, prec: int) -> Ball:
        t = as_real(self.t).ball(prec + 4)
        return f_ball(t, prec)


# ---------------------------------------------------------------------------
# M'_theta, M_theta, typical value


def _recip_expm1_value(theta, n: int) -> BallFunction:
    """1/(theta^(1/n) - 1) as a ball function, for nonzero n."""
    m = abs(n)
    sign = 1 if n > 0 else -1
    extra = m.bit_length() + 8

    def fn(prec: int) -> Ball:
        w = prec + extra
        t = theta.log_ball(w + 4).div(m, w + 4)
        if sign < 0:
            t = -t
        return expm1_ball(t, w + 4).recip(w)

    return BallFunction(fn, f"1/({theta.canonical()}^(1/{n})-1)")


def m_prime_decision(theta: ThetaSpec, n: int, policy: RefinePolicy = DEFAULT_POLICY):
    """Certified floor decision for 1/(theta^(1/n) - 1)."""
    if n == 0:
        raise InputError("n must be nonzero")
    root = theta.root_exact(abs(n))
    if root is not None:
        value = 1 / (root - 1) if n > 0 else root / (1 - root)
        return floor_certified(as_real(value), policy)
    return floor_certified(_recip_expm1_value(theta, n), policy)


def m_prime(theta: ThetaSpec, n: int, policy: RefinePolicy = DEFAULT_POLICY) -> int:
    """floor(1/(theta^(1/n) - 1)) for nonzero n.

    For n < 0 a ball decision also certifies that the value is not an
    integer, which is what makes ``M'(-n) = -M'(n) - 2`` hold.
    """
    d = m_prime_decision(theta, n, policy)
    if isinstance(d, Undecided):
        raise UndecidedError(
            f"M'({n}) undecided: integrality not certified", cap_bits=policy.cap, ball=d.ball
        )
    return d.value


def exceeds_log2(theta: ThetaSpec, n: int, policy: RefinePolicy = DEFAULT_POLICY) -> bool:
    """Certified ``n > log_2(theta)``, i.e. theta < 2^n."""
    if isinstance(theta, RationalTheta):
        v = theta.value
        if n > v.numerator.bit_length():
            return True
        return v.numerator < v.denominator << n if n >= 0 else v < Fraction(1, 2**-n)
    lv = _LogValue(theta)
    for prec in policy.schedule():
        r = ball_compare(lv.ball(prec), log2_ball(prec) * n, "<")
        if r is not None:
            return r
    raise UndecidedError("comparison of n with log2(theta) undecided", cap_bits=policy.cap)


def m_theta(theta: ThetaSpec, n: int, policy: RefinePolicy = DEFAULT_POLICY) -> int:
    """floor(1/{theta^(1/n)}) for n >= 1.

    Raises :class:`DomainError` when theta^(1/n) is an integer.
    """
    if n < 1:
        raise InputError("M_theta is defined here for n >= 1")
    if exceeds_log2(theta, n, policy):
        return m_prime(theta, n, policy)
    root = theta.root_exact(n)
    if root is not None:
        frac = root - floor_exact(root)
        if frac == 0:
            raise DomainError(f"theta^(1/{n}) = {root} is an integer; 1/{{.}} is undefined")
        return floor_value(as_real(1 / frac), policy)

    def fn(prec: int) -> Ball:
        w = prec + 8
        y = exp_ball(theta.log_ball(w + 8).div(n, w + 8), w + 4)
        fy = frac_ball(y)
        if fy is None or fy.lo_man <= 0:
            # straddles an integer: return a ball whose floor is undecidable
            return Ball(0, 1 << 60, -1)
        return fy.recip(w)

    d = floor_certified(BallFunction(fn, "1/{theta^(1/n)}"), policy)
    if isinstance(d, Undecided):
        raise UndecidedError(f"M_theta({n}) undecided", cap_bits=policy.cap)
    return d.value


def typical_value(theta: ThetaSpec, n: int, policy: RefinePolicy = DEFAULT_POLICY) -> int:
    """floor(n/log(theta) - 1/2), certified; exact when log theta is rational or quadratic."""
    if n == 0:
        raise InputError("n must be nonzero")
    x = Affine(theta.recip_log(abs(n)), 1 if n > 0 else -1, Fraction(-1, 2))
    return floor_value(x, policy)


def plus_value(theta: ThetaSpec, n: int, policy: RefinePolicy = DEFAULT_POLICY) -> int:
    """floor(n/log(theta) + 1/2), the value M' takes on atypical n."""
    x = Affine(theta.recip_log(abs(n)), 1 if n > 0 else -1, Fraction(1, 2))
    return floor_value(x, policy)


# ---------------------------------------------------------------------------
# membership


@dataclass(frozen=True)
class MembershipResult:
    atypical: bool
    n: int
    via: str
    precision_bits: int
    witnesses: dict = field(default_factory=dict, compare=False)

    def __bool__(self) -> bool:
        return self.atypical

    def to_json(self) -> dict:
        return {
            "atypical": self.atypical,
            "n": str(self.n),
            "via": self.via,
            "precision_bits": self.precision_bits,
            "witnesses": {k: v.to_json() for k, v in sorted(self.witnesses.items())},
        }


@lru_cache(maxsize=4096)
def _recip_log_ball(theta, prec: int) -> Ball:
    return theta.recip_log(1).ball(prec)


@lru_cache(maxsize=4096)
def _log_ball_cached(theta, prec: int) -> Ball:
    return theta.log_ball(prec)


def _x_and_t(theta, n: int, wp: int):
    """Exact-or-ball data for x = n/log(theta) and t = log(theta)/n."""
    lg = theta.log_exact()
    if lg is not None:
        x_exact = n / lg
        fr = x_exact - floor_exact(x_exact)
        t_exact = lg / n
        return fr, exact_ball(fr, wp), exact_ball(t_exact, wp)
    nb = n.bit_length()
    xb = _recip_log_ball(theta, wp + nb) * n
    fb = frac_ball(xb)
    tb = _log_ball_cached(theta, wp).div(n, wp)
    return None, fb, tb


def _first_equiv_at(theta, n: int, wp: int):
    """Window test ``1/2 - f(t) <= {x} < 1/2`` at one precision; None when undecided."""
    fr_exact, fb, tb = _x_and_t(theta, n, wp)
    wit = {"frac": fb, "t": tb} if fb is not None else {"t": tb}
    if fb is None:
        return None, wit
    if fr_exact is not None:
        below_half = fr_exact < Fraction(1, 2)
    else:
        below_half = ball_compare(fb, HALF, "<")
        if below_half is None:
            return None, wit
    if not below_half:
        return False, wit
    gap = HALF - fb  # 1/2 - {x} > 0; atypical iff gap <= f(t)
    if tb.lt(1):
        # t/12 - t^3/720 < f(t) < t/12 for 0 < t < 1
        upper = tb.div(12, wp)
        if gap.gt(upper):
            wit["f_upper"] = upper
            return False, wit
        lower = (tb.div(12, wp) - (tb * tb.sqr()).div(720, wp)).round(wp + 4)
        if gap.le(lower):
            wit["f_lower"] = lower
            return True, wit
    fv = f_ball(tb, wp)
    wit["f"] = fv
    r = ball_compare(gap, fv, "<=")
    return r, wit


def _second_equiv_at(theta, n: int, wp: int):
    """``{2x} >= 1 - 2f(t)`` and ``{x} < 1 - f(t)`` at one precision."""
    lg = theta.log_exact()
    if lg is not None:
        x = n / lg
        fr1 = exact_ball(x - floor_exact(x), wp)
        fr2 = exact_ball(2 * x - floor_exact(2 * x), wp)
        tb = exact_ball(lg / n, wp)
    else:
        nb = n.bit_length() + 1
        xb = _recip_log_ball(theta, wp + nb) * n
        fr1 = frac_ball(xb)
        fr2 = frac_ball(xb * 2)
        tb = _log_ball_cached(theta, wp).div(n, wp)
        if fr1 is None or fr2 is None:
            return None, {}
    fv = f_ball(tb, wp)
    one = Ball(1, 1, 0)
    c1 = ball_compare(fr2, one - fv.scale2(1), ">=")
    c2 = ball_compare(fr1, one - fv, "<")
    wit = {"frac2": fr2, "frac": fr1, "f": fv}
    if c1 is False or c2 is False:
        return False, wit
    if c1 is None or c2 is None:
        return None, wit
    return True, wit


def _decide(route, theta, n, policy):
    for wp in policy.schedule():
        r, wit = route(theta, n, wp)
        if r is not None:
            return r, wp, wit
    raise UndecidedError(
        f"membership of n={n} undecided at {policy.cap} bits", cap_bits=policy.cap, n=n
    )


def is_atypical(
    theta: ThetaSpec, n: int, *, paranoid: bool = False, policy: RefinePolicy = DEFAULT_POLICY
) -> MembershipResult:
    """Decide ``M'_theta(n) != floor(n/log(theta) - 1/2)``.

    ``paranoid`` recomputes the answer through the two-condition test on
    ``{2n/log theta}`` and by comparing M' with the typical value directly,
    and raises :class:`InternalDisagreement` unless all three agree.
    """
    if n < 1:
        raise InputError("membership is defined for n >= 1")
    root = theta.root_exact(n)
    if root is not None:
        # 1/(root - 1) may be an integer, which puts n on the window boundary;
        # compare the floors exactly instead
        r = floor_exact(1 / (root - 1)) != typical_value(theta, n, policy)
        # already the definition, and the ball routes can sit on their boundaries here
        return MembershipResult(r, n, "ExactRoot", 0, {})
    r, wp, wit = _decide(_first_equiv_at, theta, n, policy)
    via = "ExactRational" if theta.log_is_rational else "FirstEquiv"
    if paranoid:
        r2, _, _ = _decide(_second_equiv_at, theta, n, policy)
        direct = m_prime(theta, n, policy) != typical_value(theta, n, policy)
        if not (r == r2 == direct):
            raise InternalDisagreement(
                f"membership routes disagree for n={n}",
                first=r, second=r2, direct=direct, theta=theta.canonical(),
            )
    return MembershipResult(r, n, via, wp, wit)


def is_atypical_second(
    theta: ThetaSpec, n: int, policy: RefinePolicy = DEFAULT_POLICY
) -> MembershipResult:
    """Membership decided only through the two-condition test."""
    r, wp, wit = _decide(_second_equiv_at, theta, n, policy)
    return MembershipResult(r, n, "SecondEquiv", wp, wit)


def frac_half_window(t, a, b) -> bool:
    """``a/2 <= {t} < b/2`` for exact rationals (helper for the halving identity)."""
    t = Fraction(t)
    fr = t - math.floor(t)
    return Fraction(a) / 2 <= fr < Fraction(b) / 2


__all__ = [
    "ExpQuadratic",
    "ExpRational",
    "FOfT",
    "FromCF",
    "MembershipResult",
    "RationalTheta",
    "ThetaSpec",
    "Decided",
    "ExactInteger",
    "exceeds_log2",
    "f_ball",
    "f_eval",
    "format_cf",
    "is_atypical",
    "is_atypical_second",
    "m_prime",
    "m_prime_decision",
    "m_theta",
    "parse_cf",
    "parse_quadratic",
    "parse_theta",
    "plus_value",
    "typical_value",
]
