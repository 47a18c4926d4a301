"""Closed intervals with dyadic endpoints.

A :class:`Ball` is the pair ``[lo_man * 2**exp, hi_man * 2**exp]``. Ring
operations (``+``, ``-``, ``*``) are exact; anything that can produce a
non-dyadic value (division, square roots, transcendental functions) takes a
working precision in bits and rounds outward, so the result always contains
the exact value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache


def _floor_div_shift(num: int, den: int, shift: int) -> int:
    """floor(num * 2**shift / den) for den > 0."""
    if shift >= 0:
        return (num << shift) // den
    return num // (den << -shift)


def _ceil_div_shift(num: int, den: int, shift: int) -> int:
    return -_floor_div_shift(-num, den, shift)


def _round_fraction(num: int, den: int, prec: int, up: bool) -> tuple[int, int]:
    """Round num/den (den > 0) to a dyadic with about ``prec`` significant bits.

    Returns ``(man, exp)`` with ``man * 2**exp`` <= num/den (or >= when ``up``).
    """
    if num == 0:
        return 0, 0
    shift = prec - (abs(num).bit_length() - den.bit_length()) + 1
    if up:
        return _ceil_div_shift(num, den, shift), -shift
    return _floor_div_shift(num, den, shift), -shift


def _as_ratio(man: int, exp: int) -> tuple[int, int]:
    if exp >= 0:
        return man << exp, 1
    return man, 1 << -exp


@dataclass(frozen=True, slots=True)
class Ball:
    """Interval ``[lo_man, hi_man] * 2**exp`` with ``lo_man <= hi_man``."""

    lo_man: int
    hi_man: int
    exp: int = 0

    def __post_init__(self):
        if self.lo_man > self.hi_man:
            raise ValueError("Ball lower endpoint exceeds upper endpoint")

    # -- construction -----------------------------------------------------

    @staticmethod
    def _pair(lo_man: int, lo_exp: int, hi_man: int, hi_exp: int) -> "Ball":
        e = min(lo_exp, hi_exp)
        return Ball(lo_man << (lo_exp - e), hi_man << (hi_exp - e), e)

    @classmethod
    def exact(cls, value, prec: int | None = None) -> "Ball":
        """Ball around an int or Fraction; exact when the value is dyadic."""
        if isinstance(value, Ball):
            return value
        if isinstance(value, int):
            return cls(value, value, 0)
        value = Fraction(value)
        num, den = value.numerator, value.denominator
        if den & (den - 1) == 0:
            e = -(den.bit_length() - 1)
            return cls(num, num, e)
        if prec is None:
            raise ValueError(f"{value} is not dyadic; a precision is required")
        return cls.from_bounds(value, value, prec)

    @classmethod
    def from_bounds(cls, lo, hi, prec: int) -> "Ball":
        """Smallest rounded ball containing the rational interval [lo, hi]."""
        lo, hi = Fraction(lo), Fraction(hi)
        lm, le = _round_fraction(lo.numerator, lo.denominator, prec, up=False)
        hm, he = _round_fraction(hi.numerator, hi.denominator, prec, up=True)
        return cls._pair(lm, le, hm, he)

    # -- views --------------------------------------------------------------

    @property
    def lo(self) -> Fraction:
        return Fraction(*_as_ratio(self.lo_man, self.exp))

    @property
    def hi(self) -> Fraction:
        return Fraction(*_as_ratio(self.hi_man, self.exp))

    @property
    def width(self) -> Fraction:
        return Fraction(*_as_ratio(self.hi_man - self.lo_man, self.exp))

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_exact(self) -> bool:
        return self.lo_man == self.hi_man

    def width_bits(self) -> float:
        """log2 of the width (``-inf`` for an exact ball)."""
        w = self.hi_man - self.lo_man
        if w == 0:
            return -math.inf
        return math.log2(w) + self.exp

    def mag_bits(self) -> int:
        """An integer ``m`` with ``max(|lo|, |hi|) < 2**m``."""
        m = max(abs(self.lo_man), abs(self.hi_man))
        return m.bit_length() + self.exp

    def __float__(self) -> float:
        return float(self.mid)

    def __repr__(self) -> str:
        if self.is_exact():
            return f"Ball({float(self.lo)!r})"
        return f"Ball([{float(self.lo):.17g}, {float(self.hi):.17g}], w=2^{self.width_bits():.1f})"

    # -- rounding -------------------------------------------------------------

    def round(self, prec: int) -> "Ball":
        """Trim mantissas to ``prec`` bits relative to the larger endpoint."""
        m = max(abs(self.lo_man), abs(self.hi_man)).bit_length()
        shift = m - prec
        if shift <= 0:
            return self
        return Ball(self.lo_man >> shift, -((-self.hi_man) >> shift), self.exp + shift)

    # -- exact ring operations ----------------------------------------------

    def _align(self, other: "Ball") -> tuple[int, int, int, int, int]:
        if self.exp == other.exp:
            return self.lo_man, self.hi_man, other.lo_man, other.hi_man, self.exp
        if self.exp < other.exp:
            s = other.exp - self.exp
            return self.lo_man, self.hi_man, other.lo_man << s, other.hi_man << s, self.exp
        s = self.exp - other.exp
        return self.lo_man << s, self.hi_man << s, other.lo_man, other.hi_man, other.exp

    def __add__(self, other) -> "Ball":
        other = _coerce(other)
        a, b, c, d, e = self._align(other)
        return Ball(a + c, b + d, e)

    __radd__ = __add__

    def __neg__(self) -> "Ball":
        return Ball(-self.hi_man, -self.lo_man, self.exp)

    def __sub__(self, other) -> "Ball":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "Ball":
        return _coerce(other) - self

    def __mul__(self, other) -> "Ball":
        if isinstance(other, int):
            if other >= 0:
                return Ball(self.lo_man * other, self.hi_man * other, self.exp)
            return Ball(self.hi_man * other, self.lo_man * other, self.exp)
        other = _coerce(other)
        a, b, c, d = self.lo_man, self.hi_man, other.lo_man, other.hi_man
        if a >= 0 and c >= 0:
            lo, hi = a * c, b * d
        else:
            p = (a * c, a * d, b * c, b * d)
            lo, hi = min(p), max(p)
        return Ball(lo, hi, self.exp + other.exp)

    __rmul__ = __mul__

    def scale2(self, k: int) -> "Ball":
        """Multiply by 2**k exactly."""
        return Ball(self.lo_man, self.hi_man, self.exp + k)

    def abs(self) -> "Ball":
        if self.lo_man >= 0:
            return self
        if self.hi_man <= 0:
            return -self
        return Ball(0, max(-self.lo_man, self.hi_man), self.exp)

    # -- rounded operations -------------------------------------------------

    def recip(self, prec: int) -> "Ball":
        if self.lo_man <= 0 <= self.hi_man:
            raise ZeroDivisionError("reciprocal of a ball containing zero")
        # 1/(man * 2**exp) = 2**-exp / man, decreasing on each sign component
        lo_man, lo_exp = _div_round(1, -self.exp, self.hi_man, prec, up=False)
        hi_man, hi_exp = _div_round(1, -self.exp, self.lo_man, prec, up=True)
        return Ball._pair(lo_man, lo_exp, hi_man, hi_exp)

    def div(self, other, prec: int) -> "Ball":
        other = _coerce(other)
        if isinstance(other, Ball) and other.lo_man <= 0 <= other.hi_man:
            raise ZeroDivisionError("division by a ball containing zero")
        if other.is_exact():
            d = other.lo_man
            e = self.exp - other.exp
            if d > 0:
                lm, le = _div_round(self.lo_man, e, d, prec, up=False)
                hm, he = _div_round(self.hi_man, e, d, prec, up=True)
            else:
                lm, le = _div_round(self.hi_man, e, d, prec, up=False)
                hm, he = _div_round(self.lo_man, e, d, prec, up=True)
            return Ball._pair(lm, le, hm, he)
        return (self * other.recip(prec + 4)).round(prec)

    def sqr(self) -> "Ball":
        a = self.abs()
        return Ball(a.lo_man * a.lo_man, a.hi_man * a.hi_man, 2 * a.exp)

    # -- comparisons -----------------------------------------------------------

    def contains(self, value) -> bool:
        if isinstance(value, Ball):
            return self.lo <= value.lo and value.hi <= self.hi
        value = Fraction(value)
        return self.lo <= value <= self.hi

    def subset_of(self, other: "Ball") -> bool:
        return other.contains(self)

    def lt(self, other) -> bool:
        """Certainly less: every point of ``self`` is below every point of ``other``."""
        other = _coerce(other)
        a, b, c, d, _ = self._align(other)
        return b < c

    def le(self, other) -> bool:
        other = _coerce(other)
        a, b, c, d, _ = self._align(other)
        return b <= c

    def gt(self, other) -> bool:
        return _coerce(other).lt(self)

    def ge(self, other) -> bool:
        return _coerce(other).le(self)

    def overlaps(self, other) -> bool:
        other = _coerce(other)
        a, b, c, d, _ = self._align(other)
        return not (b < c or d < a)

    def floor_bounds(self) -> tuple[int, int]:
        """floor of the lower and of the upper endpoint."""
        if self.exp >= 0:
            return self.lo_man << self.exp, self.hi_man << self.exp
        s = -self.exp
        return self.lo_man >> s, self.hi_man >> s

    def strict_floor(self) -> int | None:
        """``v`` with ``v < lo <= hi < v + 1``, or None when not certified.

        A lower endpoint sitting exactly on an integer is not accepted: the
        enclosed value might be that integer.
        """
        fl, fh = self.floor_bounds()
        if fl != fh:
            return None
        if self.exp < 0 and self.lo_man & ((1 << -self.exp) - 1) == 0:
            return None
        if self.exp >= 0:
            return None
        return fl

    def to_json(self) -> dict:
        return {"lo_man": str(self.lo_man), "hi_man": str(self.hi_man), "exp": self.exp}

    @classmethod
    def from_json(cls, data: dict) -> "Ball":
        return cls(int(data["lo_man"]), int(data["hi_man"]), int(data["exp"]))


def _coerce(x) -> Ball:
    if isinstance(x, Ball):
        return x
    if isinstance(x, int):
        return Ball(x, x, 0)
    if isinstance(x, Fraction):
        # non-dyadic rationals become a tight enclosure; comparisons stay certified
        bits = max(x.numerator.bit_length(), x.denominator.bit_length())
        return Ball.exact(x, 2 * bits + 128)
    raise TypeError(f"cannot use {type(x).__name__} as a Ball")


def _div_round(man: int, exp: int, d: int, prec: int, up: bool) -> tuple[int, int]:
    """Round (man * 2**exp) / d outward; returns (man, exp)."""
    if d < 0:
        man, d = -man, -d
    m, e = _round_fraction(man, d, prec, up)
    return m, e + exp


# ---------------------------------------------------------------------------
# elementary functions on exact dyadic points


def sqrt_ball(x: Ball, prec: int) -> Ball:
    """Enclosure of sqrt over a nonnegative ball."""
    if x.lo_man < 0:
        raise ValueError("square root of a ball with negative part")
    # choose f so the result carries about prec bits
    mag = max(x.hi_man.bit_length() + x.exp, 1)
    f = prec - (mag + 1) // 2 + 2
    t = x.exp + 2 * f
    if t >= 0:
        vlo, vhi = x.lo_man << t, x.hi_man << t
        exact_hi = True
    else:
        vlo = x.lo_man >> -t
        vhi = -((-x.hi_man) >> -t)
        exact_hi = False
    lo = math.isqrt(vlo)
    hi = math.isqrt(vhi)
    if hi * hi != vhi or not exact_hi:
        hi += 1
    return Ball(lo, hi, -f)


def _series_guard(prec: int) -> int:
    return 2 * max(prec, 8).bit_length() + 8


def _exp_point(man: int, exp: int, prec: int) -> Ball:
    """Enclosure of e**(man * 2**exp) with relative precision ~prec bits."""
    if man == 0:
        return Ball(1, 1, 0)
    if man < 0:
        return _exp_point(-man, exp, prec + 2).recip(prec)
    # argument reduction: y = x / 2**r with y < 2**-s
    s = math.isqrt(prec) // 2 + 1
    r = max(0, man.bit_length() + exp + s)
    w = prec + r + _series_guard(prec)
    # fixed point at scale 2**-w; y_fixed = floor(y * 2**w) and y exact dyadic
    ye = exp - r  # y = man * 2**ye
    total_lo = 1 << w
    term = 1 << w
    j = 0
    err = 0
    while True:
        j += 1
        # term_j = term_{j-1} * y / j, truncated
        term = _floor_div_shift(term * man, j, ye)
        # truncation error per term stays below 2 ulps because y / j <= 1/2
        err += 2
        if term == 0:
            break
        total_lo += term
        if term.bit_length() < 2 and j > 2:
            break
    # y <= 1/2, so the remaining tail is at most twice the last term
    total_hi = total_lo + 2 * (term + 1) + err + 1
    b = Ball(total_lo, total_hi, -w)
    for _ in range(r):
        b = b.sqr().round(w)
    return b.round(prec + 2)


def _expm1_point(man: int, exp: int, prec: int) -> Ball:
    """Enclosure of e**x - 1 for small |x| = |man * 2**exp| <= 1/2."""
    if man == 0:
        return Ball(0, 0, 0)
    t = Ball(man, man, exp)
    w = prec + _series_guard(prec)
    term = t
    total = t
    j = 1
    while True:
        j += 1
        term = (term * t).div(j, w)
        total = (total + term).round(w)
        if term.mag_bits() < total.mag_bits() - w - 2:
            break
    # remaining tail bounded by 2 |term| since |t| <= 1/2
    tail = term.abs().scale2(1)
    total = total + Ball(-tail.hi_man, tail.hi_man, tail.exp)
    return total.round(prec + 2)


def exp_ball(x: Ball, prec: int) -> Ball:
    """Enclosure of exp over ``x``; for an exact ``x`` the width is at most ``2**-prec``."""
    top = x.hi_man.bit_length() + x.exp
    if x.hi_man > 0 and top > 0:
        # e**x < 2**(2x) bounds the magnitude for positive x
        prec += 2 * ((x.hi_man >> -x.exp) + 1 if x.exp < 0 else x.hi_man << x.exp) + 2
    if x.is_exact():
        return _exp_point(x.lo_man, x.exp, prec)
    lo = _exp_point(x.lo_man, x.exp, prec)
    hi = _exp_point(x.hi_man, x.exp, prec)
    return Ball._pair(lo.lo_man, lo.exp, hi.hi_man, hi.exp)


def expm1_ball(x: Ball, prec: int) -> Ball:
    """Enclosure of e**x - 1, accurate in relative terms near zero."""

    def point(m: int) -> Ball:
        if m == 0:
            return Ball(0, 0, 0)
        if (abs(m).bit_length() + x.exp) <= -1:
            return _expm1_point(m, x.exp, prec)
        return _exp_point(m, x.exp, prec + 4) - 1

    lo = point(x.lo_man)
    if x.is_exact():
        return lo
    hi = point(x.hi_man)
    return Ball._pair(lo.lo_man, lo.exp, hi.hi_man, hi.exp)


def _atanh_recip_series(z: Ball, prec: int) -> Ball:
    """atanh(z) for |z| <= 1/4 by its odd power series with a tail bound."""
    w = prec + _series_guard(prec)
    z2 = z.sqr().round(w)
    power = z
    total = z
    k = 1
    while True:
        k += 2
        power = (power * z2).round(w)
        term = power.div(k, w)
        total = (total + term).round(w)
        if power.mag_bits() < total.mag_bits() - w - 4:
            break
    # tail: sum_{j >= 1} |z|^(k + 2j) / (k + 2j) <= |power| * z2 / (1 - z2) <= 2 |power| z2
    tail = (power.abs() * z2).scale2(1)
    total = total + Ball(-tail.hi_man, tail.hi_man, tail.exp)
    return total.round(prec + 2)


@lru_cache(maxsize=64)
def log2_ball(prec: int) -> Ball:
    """Enclosure of log 2 = 2 atanh(1/3)."""
    w = prec + 8
    third = Ball.exact(Fraction(1, 3), w)
    return _atanh_recip_series(third, w).scale2(1).round(prec + 2)


def _log_point(man: int, exp: int, prec: int) -> Ball:
    if man <= 0:
        raise ValueError("logarithm of a nonpositive number")
    # x = m * 2**k, m in [1/sqrt2, sqrt2)
    k = man.bit_length() + exp - 1
    mexp = exp - k  # m = man * 2**mexp, in [1, 2)
    m = Ball(man, man, mexp)
    if m.sqr().gt(2):
        k += 1
        mexp -= 1
        m = Ball(man, man, mexp)
    w = prec + abs(k).bit_length() + 8
    if m.lo == 1:
        logm = Ball(0, 0, 0)
    else:
        z = (m - 1).div(m + 1, w)
        logm = _atanh_recip_series(z, w).scale2(1)
    if k == 0:
        return logm.round(prec + 2)
    return (logm + log2_ball(w) * k).round(prec + 2)


def log_ball(x: Ball, prec: int) -> Ball:
    """Enclosure of the natural logarithm over a positive ball."""
    if x.lo_man <= 0:
        raise ValueError("logarithm of a ball with nonpositive part")
    lo = _log_point(x.lo_man, x.exp, prec)
    if x.is_exact():
        return lo
    hi = _log_point(x.hi_man, x.exp, prec)
    return Ball._pair(lo.lo_man, lo.exp, hi.hi_man, hi.exp)
