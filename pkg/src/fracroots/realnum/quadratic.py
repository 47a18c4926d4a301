"""Exact arithmetic in real quadratic fields Q(sqrt d)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .ball import Ball, sqrt_ball


TRIAL_LIMIT = 1 << 16


def squarefree_split(d: int) -> tuple[int, int]:
    """Return ``(s, r)`` with ``d = s**2 * r``.

    Primes below ``TRIAL_LIMIT`` are divided out, and a leftover cofactor that
    is a perfect square is absorbed. ``r`` is therefore squarefree whenever that
    cofactor is below ``TRIAL_LIMIT**3``; above it a square of a large prime
    can survive. QuadIrr compares and combines by value,
    so a non-minimal ``r`` changes the representation only.
    """
    if d <= 0:
        raise ValueError("radicand must be positive")
    s, core, m = 1, 1, d
    p = 2
    while p * p <= m and p < TRIAL_LIMIT:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        s *= p ** (e // 2)
        core *= p ** (e % 2)
        p += 1 if p == 2 else 2
    # m now has only prime factors >= min(p, TRIAL_LIMIT)
    if m > 1 and is_square(m):
        s *= math.isqrt(m)
        m = 1
    return s, core * m


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def _floor_sqrt_times(b: int, d: int) -> int:
    """floor(b * sqrt(d)) for integer b and nonsquare d > 0."""
    r = math.isqrt(b * b * d)
    return r if b >= 0 else -r - 1


@dataclass(frozen=True, slots=True)
class QuadIrr:
    """The irrational number ``(a + b*sqrt(d)) / c``.

    Kept canonical: ``d`` squarefree and > 1, ``b != 0``, ``c > 0`` and
    ``gcd(a, b, c) == 1``. Build instances through :func:`quadratic`, which
    collapses rational values to :class:`~fractions.Fraction`.
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.b == 0 or self.c <= 0 or self.d < 2:
            raise ValueError("QuadIrr must be built through quadratic()")

    # -- views ----------------------------------------------------------------

    def __str__(self) -> str:
        sign = "-" if self.b < 0 else "+"
        return f"({self.a}{sign}{abs(self.b)}*sqrt({self.d}))/{self.c}"

    def __float__(self) -> float:
        return (self.a + self.b * math.sqrt(self.d)) / self.c

    def ball(self, prec: int) -> Ball:
        # b*sqrt(d) = sign(b) * sqrt(b*b*d)
        w = prec + 8
        root = sqrt_ball(Ball(self.b * self.b * self.d, self.b * self.b * self.d), w)
        if self.b < 0:
            root = -root
        return (root + self.a).div(self.c, w).round(prec + 2)

    def exact(self) -> "QuadIrr":
        return self

    def canonical(self) -> str:
        return f"quad:{self}"

    def conjugate(self) -> "QuadIrr":
        return QuadIrr(self.a, -self.b, self.c, self.d)

    def norm(self) -> Fraction:
        return Fraction(self.a * self.a - self.b * self.b * self.d, self.c * self.c)

    def trace(self) -> Fraction:
        return Fraction(2 * self.a, self.c)

    # -- exact order and floor ---------------------------------------------

    def floor(self) -> int:
        # floor((a + y)/c) == floor((a + floor(y))/c) for integer a and c > 0
        return (self.a + _floor_sqrt_times(self.b, self.d)) // self.c

    def sign(self) -> int:
        return _sign_a_plus_b_sqrt(self.a, self.b, self.d)

    def _cmp(self, other) -> int:
        diff = self - other
        if isinstance(diff, QuadIrr):
            return diff.sign()
        return _frac_sign(diff)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    # -- field operations --------------------------------------------------

    def _parts(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.a, self.c), Fraction(self.b, self.c)

    def _other_parts(self, other: "QuadIrr") -> tuple[Fraction, Fraction]:
        """``other`` as ``u + v sqrt(self.d)``; the radicands may differ by a square factor."""
        u, v = other._parts()
        if other.d == self.d:
            return u, v
        ratio = Fraction(other.d, self.d)
        if not (is_square(ratio.numerator) and is_square(ratio.denominator)):
            raise ValueError(f"cannot mix sqrt({self.d}) and sqrt({other.d})")
        k = Fraction(math.isqrt(ratio.numerator), math.isqrt(ratio.denominator))
        return u, v * k

    def __eq__(self, other):
        if isinstance(other, QuadIrr):
            # x + y sqrt d = u + v sqrt e  iff  x = u, sign y = sign v and y^2 d = v^2 e
            return (
                self.a * other.c == other.a * self.c
                and (self.b > 0) == (other.b > 0)
                and self.b * self.b * self.d * other.c * other.c
                == other.b * other.b * other.d * self.c * self.c
            )
        return False

    def __hash__(self):
        return hash((Fraction(self.a, self.c), Fraction(self.b * self.b * self.d, self.c * self.c), self.b > 0))

    def __add__(self, other):
        x, y = self._parts()
        if isinstance(other, QuadIrr):
            u, v = self._other_parts(other)
            return from_parts(x + u, y + v, self.d)
        return from_parts(x + Fraction(other), y, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadIrr(-self.a, -self.b, self.c, self.d)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        x, y = self._parts()
        if isinstance(other, QuadIrr):
            u, v = self._other_parts(other)
            return from_parts(x * u + y * v * self.d, x * v + y * u, self.d)
        other = Fraction(other)
        return from_parts(x * other, y * other, self.d)

    __rmul__ = __mul__

    def reciprocal(self) -> "QuadIrr":
        # 1/(x + y r) = (x - y r) / (x^2 - d y^2); the norm is nonzero for irrationals
        x, y = self._parts()
        n = x * x - y * y * self.d
        return from_parts(x / n, -y / n, self.d)

    def __truediv__(self, other):
        if isinstance(other, QuadIrr):
            return self * other.reciprocal()
        return self * (1 / Fraction(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * Fraction(other)


def _frac_sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def _sign_a_plus_b_sqrt(a: int, b: int, d: int) -> int:
    """Sign of a + b*sqrt(d), d > 0 nonsquare."""
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sa == sb or sa == 0:
        return sb if sb else sa
    if sb == 0:
        return sa
    # opposite signs: compare a^2 with b^2 d (never equal for nonsquare d)
    return sa if a * a > b * b * d else sb


def from_parts(x: Fraction, y: Fraction, d: int):
    """x + y*sqrt(d) with d squarefree, collapsing to Fraction when y == 0."""
    if y == 0:
        return Fraction(x)
    den = x.denominator * y.denominator // math.gcd(x.denominator, y.denominator)
    a = x.numerator * (den // x.denominator)
    b = y.numerator * (den // y.denominator)
    g = math.gcd(math.gcd(a, b), den)
    return QuadIrr(a // g, b // g, den // g, d)


def quadratic(a: int, b: int, d: int, c: int = 1):
    """Canonical form of ``(a + b*sqrt(d)) / c``.

    Returns a :class:`QuadIrr`, or a :class:`Fraction` when the value is
    rational (``b == 0`` or ``d`` a perfect square).
    """
    if c == 0:
        raise ZeroDivisionError("quadratic with zero denominator")
    if d < 0:
        raise ValueError("only real quadratic fields are supported")
    if b == 0 or d == 0:
        return Fraction(a, c)
    s, r = squarefree_split(d)
    b *= s
    if r == 1:
        return Fraction(a + b, c)
    return from_parts(Fraction(a, c), Fraction(b, c), r)


def floor_exact(x) -> int:
    if isinstance(x, QuadIrr):
        return x.floor()
    return math.floor(Fraction(x))


def exact_ball(x, prec: int) -> Ball:
    if isinstance(x, QuadIrr):
        return x.ball(prec)
    return Ball.exact(Fraction(x), prec)
