"""Symbolic real values that evaluate to certified balls, and certified decisions on them.

Every value type here implements two methods:

``ball(prec)``
    an enclosing :class:`Ball` computed with about ``prec`` working bits;
``exact()``
    the value as a ``Fraction`` or :class:`QuadIrr` when it has a closed
    algebraic form, else ``None``.

Decisions (floors, fractional-part comparisons) try the exact path first and
otherwise refine the working precision until the enclosing ball excludes the
boundary or the cap of the :class:`RefinePolicy` is reached.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Protocol, Union

from ..errors import InputError, UndecidedError
from .ball import Ball, log_ball
from .quadratic import QuadIrr, exact_ball, floor_exact, quadratic

Exact = Union[Fraction, QuadIrr]


class RealSpec(Protocol):
    def ball(self, prec: int) -> Ball: ...

    def exact(self) -> Exact | None: ...


@dataclass(frozen=True)
class RefinePolicy:
    """Working-precision schedule: ``start`` bits, multiplied by ``growth`` up to ``cap``."""

    start: int = 64
    growth: int = 2
    cap: int = 16384

    def __post_init__(self):
        if self.start < 2 or self.growth < 2 or self.cap < self.start:
            raise InputError(f"invalid refine policy {self}")

    def schedule(self):
        p = self.start
        while p < self.cap:
            yield p
            p *= self.growth
        yield self.cap

    @classmethod
    def fixed(cls, bits: int) -> "RefinePolicy":
        """A policy that tries exactly one precision (used for certificate replay)."""
        return cls(start=bits, growth=2, cap=bits)


DEFAULT_POLICY = RefinePolicy()


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class Rational:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))

    def ball(self, prec: int) -> Ball:
        return Ball.exact(self.value, prec)

    def exact(self) -> Fraction:
        return self.value

    def canonical(self) -> str:
        return f"rational:{self.value.numerator}/{self.value.denominator}"


@dataclass(frozen=True)
class SqrtRational:
    """sqrt(r) for a nonnegative rational r."""

    r: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r", Fraction(self.r))
        if self.r < 0:
            raise InputError("square root of a negative rational")

    def exact(self) -> Exact:
        p, q = self.r.numerator, self.r.denominator
        return quadratic(0, 1, p * q, q)

    def ball(self, prec: int) -> Ball:
        return exact_ball(self.exact(), prec)

    def canonical(self) -> str:
        return f"sqrt:{self.r.numerator}/{self.r.denominator}"


@dataclass(frozen=True)
class LogOfRational:
    """log(theta) for a rational theta > 1."""

    theta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "theta", Fraction(self.theta))
        if self.theta <= 1:
            raise InputError(f"log of rational requires theta > 1, got {self.theta}")

    def exact(self) -> None:
        return None

    def ball(self, prec: int) -> Ball:
        u, v = self.theta.numerator, self.theta.denominator
        w = prec + 4
        lb = log_ball(Ball(u, u), w)
        if v != 1:
            lb = lb - log_ball(Ball(v, v), w)
        return lb.round(prec + 2)

    def canonical(self) -> str:
        return f"log:{self.theta.numerator}/{self.theta.denominator}"


@dataclass(frozen=True)
class RecipLogTheta:
    """``multiplier / log(theta)`` for any theta object.

    ``theta`` needs ``log_exact()`` (a closed form of log theta, or None) and
    ``log_ball(prec)``; the theta types in :mod:`fracroots.mtheta` provide both.
    """

    theta: object
    multiplier: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "multiplier", Fraction(self.multiplier))
        if self.multiplier <= 0:
            raise InputError("multiplier must be positive")

    def exact(self) -> Exact | None:
        lg = self.theta.log_exact()
        if lg is None:
            return None
        return self.multiplier / lg

    def ball(self, prec: int) -> Ball:
        ex = self.exact()
        if ex is not None:
            return exact_ball(ex, prec)
        lb = self.theta.log_ball(prec + 6)
        m = self.multiplier
        return (lb.recip(prec + 4) * Ball.exact(m, prec + 8)).round(prec + 2)

    def canonical(self) -> str:
        m = self.multiplier
        mult = str(m.numerator) if m.denominator == 1 else f"({m})"
        return f"{mult}/log({self.theta.canonical()})"


@dataclass(frozen=True)
class Affine:
    """``scale * x + shift`` with rational scale and shift."""

    x: object
    scale: Fraction = Fraction(1)
    shift: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "x", as_real(self.x))
        object.__setattr__(self, "scale", Fraction(self.scale))
        object.__setattr__(self, "shift", Fraction(self.shift))

    def exact(self) -> Exact | None:
        ex = self.x.exact()
        if ex is None:
            return None
        return ex * self.scale + self.shift

    def ball(self, prec: int) -> Ball:
        ex = self.exact()
        if ex is not None:
            return exact_ball(ex, prec)
        extra = max(0, abs(self.scale.numerator).bit_length())
        b = self.x.ball(prec + extra + 4)
        w = prec + extra + 8
        out = b * Ball.exact(self.scale, w) + Ball.exact(self.shift, w)
        return out.round(prec + 2 + max(0, out.mag_bits()))

    def canonical(self) -> str:
        return f"({self.scale})*[{self.x.canonical()}]+({self.shift})"


@dataclass(frozen=True)
class BallFunction:
    """Value given by an arbitrary enclosure function ``prec -> Ball``."""

    fn: object
    label: str = "ball-function"

    def exact(self) -> None:
        return None

    def ball(self, prec: int) -> Ball:
        return self.fn(prec)

    def canonical(self) -> str:
        return self.label


def as_real(x) -> RealSpec:
    if isinstance(x, (int, Fraction)):
        return Rational(Fraction(x))
    if hasattr(x, "ball") and hasattr(x, "exact"):
        return x
    raise InputError(f"cannot interpret {x!r} as a real value")


# ---------------------------------------------------------------------------
# evaluation and decisions


def evaluate(x, p: int) -> Ball:
    """Ball containing ``x`` with width at most ``2**-p``."""
    if p < 2:
        raise InputError("precision must be at least 2 bits")
    x = as_real(x)
    ex = x.exact()
    if ex is not None:
        b = exact_ball(ex, 8)
        mag = max(0, b.mag_bits())
        return exact_ball(ex, p + mag + 4)
    wp = p + 16
    for _ in range(64):
        b = x.ball(wp)
        if b.is_exact() or b.width_bits() <= -p:
            return b
        deficit = b.width_bits() + p
        wp += int(deficit) + 16
    raise UndecidedError(f"could not reach width 2^-{p}", cap_bits=wp)


@dataclass(frozen=True)
class Decided:
    """``value < x < value + 1`` certified by ``ball``."""

    value: int
    ball: Ball
    precision: int


@dataclass(frozen=True)
class ExactInteger:
    """Floor obtained by exact rational or quadratic arithmetic.

    ``integral`` records whether the value itself is an integer.
    """

    value: int
    proof: str
    integral: bool


@dataclass(frozen=True)
class Undecided:
    precision_cap_bits: int
    ball: Ball | None = None

    @property
    def value(self):
        return None


FloorDecision = Union[Decided, ExactInteger, Undecided]


def _exact_floor(ex: Exact) -> ExactInteger:
    v = floor_exact(ex)
    if isinstance(ex, QuadIrr):
        return ExactInteger(v, "quadratic", False)
    return ExactInteger(v, "rational", ex == v)


def floor_certified(x, policy: RefinePolicy = DEFAULT_POLICY) -> FloorDecision:
    x = as_real(x)
    ex = x.exact()
    if ex is not None:
        return _exact_floor(ex)
    b = None
    for prec in policy.schedule():
        b = x.ball(prec)
        v = b.strict_floor()
        if v is not None:
            return Decided(v, b, prec)
    return Undecided(policy.cap, b)


def floor_value(x, policy: RefinePolicy = DEFAULT_POLICY) -> int:
    """Certified floor as an int; raises :class:`UndecidedError` instead of guessing."""
    d = floor_certified(x, policy)
    if isinstance(d, Undecided):
        raise UndecidedError(f"floor undecided at {policy.cap} bits", cap_bits=policy.cap, ball=d.ball)
    return d.value


_OPS = {
    "<": lambda c: c < 0,
    "<=": lambda c: c <= 0,
    ">": lambda c: c > 0,
    ">=": lambda c: c >= 0,
}


def _exact_cmp(a: Exact, b: Exact) -> int:
    if isinstance(a, QuadIrr):
        return a._cmp(b)
    if isinstance(b, QuadIrr):
        return -b._cmp(a)
    return (a > b) - (a < b)


def ball_compare(a: Ball, b: Ball, op: str) -> bool | None:
    """Certified truth of ``a op b`` over every pair of points, or None."""
    if op == "<":
        return True if a.lt(b) else (False if a.ge(b) else None)
    if op == "<=":
        return True if a.le(b) else (False if a.gt(b) else None)
    if op == ">":
        return True if a.gt(b) else (False if a.le(b) else None)
    if op == ">=":
        return True if a.ge(b) else (False if a.lt(b) else None)
    raise InputError(f"unknown comparison {op!r}")


def frac_ball(x: Ball) -> Ball | None:
    """Ball for the fractional part when the floor is constant over ``x``."""
    fl, fh = x.floor_bounds()
    if fl != fh:
        return None
    return x - fl


def compare(x, bound, op: str = "<", policy: RefinePolicy = DEFAULT_POLICY) -> bool:
    """Certified ``x op bound``."""
    x, bound = as_real(x), as_real(bound)
    ex, eb = x.exact(), bound.exact()
    if ex is not None and eb is not None:
        return _OPS[op](_exact_cmp(ex, eb))
    for prec in policy.schedule():
        r = ball_compare(x.ball(prec), bound.ball(prec), op)
        if r is not None:
            return r
    raise UndecidedError(f"comparison {op} undecided", cap_bits=policy.cap)


def frac_compare(x, bound, op: str = "<", policy: RefinePolicy = DEFAULT_POLICY) -> bool:
    """Certified truth of ``{x} op bound``; never guesses."""
    if op not in _OPS:
        raise InputError(f"unknown comparison {op!r}")
    x, bound = as_real(x), as_real(bound)
    ex, eb = x.exact(), bound.exact()
    frac_exact = None if ex is None else ex - floor_exact(ex)
    if frac_exact is not None and eb is not None:
        return _OPS[op](_exact_cmp(frac_exact, eb))
    last = None
    for prec in policy.schedule():
        if frac_exact is not None:
            fb = exact_ball(frac_exact, prec)
        else:
            fb = frac_ball(x.ball(prec))
            if fb is None:
                continue
        bb = bound.ball(prec)
        last = (fb, bb)
        r = ball_compare(fb, bb, op)
        if r is not None:
            return r
    raise UndecidedError(
        f"fractional-part comparison {op} undecided", cap_bits=policy.cap, balls=last
    )


def is_integer_certified(x, policy: RefinePolicy = DEFAULT_POLICY) -> bool:
    """True/False when integrality of ``x`` is decided, else raise."""
    d = floor_certified(x, policy)
    if isinstance(d, ExactInteger):
        return d.integral
    if isinstance(d, Decided):
        return False
    raise UndecidedError("integrality undecided", cap_bits=policy.cap)

