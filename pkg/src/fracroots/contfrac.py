"""Simple continued fractions: exact periodic expansions, certified extraction, convergents.

Index conventions: ``a[0]`` is the integer part, ``A_k/B_k`` is the k-th
convergent with ``A_{-1}=1, B_{-1}=0, A_{-2}=0, B_{-2}=1``, and

    lambda_k = [0; a_{k-1}, ..., a_1] + [a_k; a_{k+1}, ...]

so that ``x - A_k/B_k = (-1)**k / (B_k**2 * lambda_{k+1})``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .errors import InputError, InternalDisagreement, UndecidedError
from .realnum import (
    DEFAULT_POLICY,
    Ball,
    QuadIrr,
    RefinePolicy,
    as_real,
    compare,
    exact_ball,
    quadratic,
)
from .realnum.quadratic import from_parts


@dataclass(frozen=True)
class Convergent:
    A: int
    B: int
    k: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.A, self.B)


class CFExpansion:
    """Partial quotients of an irrational number, with lazily built convergents.

    Either periodic (``preperiod`` + ``period``, all indices available) or a
    certified prefix ``terms[0..certified_upto]`` extracted from ``source``.
    """

    def __init__(
        self,
        terms: Sequence[int] = (),
        period: Sequence[int] | None = None,
        source=None,
        certified_upto: int | None = None,
    ):
        self.preperiod = tuple(int(t) for t in terms)
        self.period = tuple(int(t) for t in period) if period else None
        if self.period is None and not self.preperiod:
            raise InputError("empty continued fraction")
        self.source = source
        if self.period is None:
            self.certified_upto = len(self.preperiod) - 1 if certified_upto is None else certified_upto
        else:
            self.certified_upto = None
        for k in range(1, len(self.preperiod)):
            if self.preperiod[k] < 1:
                raise InputError(f"partial quotient a_{k} = {self.preperiod[k]} must be >= 1")
        if self.period is not None and any(t < 1 for t in self.period):
            raise InputError("periodic partial quotients must be >= 1")
        self._A = [0, 1]  # A_{-2}, A_{-1}
        self._B = [1, 0]
        self._lock = threading.Lock()
        self._radicand = None

    # -- terms --------------------------------------------------------------

    @property
    def is_periodic(self) -> bool:
        return self.period is not None

    def available(self, k: int) -> bool:
        return k >= 0 and (self.is_periodic or k <= self.certified_upto)

    def term(self, k: int) -> int:
        if k < 0:
            raise IndexError("partial quotient index must be >= 0")
        if k < len(self.preperiod):
            if not self.is_periodic and k > self.certified_upto:
                raise IndexError(f"a_{k} is beyond the certified prefix (up to {self.certified_upto})")
            return self.preperiod[k]
        if not self.is_periodic:
            raise IndexError(f"a_{k} is beyond the certified prefix (up to {self.certified_upto})")
        return self.period[(k - len(self.preperiod)) % len(self.period)]

    def terms(self, upto: int) -> list[int]:
        return [self.term(k) for k in range(upto + 1)]

    @property
    def a(self) -> list[int]:
        """The certified prefix (or preperiod plus one period)."""
        if self.is_periodic:
            return list(self.preperiod + self.period)
        return list(self.preperiod[: self.certified_upto + 1])

    def shifted(self, k: int) -> tuple[tuple[int, ...], tuple[int, ...] | None]:
        """Partial quotients of the complete quotient ``[a_k; a_{k+1}, ...]``."""
        if self.is_periodic:
            if k < len(self.preperiod):
                return self.preperiod[k:], self.period
            r = (k - len(self.preperiod)) % len(self.period)
            return (), self.period[r:] + self.period[:r]
        return self.preperiod[k : self.certified_upto + 1], None

    @property
    def radicand(self) -> int | None:
        """Squarefree d with the value in Q(sqrt d); periodic expansions only."""
        if not self.is_periodic:
            return None
        if self._radicand is None:
            self._radicand = value_from_cf(self.preperiod, self.period).d
        return self._radicand

    # -- convergents ----------------------------------------------------------

    def _extend(self, k: int):
        with self._lock:
            A, B = self._A, self._B
            while len(A) - 2 <= k:
                j = len(A) - 2
                a = self.term(j)
                A.append(a * A[-1] + A[-2])
                B.append(a * B[-1] + B[-2])

    def A(self, k: int) -> int:
        if k < -2:
            raise IndexError(k)
        if k >= 0:
            self._extend(k)
        return self._A[k + 2]

    def B(self, k: int) -> int:
        if k < -2:
            raise IndexError(k)
        if k >= 0:
            self._extend(k)
        return self._B[k + 2]

    def __repr__(self) -> str:
        if self.is_periodic:
            return f"CFExpansion({format_cf(self.preperiod, self.period)})"
        return f"CFExpansion({list(self.a)}, certified_upto={self.certified_upto})"

    def to_json(self) -> dict:
        out = {"source": getattr(self.source, "canonical", lambda: None)()}
        if self.is_periodic:
            out["periodic"] = {
                "preperiod": [str(t) for t in self.preperiod],
                "period": [str(t) for t in self.period],
            }
        else:
            out["terms"] = [str(t) for t in self.a]
            out["certified_upto"] = self.certified_upto
        return out

    @classmethod
    def from_json(cls, data: dict) -> "CFExpansion":
        if "periodic" in data:
            p = data["periodic"]
            return cls([int(t) for t in p["preperiod"]], [int(t) for t in p["period"]])
        return cls([int(t) for t in data["terms"]], certified_upto=int(data["certified_upto"]))


# ---------------------------------------------------------------------------
# expansions


def cf_of_quadratic(q: QuadIrr) -> CFExpansion:
    """Exact eventually periodic expansion (Lagrange) with minimal preperiod and period."""
    if not isinstance(q, QuadIrr):
        raise InputError("value is rational; use the finite continued fraction of a Fraction")
    a, b, c, d = q.a, q.b, q.c, q.d
    # write q = (P + sqrt(D)) / Q with Q | D - P^2
    A0, C0 = (a, c) if b > 0 else (-a, -c)
    D = b * b * d * c * c
    P = A0 * abs(C0)
    Q = C0 * abs(C0)
    r = math.isqrt(D)
    seen: dict[tuple[int, int], int] = {}
    terms: list[int] = []
    while (P, Q) not in seen:
        seen[(P, Q)] = len(terms)
        if Q > 0:
            t = (P + r) // Q
        else:
            t = (-P - r - 1) // (-Q)
        terms.append(t)
        P = t * Q - P
        Q = (D - P * P) // Q
    start = seen[(P, Q)]
    cf = CFExpansion(terms[:start], terms[start:], source=q)
    cf._radicand = q.d
    return cf


def _cf_of_interval(ln: int, ld: int, hn: int, hd: int, limit: int) -> list[int]:
    """Partial quotients shared by every point of [ln/ld, hn/hd] (denominators > 0)."""
    terms: list[int] = []
    while len(terms) < limit:
        a = ln // ld
        if hn // hd != a:
            break
        terms.append(a)
        rl = ln - a * ld
        if rl == 0:
            break
        # t -> 1/(t - a) reverses the order of the endpoints
        ln, ld, hn, hd = hd, hn - a * hd, ld, rl
    return terms


def cf_of_real(x, K: int, policy: RefinePolicy = DEFAULT_POLICY) -> CFExpansion:
    """First ``K + 1`` partial quotients of an irrational value, each certified.

    If the precision cap is reached first the expansion is truncated and
    ``certified_upto < K`` says how far it got.
    """
    x = as_real(x)
    ex = x.exact()
    if ex is not None and not isinstance(ex, QuadIrr):
        raise InputError("value is rational; use the finite continued fraction of a Fraction")
    terms: list[int] = []
    # about 2 log2(golden ratio) bits per term at the slowest
    start = max(policy.start, int(1.4 * K) + 16)
    for prec in policy.schedule():
        if prec < start and prec != policy.cap:
            continue
        b = x.ball(prec)
        lo, hi = b.lo, b.hi
        terms = _cf_of_interval(lo.numerator, lo.denominator, hi.numerator, hi.denominator, K + 1)
        if len(terms) >= K + 1:
            break
    if not terms:
        raise UndecidedError("integer part undecided at the precision cap", cap_bits=policy.cap)
    return CFExpansion(terms, source=x, certified_upto=len(terms) - 1)


def cf_of(x, K: int, policy: RefinePolicy = DEFAULT_POLICY) -> CFExpansion:
    """Exact expansion for quadratic irrationals, certified extraction otherwise."""
    x = as_real(x)
    ex = x.exact()
    if isinstance(ex, QuadIrr):
        cf = cf_of_quadratic(ex)
        cf.source = x
        return cf
    return cf_of_real(x, K, policy)


def convergents(cf: CFExpansion, k: int) -> Convergent:
    if not cf.available(k):
        raise IndexError(f"convergent {k} is beyond the certified prefix")
    return Convergent(cf.A(k), cf.B(k), k)


# ---------------------------------------------------------------------------
# lambda_k


@dataclass(frozen=True)
class LambdaValue:
    k: int
    ball: Ball
    exact: object = None
    coarse: bool = False

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "ball": self.ball.to_json(),
            "exact": None if self.exact is None else str(self.exact),
            "coarse": self.coarse,
        }


def format_cf(preperiod: Sequence[int], period: Sequence[int] | None = None) -> str:
    """``[a0;a1,...,period(p1,...)]``, the grammar shared with the command line."""
    rest = [str(t) for t in preperiod[1:]]
    if period is not None:
        rest.append("period(" + ",".join(map(str, period)) + ")")
    elif not preperiod:
        return "[]"
    head = str(preperiod[0]) if preperiod else ""
    return f"[{head};" + ",".join(rest) + "]"


def _finite_value(terms: Sequence[int]) -> Fraction:
    v = Fraction(terms[-1])
    for t in reversed(terms[:-1]):
        v = t + 1 / v
    return v


def lambda_k(cf: CFExpansion, k: int, p: int = 128) -> LambdaValue:
    """lambda_k as exact head ``B_{k-2}/B_{k-1}`` plus the complete quotient at k.

    For truncated expansions the complete quotient is bracketed by the last
    known partial quotient; ``coarse`` flags a width above ``2**-p``.
    """
    if k < 1:
        raise InputError("lambda_k needs k >= 1")
    if not cf.available(k):
        raise IndexError(f"lambda_{k} needs a_{k}, beyond the certified prefix")
    head = Fraction(cf.B(k - 2), cf.B(k - 1))
    if cf.is_periodic:
        pre, per = cf.shifted(k)
        lam = head + value_from_cf(pre, per, cf.radicand)
        mag = max(1, int(float(lam)).bit_length())
        return LambdaValue(k, exact_ball(lam, p + mag + 4), lam, False)
    pre, _ = cf.shifted(k)
    lo = _finite_value(pre)
    hi = _finite_value(pre[:-1] + (pre[-1] + 1,))
    lo, hi = min(lo, hi), max(lo, hi)
    mag = max(1, int(hi + head).bit_length())
    ball = Ball.from_bounds(head + lo, head + hi, p + mag + 4)
    return LambdaValue(k, ball, None, ball.width_bits() > -p)


# ---------------------------------------------------------------------------
# reconstruction and transforms


def _matrix(terms: Sequence[int]) -> tuple[int, int, int, int]:
    """[[p, p'], [q, q']] with p/q = [t0; ..., tn] and p'/q' the previous convergent."""
    p, pp, q, qq = 1, 0, 0, 1
    for t in terms:
        p, pp = t * p + pp, p
        q, qq = t * q + qq, q
    return p, pp, q, qq


def value_from_cf(a: Sequence[int], period: Sequence[int] | None = None, radicand: int | None = None):
    """Exact value: Fraction for finite input, QuadIrr for an eventually periodic one.

    ``radicand`` (the squarefree d of the field, when known) skips factoring
    the period's discriminant, which carries a large square factor.
    """
    a = [int(t) for t in a]
    period = [int(t) for t in period] if period else None
    for k in range(1, len(a)):
        if a[k] < 1:
            raise InputError(f"partial quotient a_{k} = {a[k]} must be >= 1")
    if period is None:
        if not a:
            raise InputError("empty continued fraction")
        return _finite_value(a)
    if any(t < 1 for t in period) or (not a and len(period) == 0):
        raise InputError("period terms must be >= 1")
    # fixed point y = [p1; ..., pm, y]:  Q y^2 + (Q' - P) y - P' = 0
    P, Pp, Q, Qp = _matrix(period)
    s = P - Qp
    D = s * s + 4 * Q * Pp
    y = None
    if radicand is not None and D % radicand == 0:
        root = math.isqrt(D // radicand)
        if root * root * radicand == D:
            y = from_parts(Fraction(s, 2 * Q), Fraction(root, 2 * Q), radicand)
    if y is None:
        y = quadratic(s, 1, D, 2 * Q)
    if not a:
        return y
    p, pp, q, qq = _matrix(a)
    return (y * p + pp) / (y * q + qq)


def halve_cf(a: Sequence[int], period: Sequence[int] | None = None):
    """Partial quotients of x/2 when every even-indexed quotient of x is even.

    ``[a0; a1, a2, a3, ...] / 2 = [a0/2; 2a1, a2/2, 2a3, ...]``. Returns a
    list for finite input, ``(preperiod, period)`` for periodic input.
    """
    a = [int(t) for t in a]
    per = [int(t) for t in period] if period else None
    if per is not None and len(per) % 2 == 1:
        per = per + per

    def transform(t: int, idx: int) -> int:
        if idx % 2 == 0:
            if t % 2:
                raise InputError(f"a_{idx} = {t} is odd; halving needs even-indexed quotients even")
            return t // 2
        return 2 * t

    out = [transform(t, i) for i, t in enumerate(a)]
    if per is None:
        return out
    n = len(a)
    return out, [transform(t, n + i) for i, t in enumerate(per)]


@dataclass(frozen=True)
class CFValue:
    """The number ``[a0; a1, a2, ...]`` as a real value.

    Given by a preperiod and period (exact quadratic irrational) or by a
    callable ``k -> a_k`` (evaluated through bracketing convergents).
    """

    preperiod: tuple = ()
    period: tuple | None = None
    generator: Callable[[int], int] | None = None
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "preperiod", tuple(int(t) for t in self.preperiod))
        if self.period is not None:
            object.__setattr__(self, "period", tuple(int(t) for t in self.period))
        if self.period is None and self.generator is None:
            raise InputError("an infinite continued fraction needs a period or a generator")

    def term(self, k: int) -> int:
        if k < len(self.preperiod):
            return self.preperiod[k]
        if self.period is not None:
            return self.period[(k - len(self.preperiod)) % len(self.period)]
        return int(self.generator(k))

    def exact(self):
        if self.period is None:
            return None
        return value_from_cf(self.preperiod, self.period)

    def ball(self, prec: int) -> Ball:
        ex = self.exact()
        if ex is not None:
            return exact_ball(ex, prec)
        A, Ap, B, Bp = self.term(0), 1, 1, 0
        k = 0
        target = prec + 4 + max(0, abs(A).bit_length())
        while True:
            k += 1
            t = self.term(k)
            if t < 1:
                raise InputError(f"generator produced a_{k} = {t} < 1")
            A, Ap = t * A + Ap, A
            B, Bp = t * B + Bp, B
            # x lies between consecutive convergents; their gap is 1/(B B')
            if (B * Bp).bit_length() > target:
                break
        lo, hi = sorted((Fraction(A, B), Fraction(Ap, Bp)))
        return Ball.from_bounds(lo, hi, prec + 4)

    def expansion(self) -> CFExpansion:
        if self.period is None:
            raise InputError("only periodic values have an exact expansion")
        return CFExpansion(self.preperiod, self.period, source=self)

    def canonical(self) -> str:
        if self.label:
            return self.label
        return format_cf(self.preperiod, self.period)


# ---------------------------------------------------------------------------
# best approximations


def best_approx_witness(x, m: int, n: int, policy: RefinePolicy = DEFAULT_POLICY):
    """``(c, k)`` with ``m = c A_k``, ``n = c B_k`` and ``lambda_{k+1} > 2 c^2``.

    Returns None when ``|x - m/n| > 1/(2 n^2)``.
    """
    if n < 1:
        raise InputError("denominator must be positive")
    x = as_real(x)
    r = Fraction(m, n)
    tol = Fraction(1, 2 * n * n)
    if not (compare(x, r - tol, ">=", policy) and compare(x, r + tol, "<=", policy)):
        return None
    c = math.gcd(m, n)
    m0, n0 = m // c, n // c
    K = 8
    while True:
        cf = cf_of(x, K, policy)
        # B_0 = B_1 when a_1 = 1, so every k with B_k = n0 is tried
        k = 0
        found = None
        while cf.available(k + 1) and cf.B(k) <= n0:
            if cf.B(k) == n0 and cf.A(k) == m0:
                found = k
                break
            k += 1
        if found is not None or (cf.available(k) and cf.B(k) > n0):
            break
        if not cf.is_periodic and cf.certified_upto < K:
            raise UndecidedError("expansion too short to locate the convergent", cap_bits=policy.cap)
        K *= 2
    if found is None:
        raise InternalDisagreement(
            f"{m}/{n} is within 1/(2n^2) of x but {m0}/{n0} is not a convergent", m=m, n=n
        )
    k = found
    lam = lambda_k(cf, k + 1, 64)
    if not lam.ball.gt(2 * c * c):
        raise InternalDisagreement(
            "approximation condition holds but lambda_{k+1} > 2c^2 failed", c=c, k=k, lam=lam.ball
        )
    return c, k
