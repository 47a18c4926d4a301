"""Explicit theta with an empty or an infinite atypical set, and the count statistic.

Empty family: l = [a0; a1, ...] with a0 >= 1 and a_{2k} <= 3 a0 - 2, theta = e^(2/l).
Then lambda_{2k} < a_{2k} + 2 <= 3 a0 <= 6c^2/log(theta) for every c, so no
continuant candidate exists. The c-parameterised case l = [1; c, 1, c, ...]
gives theta = e^(-c + sqrt(c(c+4))).

Infinite family: l = [0; 2, 4, a3, 4, a5, ...], theta = e^(2/l), e^4 < theta < e^(9/2).
Every B_{2k-1} with k >= 3 is atypical. With a_{2k+1} = c,
theta = e^(4 - c + sqrt(c(c+1))).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .atypical import (
    classify_continuant,
    enumerate_continuant,
    q_set_membership,
    scan_direct,
)
from .contfrac import CFValue, cf_of_quadratic, cf_of_real, format_cf, halve_cf, lambda_k, value_from_cf
from .errors import InputError, UnsupportedRange, VerificationFailure
from .mtheta import ExpQuadratic, FromCF, RationalTheta, _LogValue, is_atypical
from .realnum import (
    DEFAULT_POLICY,
    QuadIrr,
    RecipLogTheta,
    RefinePolicy,
    compare,
    evaluate,
    quadratic,
)

EMPTY = "EmptyFamily"
INFINITE = "InfiniteFamily"
ROOT2 = "Root2Special"


@dataclass(frozen=True)
class FamilyParams:
    variant: str
    preperiod: tuple
    period: tuple | None
    theta: FromCF
    c: int | None = None
    closed_form: object = None  # exact log(theta) when the expansion is periodic

    @property
    def ell(self) -> CFValue:
        return self.theta.ell

    def term(self, k: int) -> int:
        return self.ell.term(k)

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "cf": format_cf(self.preperiod, self.period),
            "theta": self.theta.canonical(),
            "c": self.c,
            "log_theta": None if self.closed_form is None else str(self.closed_form),
        }


def _as_terms(c, a, period):
    if a is None and period is None:
        raise InputError("give c or an explicit expansion")
    return tuple(a or ()), (tuple(period) if period else None)


def _check_indices(pre, period):
    """Indices covering every residue of the (pre)periodic pattern at both parities."""
    span = len(pre) + (2 * len(period) if period else 0)
    return range(1, max(span, len(pre)) + 1)


def _make(variant, pre, period, c, closed):
    ell = CFValue(pre, period)
    return FamilyParams(variant, pre, period, FromCF(ell), c, closed)


def build_empty_family(c: int | None = None, a=None, period=None) -> FamilyParams:
    """theta = e^(2/l) with a0 >= 1 and a_{2k} <= 3 a0 - 2 for all k >= 1."""
    if c is not None:
        if c < 1:
            raise InputError("c must be a positive integer")
        pre, period = (1,), (c, 1)
    else:
        pre, period = _as_terms(c, a, period)
    if period is None:
        raise InputError("the family needs an infinite (periodic) expansion")
    ell = CFValue(pre, period)
    a0 = ell.term(0)
    if a0 < 1:
        raise InputError(f"a0 = {a0} must be at least 1")
    for k in _check_indices(pre, period):
        if k % 2 == 0 and ell.term(k) > 3 * a0 - 2:
            raise InputError(
                f"a_{k} = {ell.term(k)} exceeds 3*a0 - 2 = {3 * a0 - 2}", index=k
            )
    closed = 2 / value_from_cf(pre, period)
    if c is not None:
        expect = quadratic(-c, 1, c * (c + 4))
        if closed != expect:
            raise VerificationFailure("closed form mismatch", {"got": str(closed), "expected": str(expect)})
    return _make(EMPTY, pre, period, c, closed)


def build_root2_case() -> FamilyParams:
    """theta = e^sqrt(2), 2/log(theta) = [1; 2, 2, ...]; outside the general criterion."""
    pre, period = (1,), (2,)
    return _make(ROOT2, pre, period, None, 2 / value_from_cf(pre, period))


def build_infinite_family(c: int | None = None, a=None, period=None) -> FamilyParams:
    """theta = e^(2/l) with a0 = 0, a1 = 2 and a_{2k} = 4 for all k >= 1."""
    if c is not None:
        if c < 1:
            raise InputError("c must be a positive integer")
        pre, period = (0, 2), (4, c)
    else:
        pre, period = _as_terms(c, a, period)
    if period is None:
        raise InputError("the family needs an infinite (periodic) expansion")
    ell = CFValue(pre, period)
    if ell.term(0) != 0 or ell.term(1) != 2:
        raise InputError("the infinite family needs a0 = 0 and a1 = 2")
    for k in _check_indices(pre, period):
        if k % 2 == 0 and ell.term(k) != 4:
            raise InputError(f"a_{k} = {ell.term(k)} must equal 4", index=k)
    closed = 2 / value_from_cf(pre, period)
    if c is not None:
        expect = quadratic(4 - c, 1, c * (c + 1))
        if closed != expect:
            raise VerificationFailure("closed form mismatch", {"got": str(closed), "expected": str(expect)})
    fp = _make(INFINITE, pre, period, c, closed)
    lg = _LogValue(fp.theta)
    if not (compare(lg, 4, ">") and compare(lg, Fraction(9, 2), "<")):
        raise VerificationFailure("e^4 < theta < e^(9/2) failed", {"theta": fp.theta.canonical()})
    return fp


def parse_family(text: str) -> FamilyParams:
    """``empty:c=3``, ``empty:a=[1;period(2,1)]``, ``infinite:c=4``, ``infinite:a=[...]``."""
    from .mtheta import parse_cf

    kind, _, arg = text.strip().partition(":")
    key, _, val = arg.partition("=")
    builders = {"empty": build_empty_family, "infinite": build_infinite_family}
    if kind not in builders or key not in ("c", "a"):
        raise InputError(f"bad family {text!r}; expected empty|infinite:c=<int> or :a=[...]")
    if key == "c":
        try:
            return builders[kind](c=int(val))
        except ValueError as exc:
            raise InputError(f"bad family parameter {val!r}") from exc
    pre, period = parse_cf(val)
    return builders[kind](a=pre, period=period)


# ---------------------------------------------------------------------------
# verification


@dataclass
class VerificationReport:
    name: str
    passed: bool = True
    checks: list[dict] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def check(self, label: str, ok: bool, **details):
        entry = {"check": label, "ok": bool(ok), **details}
        self.checks.append(entry)
        if not ok:
            self.passed = False
            self.failures.append(entry)

    def to_json(self) -> dict:
        return {
            "kind": "verification",
            "name": self.name,
            "passed": self.passed,
            "checks": self.checks,
            "failures": self.failures,
            "notes": self.notes,
        }

    def raise_for_failure(self):
        if not self.passed:
            raise VerificationFailure(f"{self.name} failed", self.to_json())


def verify_empty(
    fp: FamilyParams,
    K: int = 25,
    N: int = 10**4,
    *,
    threshold_factor=1,
    policy: RefinePolicy = DEFAULT_POLICY,
) -> VerificationReport:
    """No continuant candidate up to depth K, and an empty direct scan up to N.

    ``threshold_factor`` scales 6/log(theta); values below 1 serve as a
    negative control that must make the check fail.
    """
    if fp.variant not in (EMPTY, ROOT2):
        raise InputError("verify_empty needs the empty family or the sqrt(2) case")
    rep = VerificationReport(f"family-empty {fp.theta.canonical()}")
    theta = fp.theta
    cf = fp.ell.expansion()
    six_over_log = 3 * fp.ell.exact()  # 6/log(theta) = 3 l
    thr = six_over_log * Fraction(threshold_factor)
    if fp.variant == EMPTY:
        bound = 3 * fp.term(0)
        rep.check("3*a0 <= 6/log(theta)", compare(bound, six_over_log, "<="), bound=bound)
    else:
        bound = 4
        rep.check("4 < 3*sqrt(2) = 6/log(theta)", compare(bound, six_over_log, "<"))
    for k in range(1, K + 1):
        lam = lambda_k(cf, 2 * k, 64)
        below_bound = compare(lam.exact, bound, "<", policy)
        below_thr = compare(lam.exact, thr, "<=", policy)
        ok = below_bound and below_thr
        entry = {"k": 2 * k, "lambda": str(lam.exact), "B": str(cf.B(2 * k - 1))}
        if not ok:
            # the failing candidate n = B_{2k-1}, c = 1, with its membership decision
            n = cf.B(2 * k - 1)
            entry["certificate"] = is_atypical(theta, n, policy=policy).to_json()
        rep.check(f"lambda_{2 * k} below 6c^2/log(theta)", ok, **entry)
    scan = scan_direct(theta, N, policy=policy)
    rep.check(
        f"direct scan of [1, {N}] is empty",
        scan.complete and not scan.members,
        members=[str(n) for n in scan.members],
        undecided=scan.undecided,
    )
    return rep


def verify_infinite(
    fp: FamilyParams, K: int = 20, *, policy: RefinePolicy = DEFAULT_POLICY
) -> VerificationReport:
    """Certify B_{2k-1} atypical for k = 3..K together with the halving and B/S relations.

    Only finitely many atypical continuants are exhibited; infinitude is the
    argument's conclusion, not something a finite run certifies.
    """
    if fp.variant != INFINITE:
        raise InputError("verify_infinite needs the infinite family")
    if K < 3:
        raise InputError("depth K must be at least 3")
    rep = VerificationReport(f"family-infinite {fp.theta.canonical()}")
    rep.notes.append(f"certifies {K - 2} atypical continuants (k = 3..{K}); infinitude is not certified")
    theta = fp.theta
    lg = _LogValue(theta)
    rep.check("e^4 < theta < e^(9/2)", compare(lg, 4, ">") and compare(lg, Fraction(9, 2), "<"))

    cfB = fp.ell.expansion()
    half_pre, half_per = halve_cf(fp.preperiod, fp.period)
    cfS = CFValue(half_pre, half_per).expansion()
    # the expansion of 1/log(theta) extracted numerically must match the halved one
    numeric = cf_of_real(RecipLogTheta(theta, 1), 2 * K + 1, policy)
    want = cfS.terms(2 * K + 1)
    rep.check(
        "numeric expansion of 1/log(theta) matches halve_cf",
        numeric.certified_upto >= 2 * K + 1 and numeric.a[: 2 * K + 2] == want,
        halved=format_cf(half_pre, half_per),
    )
    exact = cf_of_quadratic(fp.ell.exact() / 2)
    rep.check("exact expansion of l/2 matches halve_cf", exact.terms(2 * K + 1) == want)

    base = (cfS.B(0), cfB.B(0), cfS.B(1), cfB.B(1), cfS.B(2), cfB.B(2))
    rep.check("S0 = B0 = 1, S1 = 2 B1 = 4, S2 = B2 = 9", base == (1, 1, 4, 2, 9, 9), values=list(base))
    bs_ok = all(
        cfS.B(2 * k) == cfB.B(2 * k) and cfS.B(2 * k + 1) == 2 * cfB.B(2 * k + 1) for k in range(K + 1)
    )
    rep.check("S_{2k} = B_{2k} and S_{2k+1} = 2 B_{2k+1} for k = 0..K", bs_ok)

    certified = 0
    for k in range(3, K + 1):
        n = cfB.B(2 * k - 1)
        # tau_{2i} < b_{2i} + 2 = 4 forces c = 1, so n in Q means n = S_{2i-1} = 2 B_{2i-1}
        growth = n > 5 * cfB.B(2 * k - 3)
        no_match = all(2 * cfB.B(2 * i - 1) != n for i in range(1, k + 1))
        tau_ok = all(compare(lambda_k(cfS, 2 * i, 64).exact, 4, "<") for i in range(1, k + 1))
        cls = classify_continuant(theta, k, 2, policy=policy)
        q = q_set_membership(theta, n, policy)
        ok = growth and no_match and tau_ok and cls.classification == "Atypical" and not q.member
        certified += ok
        rep.check(
            f"B_{2 * k - 1} atypical and not in Q_theta",
            ok,
            n=str(n),
            growth=growth,
            no_match=no_match,
            tau_below_4=tau_ok,
            classification=cls.classification,
            k0=cls.k0,
            in_q=q.member,
            membership=cls.membership.to_json() if not ok else None,
        )
    rep.notes.append(f"{certified} certified atypical continuants")
    return rep


# ---------------------------------------------------------------------------
# counting


@dataclass(frozen=True)
class CountStatistic:
    theta: str
    limit: int
    count: int
    expected: float
    ratio: float | None
    method: str

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "limit": str(self.limit),
            "count": self.count,
            "expected": self.expected,
            "ratio": self.ratio,
            "method": self.method,
        }


SCAN_LIMIT = 10**7


def count_statistics(theta, N: int, *, policy: RefinePolicy = DEFAULT_POLICY) -> CountStatistic:
    """|A_theta in [1, N]| next to the almost-everywhere prediction (log theta / 12) ln N."""
    lg = _LogValue(theta)
    if not theta.log_is_rational and compare(lg, 3, "<", policy):
        rep = enumerate_continuant(theta, N, policy=policy)
    elif N <= SCAN_LIMIT:
        rep = scan_direct(theta, N, policy=policy)
    else:
        raise UnsupportedRange(f"theta >= e^3 or rational log needs N <= {SCAN_LIMIT} for a direct scan")
    if not rep.complete:
        raise UnsupportedRange(f"enumeration incomplete: {rep.undecided[:3]}")
    expected = float(evaluate(lg, 53).mid) / 12 * math.log(N)
    ratio = len(rep.members) / expected if expected > 0 else None
    return CountStatistic(theta.canonical(), N, len(rep.members), expected, ratio, rep.method)


_SQUAREFREE = [2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19, 21, 22, 23, 26, 29, 30]


def random_exp_quadratic(rng: random.Random, lo=Fraction(1, 20), hi=Fraction(3)) -> ExpQuadratic:
    """theta = e^w with w = (a + b sqrt d)/c drawn uniformly-ish from (lo, hi)."""
    while True:
        d = rng.choice(_SQUAREFREE)
        c = rng.randint(1, 12)
        b = rng.choice([-1, 1]) * rng.randint(1, 12)
        target = rng.uniform(float(lo), float(hi)) * c
        a = round(target - b * math.sqrt(d))
        w = quadratic(a, b, d, c)
        if isinstance(w, QuadIrr) and compare(w, lo, ">") and compare(w, hi, "<"):
            return ExpQuadratic(w)


def random_rational_theta(rng: random.Random, max_den: int = 1000) -> RationalTheta:
    """theta = u/v in (1, e^3). log theta is transcendental, so its expansion is unstructured."""
    v = rng.randint(1, max_den)
    u = rng.randint(v + 1, math.floor(v * math.e**3))
    return RationalTheta(Fraction(u, v))


SAMPLERS = {"quadratic": random_exp_quadratic, "rational": random_rational_theta}


def sample_thetas(count: int, seed: int, kind: str = "quadratic") -> list:
    """Seeded theta samples. Quadratic exponents have periodic expansions of 2/log theta,
    so their atypical sets follow a fixed pattern; use "rational" for the counting law."""
    if kind not in SAMPLERS:
        raise InputError(f"unknown sample kind {kind!r}", choices=sorted(SAMPLERS))
    rng = random.Random(seed)
    return [SAMPLERS[kind](rng) for _ in range(count)]
