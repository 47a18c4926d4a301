"""Enumeration and classification of the atypical set A_theta.

Two independent enumerators are provided. :func:`scan_direct` decides every
n in [1, N]. :func:`enumerate_continuant` only looks at n = c * B_{2k-1},
where B_j are the continuants of 2/log(theta) and lambda_{2k} > 6c^2/log(theta);
for 1 < theta < e^3 every atypical n has that form.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .contfrac import CFExpansion, cf_of, lambda_k
from .errors import (
    InputError,
    InternalDisagreement,
    PreconditionError,
    UndecidedError,
    UnsupportedRange,
)
from .mtheta import (
    MembershipResult,
    _LogValue,
    is_atypical,
    m_prime,
    parse_theta,
    typical_value,
)
from .realnum import (
    DEFAULT_POLICY,
    Affine,
    Ball,
    RecipLogTheta,
    RefinePolicy,
    ball_compare,
    compare,
    evaluate,
    exact_ball,
    floor_exact,
)

SCHEMA_VERSION = "1"


# ---------------------------------------------------------------------------
# records


@dataclass
class AtypicalCertificate:
    """Evidence for one candidate n = c * B_{2k-1} (or a bare n for direct scans)."""

    theta: str
    n: int
    atypical: bool
    c: int | None = None
    k: int | None = None
    lam: Ball | None = None
    threshold: Ball | None = None
    lambda_precision: int | None = None
    cf_terms: int | None = None
    membership: MembershipResult | None = None

    def to_json(self) -> dict:
        return {
            "kind": "certificate",
            "theta": self.theta,
            "n": str(self.n),
            "atypical": self.atypical,
            "c": None if self.c is None else str(self.c),
            "k": self.k,
            "lambda": None if self.lam is None else self.lam.to_json(),
            "threshold": None if self.threshold is None else self.threshold.to_json(),
            "lambda_precision": self.lambda_precision,
            "cf_terms": self.cf_terms,
            "membership": None if self.membership is None else self.membership.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "AtypicalCertificate":
        mem = d.get("membership")
        return cls(
            theta=d["theta"],
            n=int(d["n"]),
            atypical=bool(d["atypical"]),
            c=None if d.get("c") is None else int(d["c"]),
            k=d.get("k"),
            lam=None if d.get("lambda") is None else Ball.from_json(d["lambda"]),
            threshold=None if d.get("threshold") is None else Ball.from_json(d["threshold"]),
            lambda_precision=d.get("lambda_precision"),
            cf_terms=d.get("cf_terms"),
            membership=None if mem is None else _membership_from_json(mem),
        )


def _membership_from_json(d: dict) -> MembershipResult:
    wit = {k: Ball.from_json(v) for k, v in d.get("witnesses", {}).items()}
    return MembershipResult(bool(d["atypical"]), int(d["n"]), d["via"], int(d["precision_bits"]), wit)


@dataclass
class EnumerationReport:
    theta: str
    limit: int
    method: str
    members: list[int] = field(default_factory=list)
    certificates: list[AtypicalCertificate] = field(default_factory=list)
    candidates_examined: int = 0
    undecided: list[dict] = field(default_factory=list)
    lambda_table: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.undecided

    def to_json(self) -> dict:
        return {
            "kind": "enumeration-report",
            "schema_version": SCHEMA_VERSION,
            "theta": self.theta,
            "limit": str(self.limit),
            "method": self.method,
            "complete": self.complete,
            "members": [str(n) for n in self.members],
            "candidates_examined": self.candidates_examined,
            "undecided": self.undecided,
            "lambda_table": self.lambda_table,
            "certificates": [c.to_json() for c in self.certificates],
            "notes": self.notes,
        }

    @classmethod
    def from_json(cls, d: dict) -> "EnumerationReport":
        return cls(
            theta=d["theta"],
            limit=int(d["limit"]),
            method=d["method"],
            members=[int(n) for n in d["members"]],
            certificates=[AtypicalCertificate.from_json(c) for c in d["certificates"]],
            candidates_examined=int(d["candidates_examined"]),
            undecided=list(d.get("undecided", [])),
            lambda_table=list(d.get("lambda_table", [])),
            notes=list(d.get("notes", [])),
        )


# ---------------------------------------------------------------------------
# direct scan


class _Prefilter:
    """Integer-only test that settles most n as typical without calling is_atypical.

    With r a ball for 1/log(theta) at absolute width 2^-S, n is certainly
    typical when ``{n r} >= 1/2`` or ``{n r} + log(theta)/(12 n) < 1/2`` (the
    second uses f(t) < t/12, applied only when t = log(theta)/n < 1).
    """

    def __init__(self, theta, N: int):
        S = 64 + N.bit_length()
        rb = evaluate(RecipLogTheta(theta), S)
        if rb.exp >= 0:
            lo, hi, s = rb.lo_man << rb.exp, rb.hi_man << rb.exp, 0
        else:
            lo, hi, s = rb.lo_man, rb.hi_man, -rb.exp
        self.lo, self.hi, self.s = lo, hi, s
        lb = evaluate(_LogValue(theta), 32).hi
        self.lnum, self.lden = lb.numerator, lb.denominator
        self.lnum_s = self.lnum << s
        self.half = 1 << (s - 1) if s else None

    def typical(self, n: int) -> bool:
        if self.half is None or n * self.lden <= self.lnum:
            return False
        s = self.s
        xl, xh = n * self.lo, n * self.hi
        fl = xl >> s
        if fl != xh >> s:
            return False
        if xl - (fl << s) >= self.half:
            return True
        fh = xh - (fl << s)
        return 12 * n * fh * self.lden + self.lnum_s < 6 * n * self.lden << s


def _scan_chunk(args):
    theta, lo, hi, paranoid, policy = args
    pre = _Prefilter(theta, hi)
    members, results, undecided = [], [], []
    examined = 0
    for n in range(lo, hi + 1):
        if pre.typical(n):
            continue
        examined += 1
        try:
            r = is_atypical(theta, n, paranoid=paranoid, policy=policy)
        except UndecidedError as exc:
            undecided.append({"n": str(n), "reason": str(exc)})
            continue
        if r.atypical:
            members.append(n)
            results.append(r)
    return members, results, undecided, examined


def _chunks(N: int, jobs: int):
    size = max(1, -(-N // (4 * jobs)))
    lo = 1
    while lo <= N:
        hi = min(N, lo + size - 1)
        yield lo, hi
        lo = hi + 1


def scan_direct(
    theta,
    N: int,
    *,
    jobs: int = 1,
    paranoid: bool = False,
    policy: RefinePolicy = DEFAULT_POLICY,
) -> EnumerationReport:
    """Decide membership for every n in [1, N]."""
    if N < 1:
        raise InputError("limit must be at least 1")
    if jobs > 1 and N > 5000:
        tasks = [(theta, lo, hi, paranoid, policy) for lo, hi in _chunks(N, jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_scan_chunk, tasks))
    else:
        parts = [_scan_chunk((theta, 1, N, paranoid, policy))]
    rep = EnumerationReport(theta.canonical(), N, "direct")
    for members, results, undecided, examined in parts:
        rep.members.extend(members)
        rep.undecided.extend(undecided)
        rep.candidates_examined += examined
        for r in results:
            rep.certificates.append(
                AtypicalCertificate(theta.canonical(), r.n, True, membership=r)
            )
    rep.members.sort()
    return rep


def check_typical_identity(
    theta, ns, policy: RefinePolicy = DEFAULT_POLICY
) -> list[dict]:
    """n in ``ns`` (nonzero, either sign) where M'(n) differs from the typical value."""
    bad = []
    for n in ns:
        if n == 0:
            continue
        mp, tv = m_prime(theta, n, policy), typical_value(theta, n, policy)
        if mp != tv:
            bad.append({"n": n, "m_prime": mp, "typical": tv})
    return bad


# ---------------------------------------------------------------------------
# continuant enumerator


class _GrowingCF:
    """Expansion of a value that re-extracts more terms on demand."""

    def __init__(self, x, policy: RefinePolicy, K: int = 40):
        self.x = x
        self.policy = policy
        self.K = K
        self.cf = cf_of(x, K, policy)
        self.exhausted = False

    def ensure(self, k: int) -> bool:
        """Make a_k available; False when the precision cap prevents it."""
        while not self.cf.available(k):
            if self.exhausted:
                return False
            K = max(2 * self.K, k + 8)
            cf = cf_of(self.x, K, self.policy)
            if cf.certified_upto <= self.cf.certified_upto:
                self.exhausted = True
            self.K, self.cf = K, cf
        return True

    @property
    def terms_used(self) -> int | None:
        return None if self.cf.is_periodic else self.cf.certified_upto


def _rebuild_cf(x, cf_terms: int | None, policy: RefinePolicy) -> CFExpansion:
    if cf_terms is None:
        return cf_of(x, 8, policy)
    cf = cf_of(x, cf_terms, policy)
    if cf.is_periodic:
        return cf
    if cf.certified_upto < cf_terms:
        raise UndecidedError("cannot rebuild the recorded expansion", cap_bits=policy.cap)
    return CFExpansion(cf.a[: cf_terms + 1], source=x)


def _lambda_exceeds(gcf: _GrowingCF, k: int, threshold, policy: RefinePolicy, strict=True):
    """Certified ``lambda_k > threshold`` (or >=); returns (verdict, lam, thr, prec)."""
    op = ">" if strict else ">="
    lam = lam_ball = thr_ball = None
    for prec in policy.schedule():
        lam = lambda_k(gcf.cf, k, prec)
        thr_ex = threshold.exact()
        if lam.exact is not None and thr_ex is not None:
            verdict = compare(lam.exact, thr_ex, op)
            return verdict, lam.ball, exact_ball(thr_ex, prec), prec
        thr_ball = threshold.ball(prec)
        lam_ball = lam.ball
        r = ball_compare(lam_ball, thr_ball, op)
        if r is not None:
            return r, lam_ball, thr_ball, prec
        if lam.coarse and not gcf.ensure(gcf.cf.certified_upto + 16):
            break
    return None, lam_ball, thr_ball, policy.cap


def _check_log_range(theta, bound: int, what: str, policy):
    if theta.log_is_rational:
        raise InputError(f"{what} needs log(theta) irrational; {theta.canonical()} has a rational log")
    if not compare(_LogValue(theta), bound, "<", policy):
        raise UnsupportedRange(
            f"{what} requires theta < e^{bound}; use scan_direct for {theta.canonical()}"
        )


def enumerate_continuant(
    theta,
    N: int,
    *,
    jobs: int = 1,
    paranoid: bool = False,
    policy: RefinePolicy = DEFAULT_POLICY,
) -> EnumerationReport:
    """A_theta up to N from the continuants of 2/log(theta); needs 1 < theta < e^3."""
    if N < 1:
        raise InputError("limit must be at least 1")
    _check_log_range(theta, 3, "the continuant enumerator", policy)
    name = theta.canonical()
    rep = EnumerationReport(name, N, "continuant")
    gcf = _GrowingCF(RecipLogTheta(theta, 2), policy)
    recip = RecipLogTheta(theta, 1)
    log_hi = evaluate(_LogValue(theta), 32).hi
    candidates = []
    k = 0
    while True:
        k += 1
        if not gcf.ensure(2 * k):
            rep.undecided.append({"k": k, "reason": "partial quotients not certified at cap"})
            break
        B = gcf.cf.B(2 * k - 1)
        if B > N:
            break
        a2k = gcf.cf.term(2 * k)
        # lambda_{2k} < a_{2k} + 2 bounds the multiplier
        c_max = min(math.isqrt(math.floor((a2k + 2) * log_hi / 6)), N // B)
        row = {"k": 2 * k, "B": str(B), "a": str(a2k), "c_max": c_max, "passed": []}
        # c = 1 is always compared so the table shows lambda_{2k} against 6/log(theta)
        for c in range(1, max(1, c_max) + 1):
            thr = Affine(recip, 6 * c * c)
            verdict, lam, tb, prec = _lambda_exceeds(gcf, 2 * k, thr, policy)
            if "lambda" not in row and lam is not None:
                row["lambda"] = lam.to_json()
            if verdict is None:
                rep.undecided.append({"k": 2 * k, "c": c, "reason": "lambda comparison undecided"})
                continue
            if c == 1:
                row["exceeds_6_over_log"] = verdict
            if verdict:
                row["passed"].append(c)
                candidates.append((k, c, B, lam, tb, prec))
        rep.lambda_table.append(row)
    rep.candidates_examined = len(candidates)
    ns = [c * B for (_, c, B, *_rest) in candidates]
    results = _membership_many(theta, ns, jobs, paranoid, policy)
    seen = set()
    for (k, c, B, lam, tb, prec), res in zip(candidates, results):
        n = c * B
        if isinstance(res, Exception):
            rep.undecided.append({"n": str(n), "reason": str(res)})
            continue
        rep.certificates.append(
            AtypicalCertificate(name, n, res.atypical, c, k, lam, tb, prec, gcf.terms_used, res)
        )
        if res.atypical and n not in seen:
            seen.add(n)
            rep.members.append(n)
    rep.members.sort()
    return rep


def _membership_one(args):
    theta, n, paranoid, policy = args
    try:
        return is_atypical(theta, n, paranoid=paranoid, policy=policy)
    except UndecidedError as exc:
        return exc


def _membership_many(theta, ns, jobs, paranoid, policy):
    tasks = [(theta, n, paranoid, policy) for n in ns]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_membership_one, tasks))
    return [_membership_one(t) for t in tasks]


def enumerate_both(theta, N: int, **kw) -> EnumerationReport:
    """Run both enumerators and insist that they agree."""
    a = enumerate_continuant(theta, N, **kw)
    b = scan_direct(theta, N, **kw)
    if a.complete and b.complete and a.members != b.members:
        raise InternalDisagreement(
            "continuant and direct enumerations disagree",
            continuant=a.members, direct=b.members, theta=theta.canonical(),
        )
    a.method = "both"
    a.undecided.extend(b.undecided)
    a.notes.append(f"direct scan examined {b.candidates_examined} n after prefiltering")
    return a


# ---------------------------------------------------------------------------
# good denominators Q_theta


@dataclass(frozen=True)
class QMembership:
    member: bool
    n: int
    m: int | None = None
    c: int | None = None
    i: int | None = None

    def to_json(self) -> dict:
        return {
            "member": self.member,
            "n": str(self.n),
            "m": None if self.m is None else str(self.m),
            "c": None if self.c is None else str(self.c),
            "i": self.i,
        }


def q_by_witness(theta, n: int, policy: RefinePolicy = DEFAULT_POLICY) -> QMembership:
    """Is there an integer m with 0 < m - n/log(theta) < 1/(2n)?"""
    x = RecipLogTheta(theta, n)
    ex = x.exact()
    m = floor_exact(ex) + 1 if ex is not None else None
    if m is None:
        for prec in policy.schedule():
            v = x.ball(prec + n.bit_length()).strict_floor()
            if v is not None:
                m = v + 1
                break
        else:
            raise UndecidedError(f"floor of n/log(theta) undecided for n={n}", cap_bits=policy.cap)
    # m - x > 0 always holds since x is irrational; test m - x < 1/(2n)
    gap_ok = compare(Affine(x, -1, m), Fraction(1, 2 * n), "<", policy)
    return QMembership(gap_ok, n, m if gap_ok else None)


def q_by_continuants(theta, n: int, policy: RefinePolicy = DEFAULT_POLICY, _gcf=None) -> QMembership:
    """n = c * S_{2i-1} with 2c^2 < tau_{2i}, S and tau from the expansion of 1/log(theta)."""
    gcf = _gcf or _GrowingCF(RecipLogTheta(theta, 1), policy)
    i = 0
    while True:
        i += 1
        if not gcf.ensure(2 * i):
            raise UndecidedError("expansion of 1/log(theta) not certified far enough", cap_bits=policy.cap)
        S = gcf.cf.B(2 * i - 1)
        if S > n:
            return QMembership(False, n)
        if n % S:
            continue
        c = n // S
        verdict, *_ = _lambda_exceeds(gcf, 2 * i, Affine(2 * c * c), policy)
        if verdict is None:
            raise UndecidedError(f"tau_{2 * i} comparison undecided", cap_bits=policy.cap)
        if verdict:
            return QMembership(True, n, c * gcf.cf.A(2 * i - 1), c, i)


def q_set_membership(theta, n: int, policy: RefinePolicy = DEFAULT_POLICY) -> QMembership:
    """Membership in Q_theta, decided two ways that must agree."""
    if n < 1:
        raise InputError("n must be positive")
    if theta.log_is_rational:
        raise InputError("Q_theta is defined here for irrational log(theta)")
    a = q_by_witness(theta, n, policy)
    b = q_by_continuants(theta, n, policy)
    if a.member != b.member or (a.member and a.m != b.m):
        raise InternalDisagreement(
            f"Q_theta routes disagree for n={n}", witness=a.to_json(), continuants=b.to_json()
        )
    return b


# ---------------------------------------------------------------------------
# rational log


def rational_bound(p: int, q: int) -> Fraction:
    """p^2/(6q): no atypical n at or above this when log(theta) = p/q > 1."""
    if p <= 0 or q <= 0:
        raise InputError("p and q must be positive")
    if Fraction(p, q) <= 1:
        raise InputError("the bound needs p/q > 1")
    return Fraction(p * p, 6 * q)


def verify_rational_bound(p: int, q: int, margin: int = 100, *, jobs: int = 1) -> dict:
    """Scan [1, ceil(bound) + margin] for theta = e^(p/q) and check the bound."""
    from .mtheta import ExpRational

    bound = rational_bound(p, q)
    theta = ExpRational(Fraction(p, q))
    N = math.ceil(bound) + margin
    rep = scan_direct(theta, N, jobs=jobs)
    violations = [n for n in rep.members if n >= bound]
    return {
        "p": p,
        "q": q,
        "bound": str(bound),
        "limit": N,
        "members": rep.members,
        "violations": violations,
        "complete": rep.complete,
        "passed": rep.complete and not violations,
    }


# ---------------------------------------------------------------------------
# continuants that must be atypical or good denominators


@dataclass
class ContinuantClass:
    classification: str  # Typical | InQ | Atypical
    k: int
    k0: int
    n: int
    lemma_applies: bool
    atypical: bool
    in_q: bool | None
    membership: MembershipResult | None = None
    lam: Ball | None = None

    def to_json(self) -> dict:
        return {
            "classification": self.classification,
            "k": self.k,
            "k0": self.k0,
            "n": str(self.n),
            "lemma_applies": self.lemma_applies,
            "atypical": self.atypical,
            "in_q": self.in_q,
            "membership": None if self.membership is None else self.membership.to_json(),
            "lambda": None if self.lam is None else self.lam.to_json(),
        }


def _delta_spec(theta, delta):
    if delta is None:
        return Affine(_LogValue(theta), Fraction(1, 2))
    d = Fraction(delta)
    if d <= 0 or not compare(_LogValue(theta), d, ">"):
        raise InputError("delta must satisfy 0 < delta < log(theta)")
    return Affine(d)


def k0_for(theta, delta=None, policy: RefinePolicy = DEFAULT_POLICY, _gcf=None) -> int:
    """Smallest k0 >= 3 with B_{2k-1}^2 > (log theta)^3/(60 delta) for every k >= k0."""
    dspec = _delta_spec(theta, delta)
    gcf = _gcf or _GrowingCF(RecipLogTheta(theta, 2), policy)
    lg = _LogValue(theta)
    k = 3
    while True:
        if not gcf.ensure(2 * k - 1):
            raise UndecidedError("continuants not certified far enough for k0", cap_bits=policy.cap)
        B = gcf.cf.B(2 * k - 1)
        # B^2 * 60 delta > log^3, using the continuants' growth in k
        for prec in policy.schedule():
            lb = lg.ball(prec)
            lhs = dspec.ball(prec) * (60 * B * B)
            r = ball_compare(lhs, lb * lb.sqr(), ">")
            if r is not None:
                break
        else:
            raise UndecidedError("k0 inequality undecided", cap_bits=policy.cap)
        if r:
            return k
        k += 1


def classify_continuant(
    theta, k: int, delta=None, *, policy: RefinePolicy = DEFAULT_POLICY
) -> ContinuantClass:
    """Classify B_{2k-1} (continuant of 2/log theta) as Typical, InQ or Atypical."""
    _check_log_range(theta, 6, "the continuant classifier", policy)
    gcf = _GrowingCF(RecipLogTheta(theta, 2), policy)
    k0 = k0_for(theta, delta, policy, gcf)
    if k < k0:
        raise PreconditionError(f"k = {k} is below k0 = {k0}", k=k, k0=k0)
    if not gcf.ensure(2 * k):
        raise UndecidedError(f"a_{2 * k} not certified", cap_bits=policy.cap)
    n = gcf.cf.B(2 * k - 1)
    dspec = _delta_spec(theta, delta)
    # 6/(log theta - delta)
    lg, ds = _LogValue(theta), dspec

    class _Thr:
        def exact(self):
            a, b = lg.exact(), ds.exact()
            if a is None or b is None:
                return None
            return 6 / (a - b)

        def ball(self, prec):
            return Ball(6, 6).div(lg.ball(prec + 4) - ds.ball(prec + 4), prec)

    applies, lam, _, _ = _lambda_exceeds(gcf, 2 * k, _Thr(), policy, strict=False)
    mem = is_atypical(theta, n, policy=policy)
    if applies:
        inq = q_set_membership(theta, n, policy).member
        if not (inq or mem.atypical):
            raise InternalDisagreement(
                f"B_{2 * k - 1} = {n} is neither atypical nor in Q_theta",
                theta=theta.canonical(), k=k, k0=k0, membership=mem.to_json(),
                lam=None if lam is None else lam.to_json(),
            )
        cls = "Atypical" if mem.atypical else "InQ"
        return ContinuantClass(cls, k, k0, n, True, mem.atypical, inq, mem, lam)
    cls = "Atypical" if mem.atypical else "Typical"
    return ContinuantClass(cls, k, k0, n, False, mem.atypical, None, mem, lam)


# ---------------------------------------------------------------------------
# replay


def replay_certificate(cert: AtypicalCertificate, policy: RefinePolicy = DEFAULT_POLICY) -> list[str]:
    """Recompute a certificate at its recorded precision; returns a list of mismatches."""
    theta = parse_theta(cert.theta)
    problems = []
    if cert.k is not None:
        x = RecipLogTheta(theta, 2)
        cf = _rebuild_cf(x, cert.cf_terms, policy)
        prec = cert.lambda_precision
        lam = lambda_k(cf, 2 * cert.k, prec)
        if cf.B(2 * cert.k - 1) * cert.c != cert.n:
            problems.append("n is not c * B_{2k-1}")
        thr = Affine(RecipLogTheta(theta, 1), 6 * cert.c * cert.c)
        thr_ex = thr.exact()
        tb = exact_ball(thr_ex, prec) if thr_ex is not None else thr.ball(prec)
        if lam.ball != cert.lam or tb != cert.threshold:
            problems.append("lambda or threshold ball differs")
        ok = compare(lam.exact, thr_ex, ">") if lam.exact is not None and thr_ex is not None else lam.ball.gt(tb)
        if not ok:
            problems.append("lambda does not exceed the threshold")
    if cert.membership is not None:
        m = cert.membership
        pol = policy if m.precision_bits < 2 else RefinePolicy.fixed(m.precision_bits)
        r = is_atypical(theta, cert.n, policy=pol)
        if r.atypical != cert.atypical or r.via != m.via:
            problems.append("membership decision differs")
        elif r.witnesses != m.witnesses:
            problems.append("membership witness balls differ")
    return problems


def replay_report(report: EnumerationReport, policy: RefinePolicy = DEFAULT_POLICY) -> list[str]:
    problems = []
    for cert in report.certificates:
        for p in replay_certificate(cert, policy):
            problems.append(f"n={cert.n}: {p}")
    members = sorted({c.n for c in report.certificates if c.atypical})
    if members != report.members:
        problems.append("member list does not match the certificates")
    return problems
