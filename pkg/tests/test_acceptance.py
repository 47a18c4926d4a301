"""Acceptance criteria 1-9. Each test prints one PASS/FAIL line.

Run ``python tests/test_acceptance.py`` for the summary alone, or
``pytest tests/test_acceptance.py -v`` to see it alongside the test results.
"""

import math
import random
import time
import warnings
from fractions import Fraction

import pytest

from fracroots.atypical import (
    check_typical_identity,
    enumerate_continuant,
    scan_direct,
    verify_rational_bound,
)
from fracroots.contfrac import cf_of, lambda_k
from fracroots.families import (
    build_infinite_family,
    build_empty_family,
    count_statistics,
    sample_thetas,
    verify_empty,
    verify_infinite,
)
from fracroots.mtheta import ExpQuadratic, RationalTheta, f_eval, m_prime
from fracroots.realnum import Rational, RecipLogTheta, quadratic
from test_contfrac import check_cf_engine, random_quadratic
from test_mtheta import f_sandwich_certified, frac_bound_identity

B35 = 777451915729368
E_SQRT2 = ExpQuadratic(quadratic(0, 1, 2))
SEED = 12345


def report(capsys, number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


# ---------------------------------------------------------------------------


def criterion_1():
    theta = RationalTheta(2)
    t0 = time.perf_counter()
    rep = enumerate_continuant(theta, 10**15)
    elapsed = time.perf_counter() - t0
    exceed = [row["k"] for row in rep.lambda_table if row["exceeds_6_over_log"]]
    cf = cf_of(RecipLogTheta(theta, 2), 40)
    lam2 = lambda_k(cf, 2, 128).ball
    six = RecipLogTheta(theta, 6).ball(128)
    bounds = (six.gt(Rational(Fraction(865, 100)).ball(128)) and lam2.gt(six)
              and lam2.lt(Rational(Fraction(873, 100)).ball(128)))
    ok = (rep.complete and rep.members == [1, B35] and [k for k in exceed if k <= 34] == [2]
          and bounds and elapsed < 10)
    return ok, f"A_2 to 1e15 = {rep.members}, even lambdas above 6/log 2: {exceed}, {elapsed:.2f}s"


def criterion_2():
    t0 = time.perf_counter()
    bad = check_typical_identity(E_SQRT2, range(-10**4, 10**4 + 1))
    rep = enumerate_continuant(E_SQRT2, 10**12)
    elapsed = time.perf_counter() - t0
    ok = not bad and rep.candidates_examined == 0 and not rep.members and elapsed < 120
    return ok, f"{len(bad)} exceptions on |n| <= 1e4, {rep.candidates_examined} candidates to 1e12, {elapsed:.1f}s"


def rational_pairs():
    rng = random.Random(SEED)
    pairs = [(3, 1), (10, 1), (7, 2), (50, 3)]
    while len(pairs) < 20:
        p = rng.randint(2, 50)
        q = rng.randint(1, p - 1)
        if math.gcd(p, q) == 1 and (p, q) not in pairs:
            pairs.append((p, q))
    return pairs


def criterion_3():
    t0 = time.perf_counter()
    failed = [(p, q) for p, q in rational_pairs() if not verify_rational_bound(p, q)["passed"]]
    elapsed = time.perf_counter() - t0
    return not failed and elapsed < 60, f"20 pairs, failures {failed}, {elapsed:.1f}s"


def criterion_4():
    t0 = time.perf_counter()
    failed = []
    for c in range(1, 11):
        if not verify_empty(build_empty_family(c=c), K=25, N=10**4).passed:
            failed.append(("empty", c))
        rep = verify_infinite(build_infinite_family(c=c), K=20)
        if not rep.passed or "18 certified atypical continuants" not in rep.notes:
            failed.append(("infinite", c))
    elapsed = time.perf_counter() - t0
    return not failed and elapsed < 300, f"c = 1..10 both families, failures {failed}, {elapsed:.1f}s"


_SCANS = {}


def criterion_5_scans():
    if not _SCANS:
        for theta in sample_thetas(20, SEED, "quadratic"):
            _SCANS[theta] = (enumerate_continuant(theta, 10**5), scan_direct(theta, 10**5))
    return _SCANS


def criterion_5():
    t0 = time.perf_counter()
    scans = criterion_5_scans()
    elapsed = time.perf_counter() - t0
    bad = [t.canonical() for t, (a, b) in scans.items()
           if not (a.complete and b.complete and a.members == b.members)]
    total = sum(len(b.members) for _, b in scans.values())
    return not bad and elapsed < 600, f"20 samples agree on [1, 1e5] ({total} members), mismatches {bad}, {elapsed:.1f}s"


def criterion_6():
    rng = random.Random(SEED)

    def rand_t(den=10**6):
        return Fraction(rng.randint(1, den - 1), den)

    sandwich = sum(not f_sandwich_certified(rand_t()) for _ in range(10**4))
    mono = 0
    for _ in range(10**3):
        t1, t2 = sorted((rand_t(), rand_t()))
        if t1 == t2:
            continue
        prec = 64
        while not f_eval(t1, prec).lt(f_eval(t2, prec)) and prec <= 4096:
            prec *= 2
        mono += prec > 4096
    triples = 0
    for _ in range(10**4):
        t = Fraction(rng.randint(-50000, 50000), rng.randint(1, 1000))
        a, b = sorted((rand_t(1000), rand_t(1000)))
        if a < b:
            triples += not frac_bound_identity(t, a, b)
    ok = sandwich == mono == triples == 0
    return ok, f"exceptions: sandwich {sandwich}/1e4, monotone {mono}/1e3, window identity {triples}/1e4"


def criterion_7():
    rng = random.Random(SEED)
    failures = {}
    for _ in range(100):
        q = random_quadratic(rng)
        bad = check_cf_engine(q, K=50)
        if bad:
            failures[str(q)] = bad
    return not failures, f"100 quadratics x 50 terms, {len(failures)} with failures"


def criterion_8a():
    dens = {t.canonical(): len(b.members) / 10**5 for t, (_, b) in criterion_5_scans().items()}
    worst = max(dens.values())
    return worst <= 0.01, f"max density on [1, 1e5] over 20 samples = {worst:.5f}"


def criterion_8b():
    tot_c, tot_e = 0, 0.0
    for theta in sample_thetas(50, SEED, "rational"):
        s = count_statistics(theta, 10**12)
        tot_c += s.count
        tot_e += s.expected
    ratio = tot_c / tot_e
    return 0.5 <= ratio <= 2.0, f"50 rational samples at 1e12: {tot_c}/{tot_e:.1f} = {ratio:.3f}"


def criterion_9():
    # m_prime only returns once the floor is certified, which rules out an integer value
    bad = [n for n in range(1, 1001) if m_prime(E_SQRT2, -n) != -m_prime(E_SQRT2, n) - 2]
    return not bad, f"M'(-n) = -M'(n) - 2 for n = 1..1000, exceptions {bad}"


# ---------------------------------------------------------------------------


@pytest.mark.parametrize("number,check", [
    (1, criterion_1),
    (2, criterion_2),
    (3, criterion_3),
    (4, criterion_4),
    (5, criterion_5),
    (6, criterion_6),
    (7, criterion_7),
    ("8a", criterion_8a),
    (9, criterion_9),
])
def test_criterion(capsys, number, check):
    ok, detail = check()
    assert report(capsys, number, ok, detail), detail


def test_criterion_8b_statistical(capsys):
    ok, detail = criterion_8b()
    report(capsys, "8b", ok, detail)
    if not ok:
        # a statistical smoke test; a miss is reported, not a failure
        warnings.warn(f"criterion 8b outside [0.5, 2]: {detail}")


if __name__ == "__main__":
    for number, check in [(1, criterion_1), (2, criterion_2), (3, criterion_3), (4, criterion_4),
                          (5, criterion_5), (6, criterion_6), (7, criterion_7), ("8a", criterion_8a),
                          ("8b", criterion_8b), (9, criterion_9)]:
        report(None, number, *check())
