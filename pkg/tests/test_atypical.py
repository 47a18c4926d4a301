import json
import random
from fractions import Fraction

import pytest

from fracroots.atypical import (
    EnumerationReport,
    check_typical_identity,
    classify_continuant,
    enumerate_both,
    enumerate_continuant,
    k0_for,
    q_by_continuants,
    q_by_witness,
    q_set_membership,
    rational_bound,
    replay_report,
    scan_direct,
    verify_rational_bound,
)
from fracroots.contfrac import cf_of, lambda_k
from fracroots.errors import InputError, PreconditionError, UnsupportedRange
from fracroots.mtheta import ExpQuadratic, ExpRational, RationalTheta, parse_theta
from fracroots.realnum import RecipLogTheta, quadratic

B35 = 777451915729368
E_SQRT2 = ExpQuadratic(quadratic(0, 1, 2))
E_2SQRT5 = ExpQuadratic(quadratic(0, 2, 5))

# atypical sets frozen from tests/oracle.py (mpmath, 40 digits)
REFERENCE_SETS = [
    ("rational:2", 3000, [1]),
    ("rational:3", 3000, [39, 752]),
    ("rational:10", 3000, [1, 312]),
    ("rational:5/2", 3000, [914, 2742]),
    ("rational:17/4", 3000, [34]),
    ("exp-rational:3", 1000, [1]),
    ("exp-quadratic:(0+1*sqrt(2))/1", 3000, []),
    ("exp-quadratic:(0+2*sqrt(5))/1", 2000, [1, 2, 38, 682]),
    ("exp-quadratic:(-1+1*sqrt(5))/1", 3000, []),
]


# ---------------------------------------------------------------------------
# direct scan


def test_scan_examples():
    assert scan_direct(RationalTheta(2), 100).members == [1]
    assert scan_direct(E_SQRT2, 1000).members == []
    assert scan_direct(ExpRational(3), 10).members == [1]


@pytest.mark.parametrize("text,N,want", REFERENCE_SETS)
def test_scan_matches_reference(text, N, want):
    rep = scan_direct(parse_theta(text), N)
    assert rep.complete and rep.members == want


def test_scan_with_workers_matches_serial():
    theta = RationalTheta(3)
    assert scan_direct(theta, 20000, jobs=2).members == scan_direct(theta, 20000).members


def test_scan_rejects_bad_limit():
    with pytest.raises(InputError):
        scan_direct(RationalTheta(2), 0)


def test_typical_identity_root2():
    assert check_typical_identity(E_SQRT2, [n for n in range(-500, 501) if n]) == []


# ---------------------------------------------------------------------------
# continuant enumerator


def test_enumerate_theta_two_to_1e15():
    rep = enumerate_continuant(RationalTheta(2), 10**15)
    assert rep.complete and rep.members == [1, B35]
    exceed = [row["k"] for row in rep.lambda_table if row["exceeds_6_over_log"]]
    assert exceed == [2, 36]
    assert max(int(row["B"]) for row in rep.lambda_table) == B35


def test_enumerate_root2_has_no_candidates():
    rep = enumerate_continuant(E_SQRT2, 10**12)
    assert rep.candidates_examined == 0 and rep.members == []


@pytest.mark.parametrize("text,N,want", [r for r in REFERENCE_SETS if not r[0].startswith("exp-rational")
                                         and "2*sqrt(5)" not in r[0]])
def test_enumerate_matches_reference(text, N, want):
    rep = enumerate_continuant(parse_theta(text), N)
    assert rep.complete and rep.members == want


def test_enumerate_both_agree():
    rep = enumerate_both(RationalTheta(Fraction(5, 2)), 5000)
    assert rep.method == "both" and rep.members == [914, 2742]


def test_enumerate_rejects_out_of_range_theta():
    with pytest.raises(InputError):
        enumerate_continuant(ExpRational(2), 100)  # rational log
    with pytest.raises(UnsupportedRange):
        enumerate_continuant(E_2SQRT5, 100)  # theta > e^3
    with pytest.raises(InputError):
        enumerate_continuant(RationalTheta(2), 0)


def test_members_decompose_as_multiples_of_odd_continuants():
    for text in ("rational:3", "rational:10", "rational:5/2"):
        theta = parse_theta(text)
        members = scan_direct(theta, 3000).members
        cf = cf_of(RecipLogTheta(theta, 2), 30)
        for n in members:
            hits = []
            for k in range(1, 14):
                B = cf.B(2 * k - 1)
                if n % B == 0:
                    c = n // B
                    if lambda_k(cf, 2 * k, 64).ball.gt(RecipLogTheta(theta, 6 * c * c).ball(80)):
                        hits.append((c, k))
            assert hits, (text, n)


def test_report_json_round_trip_and_replay():
    rep = enumerate_continuant(RationalTheta(3), 10**6)
    doc = json.loads(json.dumps(rep.to_json()))
    back = EnumerationReport.from_json(doc)
    assert back.members == rep.members == [39, 752]
    assert replay_report(back) == []


def test_tampered_report_fails_replay():
    rep = enumerate_continuant(RationalTheta(3), 10**6)
    doc = rep.to_json()
    doc["certificates"][0]["n"] = str(int(doc["certificates"][0]["n"]) + 1)
    assert replay_report(EnumerationReport.from_json(doc))


# ---------------------------------------------------------------------------
# good denominators


def test_q_membership_routes_agree():
    members = []
    for n in range(1, 2000):
        r = q_set_membership(E_2SQRT5, n)
        if r.member:
            members.append(n)
    assert members == [4, 76, 1364]


def test_q_witness_window():
    # {n/log theta} <= 1/2 leaves m - n/log theta >= 1/2 > 1/(2n)
    theta = RationalTheta(2)
    assert not q_by_witness(theta, 1).member  # {1/log 2} = 0.44
    r = q_by_continuants(E_2SQRT5, 76)
    assert r.member and r.c == 1


def test_q_rejects_rational_log():
    with pytest.raises(InputError):
        q_set_membership(ExpRational(3), 5)


# ---------------------------------------------------------------------------
# rational log bound


def test_rational_bound_values():
    assert rational_bound(3, 1) == Fraction(3, 2)
    assert rational_bound(10, 1) == Fraction(50, 3)
    with pytest.raises(InputError):
        rational_bound(2, 3)
    with pytest.raises(InputError):
        rational_bound(1, 1)


@pytest.mark.parametrize("p,q,members", [(3, 1, [1]), (10, 1, [1, 2, 3, 4]), (2, 1, [])])
def test_verify_rational_bound(p, q, members):
    out = verify_rational_bound(p, q)
    assert out["passed"] and out["members"] == members


# ---------------------------------------------------------------------------
# continuant classifier


def test_classifier_on_infinite_family_instance():
    assert k0_for(E_2SQRT5, 2) == 3
    for k in range(3, 21):
        r = classify_continuant(E_2SQRT5, k, 2)
        assert r.classification == "Atypical" and r.lemma_applies and r.in_q is False


def test_classifier_gate_names_k0():
    # 2/log theta = (3 - sqrt 5)/2 has golden-ratio continuants, so k0 is large
    theta = ExpQuadratic(quadratic(3, 1, 5))
    k0 = k0_for(theta, Fraction(1, 10**6))
    assert k0 > 3
    with pytest.raises(PreconditionError) as info:
        classify_continuant(theta, 3, Fraction(1, 10**6))
    assert info.value.details["k0"] == k0


def test_classifier_typical_when_lemma_does_not_apply():
    r = classify_continuant(E_SQRT2, 5)
    assert not r.lemma_applies and r.classification == "Typical"


def test_classifier_rejects_large_theta_and_bad_delta():
    with pytest.raises(UnsupportedRange):
        classify_continuant(ExpQuadratic(quadratic(4, 1, 5)), 3)
    with pytest.raises(InputError):
        classify_continuant(E_2SQRT5, 3, 10)


def test_density_small_on_random_rationals():
    rng = random.Random(1)
    for _ in range(5):
        v = rng.randint(1, 30)
        theta = RationalTheta(Fraction(rng.randint(v + 1, 20 * v), v))
        assert len(scan_direct(theta, 20000).members) <= 200
