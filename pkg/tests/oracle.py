"""Independent mpmath reference computations; frozen values in the tests come from here.

Run ``python3 tests/oracle.py`` to print them again.
"""

import mpmath as mp

REF_BITS = 600


def mpf_of(frac):
    with mp.workprec(REF_BITS):
        return mp.mpf(frac.numerator) / frac.denominator


def ball_contains(ball, value) -> bool:
    """Whether a reference value (computed at REF_BITS) lies inside the ball."""
    with mp.workprec(REF_BITS):
        return mpf_of(ball.lo) <= value <= mpf_of(ball.hi)


def cf_terms(x, K):
    out = []
    for _ in range(K + 1):
        a = int(mp.floor(x))
        out.append(a)
        x = 1 / (x - a)
    return out


def continuants(a):
    B = [1, a[1]]
    for t in a[2:]:
        B.append(t * B[-1] + B[-2])
    return B


def lam(a, k):
    """[0; a_{k-1}, ..., a_1] + [a_k; a_{k+1}, ...] from a long enough prefix."""
    head = mp.mpf(0)
    for t in a[1:k]:
        head = 1 / (t + head)
    tail = mp.mpf(a[-1])
    for t in reversed(a[k:-1]):
        tail = t + 1 / tail
    return head + tail


def atypical_set(log_theta, N):
    """n in [1, N] where floor(1/(theta^(1/n) - 1)) != floor(n/log theta - 1/2)."""
    out = []
    for n in range(1, N + 1):
        mp_val = 1 / mp.expm1(log_theta / n)
        if int(mp.floor(mp_val)) != int(mp.floor(n / log_theta - mp.mpf(1) / 2)):
            out.append(n)
    return out


def f(t):
    return 1 / mp.expm1(t) - 1 / t + mp.mpf(1) / 2


def main():
    mp.mp.dps = 60
    x = 2 / mp.log(2)
    a = cf_terms(x, 60)
    print("2/log2 terms", a[:40])
    print("B35", continuants(a)[35])
    print("lambda_2", mp.nstr(lam(a, 2), 20))
    print("lambda_36", mp.nstr(lam(a, 36), 20))
    print("6/log2", mp.nstr(6 / mp.log(2), 20))
    print("log2", mp.nstr(mp.log(2), 25))
    print("e", mp.nstr(mp.e, 25))
    print("e^sqrt2", mp.nstr(mp.exp(mp.sqrt(2)), 25))
    print("f(1)", mp.nstr(f(1), 25))
    print("f(1/2)", mp.nstr(f(mp.mpf(1) / 2), 25))
    print("1/log2-1/2", mp.nstr(1 / mp.log(2) - mp.mpf(1) / 2, 20))
    print("1/(e^(sqrt2/3)-1)", mp.nstr(1 / mp.expm1(mp.sqrt(2) / 3), 20))
    print("1/frac(e^3)", mp.nstr(1 / (mp.e**3 - mp.floor(mp.e**3)), 20))
    mp.mp.dps = 40
    for name, lg, N in [
        ("theta=2", mp.log(2), 3000),
        ("theta=3", mp.log(3), 3000),
        ("theta=10", mp.log(10), 3000),
        ("theta=5/2", mp.log(mp.mpf(5) / 2), 3000),
        ("theta=17/4", mp.log(mp.mpf(17) / 4), 3000),
        ("theta=e^3", mp.mpf(3), 1000),
        ("theta=e^sqrt2", mp.sqrt(2), 3000),
        ("theta=e^(2sqrt5)", 2 * mp.sqrt(5), 2000),
        ("theta=e^(sqrt5-1)", mp.sqrt(5) - 1, 3000),
    ]:
        print(name, atypical_set(lg, N))


if __name__ == "__main__":
    main()
