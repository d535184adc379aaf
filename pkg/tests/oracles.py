"""Independent reference computations used to derive and freeze test values.

Nothing here imports jtrace; each oracle uses a different algorithm or
summation order from the library code it checks.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import mpmath

mpmath.mp.dps = 40


def bernoulli_at(n: int) -> Fraction:
    """Akiyama-Tanigawa; returns B_n with B_1 = -1/2."""
    a = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    return -a[0] if n == 1 else a[0]


def sigma(k: int, n: int) -> int:
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


def colored_partitions(d: int, N: int) -> list[int]:
    """Coefficients of prod (1 - q^n)^-d by repeated geometric-series multiplication."""
    out = [1] + [0] * (N - 1)
    for n in range(1, N):
        for _ in range(d):
            for i in range(n, N):
                out[i] += out[i - n]
    return out


def eta_product(tau: complex, terms: int = 400) -> complex:
    q = mpmath.exp(2j * mpmath.pi * tau)
    val = mpmath.exp(2j * mpmath.pi * tau / 24)
    for n in range(1, terms):
        val *= 1 - q ** n
    return complex(val)


def c_closed(ell: int, i: int) -> Fraction:
    return Fraction(math.factorial(ell), math.factorial(i) * math.factorial(ell - 2 * i) * 2 ** i)


def twisted_E_mp(m: int, tau: complex, x: complex, nmax: int = 400) -> complex:
    """Divisor-sum form: c_m + sum_n q^n sum_{d|n} d^(m-1) (zeta^(-n/d) + (-1)^m zeta^(n/d)) / (m-1)!.

    Needs |q| < |zeta| < 1/|q|.  x = 0 gives the untwisted value.
    """
    tau, x = mpmath.mpc(tau), mpmath.mpc(x)
    q = mpmath.exp(2j * mpmath.pi * tau)
    zeta = mpmath.exp(2j * mpmath.pi * x)
    untwisted = x == 0
    if m == 0:
        return 1.0
    total = mpmath.mpf(0)
    for n in range(1, nmax):
        s = 0
        for d in range(1, n + 1):
            if n % d == 0:
                j = n // d
                s += mpmath.mpf(d) ** (m - 1) * (zeta ** (-j) + (-1) ** m * zeta ** j)
        total += q ** n * s
    total /= math.factorial(m - 1)
    if m % 2 == 0:
        total += -mpmath.bernoulli(m) / math.factorial(m)
    if m == 1:
        total += -0.5 if untwisted else 1 / (1 - 1 / zeta) - 0.5
    return complex(total)


def twisted_P_mp(k: int, w: complex, tau: complex, x: complex, jmax: int = 200) -> complex:
    """Sum over j of zeta^-+j Li_{1-k}(q_w q^j), resp. Li_{1-k}(q^j / q_w), via mpmath.polylog."""
    tau, x, w = mpmath.mpc(tau), mpmath.mpc(x), mpmath.mpc(w)
    q = mpmath.exp(2j * mpmath.pi * tau)
    zeta = mpmath.exp(2j * mpmath.pi * x)
    qw = mpmath.exp(w)
    total = mpmath.mpf(0)
    for j in range(0, jmax):
        total += zeta ** (-j) * mpmath.polylog(1 - k, qw * q ** j)
        if j:
            total += (-1) ** k * zeta ** j * mpmath.polylog(1 - k, q ** j / qw)
    total /= math.factorial(k - 1)
    if k == 1 and x != 0:
        total += 1 / (1 - 1 / zeta)
    return complex(total)


def E2_mp(tau: complex, nmax: int = 2000) -> complex:
    q = mpmath.exp(2j * mpmath.pi * mpmath.mpc(tau))
    return complex(mpmath.mpf(-1) / 12 + 2 * mpmath.nsum(lambda n: sigma(1, int(n)) * q ** n, [1, nmax]))


def box_vectors(gram, gamma, radius: int):
    """All alpha = n + gamma with integer n in a box; brute force."""
    d = len(gram)
    for n in itertools.product(range(-radius, radius + 1), repeat=d):
        a = [Fraction(c) + Fraction(g) for c, g in zip(n, gamma)]
        yield a


def inner(gram, a, b) -> Fraction:
    return sum(Fraction(gram[i][j]) * a[i] * b[j] for i in range(len(a)) for j in range(len(b)))


def theta_box(gram, gamma, hs, N: int, radius: int = 8, weight=lambda a: 1) -> dict:
    """{(2*half-norm, zeta exps): coefficient} for half-norm < N, by box enumeration."""
    out: dict = {}
    for a in box_vectors(gram, gamma, radius):
        hn = inner(gram, a, a) / 2
        if hn >= N:
            continue
        key = (hn, tuple(int(inner(gram, a, h)) for h in hs))
        out[key] = out.get(key, 0) + weight(a)
    return {k: v for k, v in out.items() if v}
