"""Classical and twisted Eisenstein series.

Normalization: everything is divided by (2 pi i)^k, so that

    E_k(tau)      = -B_k/k! + 2/(k-1)! * sum_n sigma_{k-1}(n) q^n       (k even)
    Et_m(tau, x)  = c_m + 1/(m-1)! * sum_{l>=1} l^(m-1) [X/(1-X) + (-1)^m Y/(1-Y)]

with X = q^l zeta^-1, Y = q^l zeta, zeta = e^(2 pi i x), c_m = -B_m/m! for
even m and 0 for odd m.  For m = 1 the bracket is X/(1-X) - Y/(1-Y) and the
constant is 1/(1 - zeta^-1) - 1/2.  When x is an integer (the untwisted
case) the l = 0 contribution is dropped, giving Et_1 = -1/2 and Et_m = E_m.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np

from .errors import DomainError, InputError
from .qseries import DEFAULT_POLICY, MultiSeries, SamplePoint, TruncationPolicy

UNTWISTED_TOL = 1e-12


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n with B_1 = -1/2."""
    if n < 0:
        raise InputError("Bernoulli index must be nonnegative")
    if n == 0:
        return Fraction(1)
    # sum_{k=0}^{n} binom(n+1, k) B_k = 0
    s = sum(math.comb(n + 1, k) * bernoulli(k) for k in range(n))
    return -s / (n + 1)


def eisenstein_const(k: int) -> Fraction:
    """Constant term 2 zeta(k)/(2 pi i)^k = -B_k/k! of E_k."""
    if k < 2 or k % 2:
        raise InputError(f"eisenstein_const needs an even k >= 2, got {k}")
    return -bernoulli(k) / math.factorial(k)


def divisor_sigma(power: int, n: int) -> int:
    s = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            s += d ** power
            e = n // d
            if e != d:
                s += e ** power
        d += 1
    return s


def classical_E(k: int, N: int) -> MultiSeries:
    if k < 2 or k % 2:
        raise InputError(f"classical_E needs an even k >= 2, got {k}")
    if N < 1:
        raise InputError("N must be at least 1")
    scale = Fraction(2, math.factorial(k - 1))
    vals = [eisenstein_const(k)] + [scale * divisor_sigma(k - 1, n) for n in range(1, N)]
    return MultiSeries.from_q_list(vals[:N])


@dataclass(frozen=True)
class TwistSpec:
    mu: tuple[int, ...] = ()

    def __post_init__(self):
        mu = tuple(self.mu)
        for x in mu:
            if isinstance(x, bool) or int(x) != x:
                raise InputError(f"twist entries must be integers, got {x!r}")
        object.__setattr__(self, "mu", tuple(int(x) for x in mu))

    def pair(self, zs: Iterable[complex]) -> complex:
        zs = tuple(zs)
        if len(zs) != len(self.mu):
            raise InputError(f"twist has length {len(self.mu)} but point has {len(zs)} z's")
        return complex(sum(m * z for m, z in zip(self.mu, zs)))

    @property
    def trivial(self) -> bool:
        return not any(self.mu)


def is_untwisted(x: complex, tol: float = UNTWISTED_TOL) -> bool:
    return abs(x.imag) < tol and abs(x.real - round(x.real)) < tol


def _check_pole(tau: complex, x: complex) -> None:
    # x in Z + Z tau with a nonzero tau-part makes some q^l zeta^{+-1} equal to 1
    b = x.imag / tau.imag
    nb = round(b)
    if nb != 0 and abs(b - nb) < 1e-12:
        a = x - nb * tau
        if abs(a.real - round(a.real)) < 1e-12:
            raise DomainError(f"x = {x} lies in Z + Z tau: pole of the twisted series")


def power_tail_bound(p: int, r: float, L: int) -> float:
    """Upper bound for sum_{l >= L} l^p r^l (0 <= r < 1), or inf if not yet geometric."""
    if r <= 0:
        return 0.0
    ratio = r * (1 + 1 / L) ** p
    if ratio >= 1:
        return math.inf
    return math.exp(p * math.log(L) + L * math.log(r)) / (1 - ratio)


def terms_needed(p: int, r: float, tol: float, max_terms: int, extra: float = 1.0) -> int:
    """Smallest L with extra * sum_{l>=L} l^p r^l < tol."""
    if r >= 1:
        raise DomainError("geometric ratio is not below 1")
    L = 1
    while extra * power_tail_bound(p, r, L) >= tol:
        L = L + 1 if L < 64 else int(L * 1.25)
        if L > max_terms:
            raise DomainError(f"series needs more than {max_terms} terms")
    return L


def classical_E_eval(k: int, tau: complex, tol: float = 1e-16) -> complex:
    """Numerical E_k via the Lambert series sum l^(k-1) q^l/(1-q^l)."""
    return twisted_E(k, tau, 0.0, tol)


def twisted_E(m: int, tau: complex, x: complex, tol: float = 1e-17,
              max_terms: int = DEFAULT_POLICY.max_terms) -> complex:
    """Et_m(tau, x) for a single elliptic variable x."""
    tau, x = complex(tau), complex(x)
    if m < 0:
        raise InputError("m must be nonnegative")
    if tau.imag <= 0:
        raise DomainError("Im(tau) must be positive")
    if m == 0:
        return 1.0 + 0j
    untwisted = is_untwisted(x)
    if untwisted:
        if m == 1:
            return -0.5 + 0j
        if m % 2:
            return 0j
        x = 0j
    else:
        _check_pole(tau, x)
    q = cmath.exp(2j * cmath.pi * tau)
    zeta = cmath.exp(2j * cmath.pi * x)
    r = abs(q)
    rho = max(abs(zeta), 1 / abs(zeta))
    # once |q|^l rho < 1/2 each bracket is at most 4 |q|^l rho
    l0 = max(1, math.ceil(math.log(2 * rho) / -math.log(r)) + 1) if rho > 1 else 1
    scale = math.exp(-math.lgamma(m))
    L = max(l0, terms_needed(m - 1, r, tol, max_terms, extra=4 * rho * scale))
    ell = np.arange(1, L + 1, dtype=float)
    ql = np.exp(2j * np.pi * tau * ell)
    X = ql / zeta
    Y = ql * zeta
    sign = 1 if m % 2 == 0 else -1
    bracket = X / (1 - X) + sign * Y / (1 - Y)
    weights = np.exp((m - 1) * np.log(ell) - math.lgamma(m))
    s = complex(np.sum(weights * bracket))
    if m == 1:
        return s + (0.5 if untwisted else 1 / (1 - 1 / zeta) - 0.5)
    const = float(eisenstein_const(m)) if m % 2 == 0 else 0.0
    return const + s


def twisted_E_eval(m: int, p: SamplePoint, twist: TwistSpec,
                   policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    x = twist.pair(p.zs)
    return twisted_E(m, p.tau, x, policy.tail_tol, policy.max_terms)


def twisted_E_qexp(m: int, twist: TwistSpec, N: int) -> MultiSeries:
    """Formal expansion of Et_m(tau, z.mu) for m >= 2."""
    if m < 2:
        raise InputError("formal expansion needs m >= 2 (Et_1 has a rational zeta term)")
    if N < 1:
        raise InputError("N must be at least 1")
    mu = twist.mu
    rank = len(mu)
    coeffs: dict = {}
    zero = (0,) * rank
    if m % 2 == 0:
        coeffs[(0, zero)] = eisenstein_const(m)
    fact = math.factorial(m - 1)
    sign = 1 if m % 2 == 0 else -1
    for ell in range(1, N):
        w = Fraction(ell ** (m - 1), fact)
        for j in range(1, (N - 1) // ell + 1):
            n = ell * j
            neg = tuple(-j * u for u in mu)
            pos = tuple(j * u for u in mu)
            coeffs[(n, neg)] = coeffs.get((n, neg), Fraction(0)) + w
            coeffs[(n, pos)] = coeffs.get((n, pos), Fraction(0)) + sign * w
    return MultiSeries(rank, 0, coeffs, N)
