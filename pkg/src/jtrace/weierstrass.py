"""Twisted Weierstrass functions Pt_k(w, z, tau).

Two independent routes:

* direct: the regrouped sum over l >= 1 (plus 1/(1 - zeta^-1) when k = 1),
  convergent for |q| < |e^w| < 1;
* series: (-1)^k / w^k + sum_{j=k}^{J} binom(j-1, k-1) Et_j(tau, x) w^(j-k).

With ``extended=True`` the direct route splits off sum_l l^(k-1) q_w^l as the
rational function Li_{1-k}(q_w), which continues the function to the annulus
|q| < |e^w| < 1/|q| (minus q_w = 1).
"""
from __future__ import annotations

import cmath
import math
import warnings
from functools import lru_cache

import numpy as np

from .eisenstein import _check_pole, is_untwisted, terms_needed, twisted_E, TwistSpec
from .errors import DomainError, InputError
from .qseries import DEFAULT_POLICY, SamplePoint, TruncationPolicy


@lru_cache(maxsize=None)
def eulerian_row(n: int) -> tuple[int, ...]:
    """Coefficients of the Eulerian polynomial A_n(x) (A_0 = 1)."""
    if n == 0:
        return (1,)
    return tuple(sum((-1) ** j * math.comb(n + 1, j) * (m + 1 - j) ** n for j in range(m + 1))
                 for m in range(n))


def polylog_neg(k: int, x: complex) -> complex:
    """Li_{1-k}(x) = sum_{l>=1} l^(k-1) x^l, continued as x A_{k-1}(x) / (1-x)^k."""
    poly = sum(c * x ** i for i, c in enumerate(eulerian_row(k - 1)))
    return x * poly / (1 - x) ** k


def _check_w(tau: complex, w: complex, extended: bool) -> None:
    lq = -2 * math.pi * tau.imag
    hi = -lq if extended else 0.0
    if not (lq < w.real < hi):
        where = "|q| < |e^w| < 1/|q|" if extended else "|q| < |e^w| < 1"
        raise DomainError(f"w = {w} is outside the annulus {where}")
    if abs(cmath.exp(w) - 1) < 1e-14:
        raise DomainError("e^w = 1 is a pole")


def twisted_P(k: int, w: complex, tau: complex, x: complex = 0.0, tol: float = 1e-17,
              extended: bool = False, max_terms: int = DEFAULT_POLICY.max_terms) -> complex:
    """Direct evaluation of Pt_k at a single elliptic variable x = z.mu."""
    if k < 1:
        raise InputError("k must be at least 1")
    tau, w, x = complex(tau), complex(w), complex(x)
    if tau.imag <= 0:
        raise DomainError("Im(tau) must be positive")
    _check_w(tau, w, extended)
    untwisted = is_untwisted(x)
    if untwisted:
        x = 0j
    else:
        _check_pole(tau, x)
    q = cmath.exp(2j * cmath.pi * tau)
    qw = cmath.exp(w)
    zeta = cmath.exp(2j * cmath.pi * x)
    rho = max(abs(zeta), 1 / abs(zeta))
    r = max(abs(q * qw), abs(q / qw)) if extended else max(abs(qw), abs(q / qw))
    l0 = 1
    if rho > 1:
        l0 = math.ceil(math.log(2 * rho) / -math.log(abs(q))) + 1
    scale = math.exp(-math.lgamma(k))
    L = max(l0, terms_needed(k - 1, r, tol, max_terms, extra=(2 + 4 * rho) * scale))
    ell = np.arange(1, L + 1, dtype=float)
    ql = np.exp(2j * np.pi * tau * ell)
    qwl = np.exp(w * ell)
    sign = -1.0 if k % 2 else 1.0
    second = sign * ql * zeta / (qwl * (1 - zeta * ql))
    if extended:
        first = qwl * ql / zeta / (1 - ql / zeta)
        head = polylog_neg(k, qw)
    else:
        first = qwl / (1 - ql / zeta)
        head = 0j
    weights = np.exp((k - 1) * np.log(ell) - math.lgamma(k))
    total = head * scale + complex(np.sum(weights * (first + second)))
    if k == 1 and not untwisted:
        total += 1 / (1 - 1 / zeta)
    return total


def twisted_P_direct(k: int, p: SamplePoint, twist: TwistSpec,
                     policy: TruncationPolicy = DEFAULT_POLICY, extended: bool = False) -> complex:
    if p.w is None:
        raise InputError("sample point has no w")
    return twisted_P(k, p.w, p.tau, twist.pair(p.zs), policy.tail_tol, extended, policy.max_terms)


def twisted_P_expansion(k: int, w: complex, tau: complex, x: complex, J: int,
                        tol: float = 1e-17) -> complex:
    if k < 1:
        raise InputError("k must be at least 1")
    if J < k:
        raise InputError(f"truncation J={J} leaves no terms (need J >= k={k})")
    w = complex(w)
    if w == 0:
        raise DomainError("w = 0 is the pole")
    if abs(w) >= math.pi:
        raise DomainError(f"|w| = {abs(w):.3g} exceeds the radius guard pi")
    total = (-1) ** k / w ** k
    last = 0j
    for j in range(k, J + 1):
        last = math.comb(j - 1, k - 1) * twisted_E(j, tau, x, tol) * w ** (j - k)
        total += last
    if abs(last) > 1e-12 * max(1.0, abs(total)):
        warnings.warn(f"last retained term {abs(last):.2e} is not negligible; increase J",
                      RuntimeWarning, stacklevel=2)
    return total


def twisted_P_series(k: int, p: SamplePoint, twist: TwistSpec, J: int,
                     policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    if p.w is None:
        raise InputError("sample point has no w")
    return twisted_P_expansion(k, p.w, p.tau, twist.pair(p.zs), J, policy.tail_tol)
