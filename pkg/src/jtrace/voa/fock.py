"""Graded Fock spaces of a rank-d Heisenberg algebra with an orthogonal basis.

A state is a finite combination of monomials a_{x1}(-n1) ... a_{xk}(-nk) e^alpha,
keyed by the sorted tuple ((x1, n1), ..., (xk, nk)) with all n >= 1.  The same
container is used for square-bracket states a[-n]; both mode families obey
[a(m), b(n)] = m <a, b> delta_{m+n,0}.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping, Sequence

from ..errors import InputError
from ..qseries import MultiSeries

Mono = tuple[tuple[int, int], ...]


class FockState:
    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Mono, object] | None = None):
        clean: dict[Mono, Fraction] = {}
        for k, c in (terms or {}).items():
            k = tuple(sorted(k))
            c = Fraction(c)
            if c:
                clean[k] = clean.get(k, Fraction(0)) + c
        self._terms = {k: v for k, v in clean.items() if v}

    @classmethod
    def vacuum(cls) -> "FockState":
        return cls({(): 1})

    @classmethod
    def monomial(cls, factors: Iterable[tuple[int, int]], c=1) -> "FockState":
        return cls({tuple(sorted(factors)): c})

    @property
    def terms(self) -> dict[Mono, Fraction]:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other: "FockState") -> "FockState":
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return FockState(out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "FockState":
        c = Fraction(c)
        return FockState({k: v * c for k, v in self._terms.items()})

    def __eq__(self, other):
        return isinstance(other, FockState) and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return "FockState(0)"
        parts = []
        for k, c in self.items():
            mono = " ".join(f"u{x}(-{n})" for x, n in k) or "1"
            parts.append(f"{c}*{mono}")
        return "FockState(" + " + ".join(parts) + ")"

    def grades(self) -> set[int]:
        return {sum(n for _, n in k) for k in self._terms}

    def max_grade(self) -> int:
        return max(self.grades(), default=0)


def apply_mode(state: FockState, gen: int, m: int, norms: Sequence[Fraction],
               zero_eigs: Sequence[Fraction] | None = None) -> FockState:
    """Action of a_gen(m) (or a_gen[m]) on a state; zero modes act by zero_eigs."""
    out: dict[Mono, Fraction] = {}
    if m < 0:
        for k, c in state._terms.items():
            key = tuple(sorted(k + ((gen, -m),)))
            out[key] = out.get(key, Fraction(0)) + c
    elif m == 0:
        e = Fraction(0) if zero_eigs is None else Fraction(zero_eigs[gen])
        if e:
            out = {k: c * e for k, c in state._terms.items()}
    else:
        b = norms[gen]
        for k, c in state._terms.items():
            cnt = k.count((gen, m))
            if not cnt:
                continue
            lst = list(k)
            lst.remove((gen, m))
            key = tuple(lst)
            out[key] = out.get(key, Fraction(0)) + c * m * b * cnt
    return FockState(out)


# power series helpers on lists of Fractions


def _ps_mul(a: list[Fraction], b: list[Fraction], n: int) -> list[Fraction]:
    out = [Fraction(0)] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[:n - i]):
                out[i + j] += x * y
    return out


def _ps_inv(a: list[Fraction], n: int) -> list[Fraction]:
    b = [Fraction(0)] * n
    b[0] = 1 / a[0]
    for k in range(1, n):
        b[k] = -sum(a[j] * b[k - j] for j in range(1, min(k, len(a) - 1) + 1)) / a[0]
    return b


def _ps_pow(a: list[Fraction], e: int, n: int) -> list[Fraction]:
    if e < 0:
        a = _ps_inv(a, n)
        e = -e
    out = [Fraction(1)] + [Fraction(0)] * (n - 1)
    for _ in range(e):
        out = _ps_mul(out, a, n)
    return out


@lru_cache(maxsize=None)
def bracket_coeff(n: int, m: int) -> Fraction:
    """Coefficient of a(m) in a[n]: [w^(m-n)] (w/(e^w - 1))^(m+1) e^w."""
    if m < n:
        return Fraction(0)
    order = m - n + 1
    # w/(e^w - 1) = 1 / (sum_{k>=0} w^k/(k+1)!)
    base = [Fraction(1, math.factorial(k + 1)) for k in range(order)]
    series = _ps_pow(base, -(m + 1), order)
    expw = [Fraction(1, math.factorial(k)) for k in range(order)]
    return _ps_mul(series, expw, order)[m - n]


def square_to_round_mode(state: FockState, gen: int, n: int, norms: Sequence[Fraction],
                         zero_eigs: Sequence[Fraction] | None = None) -> FockState:
    """Apply the square mode a_gen[n] to a round-bracket state."""
    top = state.max_grade()
    out = FockState()
    for m in range(n, top + 1):
        c = bracket_coeff(n, m)
        if c:
            out = out + apply_mode(state, gen, m, norms, zero_eigs).scale(c)
    return out


def bracket_convert(state: FockState, norms: Sequence[Fraction]) -> FockState:
    """Rewrite a square-bracket state of the vacuum module in round modes."""
    out = FockState()
    for key, c in state.items():
        cur = FockState.vacuum()
        for gen, n in reversed(key):
            cur = square_to_round_mode(cur, gen, -n, norms)
        out = out + cur.scale(c)
    return out


def graded_basis(d: int, g: int) -> list[Mono]:
    """Monomials of grade g in d colors."""
    items = [(x, n) for n in range(1, g + 1) for x in range(d)]
    out: list[Mono] = []

    def rec(start: int, remaining: int, acc: list):
        if remaining == 0:
            out.append(tuple(sorted(acc)))
            return
        for i in range(start, len(items)):
            if items[i][1] > remaining:
                break
            acc.append(items[i])
            rec(i, remaining - items[i][1], acc)
            acc.pop()

    rec(0, g, [])
    return sorted(out)


def _gbinom(top: int, k: int) -> Fraction:
    """binom(top, k) for any integer top and k >= 0."""
    num = 1
    for i in range(k):
        num *= top - i
    return Fraction(num, math.factorial(k))


def zero_mode_apply(v: Mono, basis_state: FockState, norms: Sequence[Fraction],
                    zero_eigs: Sequence[Fraction], g: int) -> FockState:
    """o(v) applied to a grade-g state, for a round monomial v.

    Y(a1(-n1)...ak(-nk)1, z) is the normal ordered product of the
    derivatives a_i^{(n_i - 1)}(z); the zero mode keeps sum m_i = 0.
    """
    k = len(v)
    if k == 0:
        return basis_state
    rng = range(-g, g + 1)
    out = FockState()
    for ms in product(rng, repeat=k):
        if sum(ms) != 0:
            continue
        coef = Fraction(1)
        for (x, n), m in zip(v, ms):
            coef *= _gbinom(-m - 1, n - 1)
            if not coef:
                break
        if not coef:
            continue
        cur = basis_state
        # annihilators first, then zero modes, then creators
        order = sorted(range(k), key=lambda i: -ms[i])
        for i in order:
            cur = apply_mode(cur, v[i][0], ms[i], norms, zero_eigs)
            if cur.is_zero():
                break
        else:
            out = out + cur.scale(coef)
    return out


def fock_trace(state: FockState, norms: Sequence[Fraction], alpha_pair: Sequence[Fraction],
               alpha_half_norm: Fraction, zeta_exps: tuple[int, ...], grade_cutoff: int) -> MultiSeries:
    """Brute-force tr o(state) zeta^(h(0)) q^(L(0) - d/24) through grade_cutoff."""
    if grade_cutoff > 12:
        raise InputError("grade_cutoff above 12 is not supported (combinatorial growth)")
    d = len(norms)
    coeffs: dict = {}
    for g in range(grade_cutoff + 1):
        tr = Fraction(0)
        for b in graded_basis(d, g):
            bs = FockState({b: 1})
            for v, c in state.items():
                tr += c * zero_mode_apply(v, bs, norms, alpha_pair, g).terms.get(b, Fraction(0))
        if tr:
            coeffs[(g, zeta_exps)] = tr
    return MultiSeries(len(zeta_exps), alpha_half_norm - Fraction(d, 24), coeffs, grade_cutoff + 1)


@lru_cache(maxsize=None)
def round_coeff(n: int, m: int) -> Fraction:
    """Coefficient of a[m] in a(n): [y^m] (e^y - 1)^n."""
    if m < n:
        return Fraction(0)
    order = m - n + 1
    base = [Fraction(1, math.factorial(k + 1)) for k in range(order)]
    return _ps_pow(base, n, order)[m - n]


def round_to_square(state: FockState, norms: Sequence[Fraction]) -> FockState:
    """Inverse of bracket_convert: rewrite a round-mode vacuum-module state in square modes."""
    out = FockState()
    for key, c in state.items():
        cur = FockState.vacuum()
        for gen, n in reversed(key):
            top = cur.max_grade()
            nxt = FockState()
            for m in range(-n, top + 1):
                cc = round_coeff(-n, m)
                if cc:
                    nxt = nxt + apply_mode(cur, gen, m, norms).scale(cc)
            cur = nxt
        out = out + cur.scale(c)
    return out


def _state_series_mul(A: list[FockState], B: list[FockState], n: int) -> list[FockState]:
    out = [FockState() for _ in range(n)]
    for i, a in enumerate(A[:n]):
        if a.is_zero():
            continue
        for j, b in enumerate(B[:n - i]):
            if b.is_zero():
                continue
            acc = {}
            for ka, ca in a.items():
                for kb, cb in b.items():
                    k = tuple(sorted(ka + kb))
                    acc[k] = acc.get(k, Fraction(0)) + ca * cb
            out[i + j] = out[i + j] + FockState(acc)
    return out


def charged_pair_products(coords: Sequence[Fraction], norms: Sequence[Fraction],
                          kmin: int) -> dict[int, FockState]:
    """Square-mode states e^beta[k] e^-beta for kmin <= k < <beta,beta>.

    beta = sum_x coords[x] u_x in the orthogonal generator basis.  Uses
    Y[e^b, w] e^-b = (e^w - 1)^-<b,b> e^(w <b,b>/2) exp(sum_n b(-n) (e^w - 1)^n / n) 1
    with the cocycle normalized to 1.
    """
    coords = [Fraction(c) for c in coords]
    B = sum(c * c * b for c, b in zip(coords, norms))
    if B.denominator != 1 or B <= 0:
        raise InputError("beta must be a nonzero lattice vector with integral norm")
    B = int(B)
    if kmin > B - 1:
        return {}
    n = B - kmin  # w-powers j = 0 .. B - kmin - 1 after removing w^-B
    X = [Fraction(0)] + [Fraction(1, math.factorial(k)) for k in range(1, n)]
    S = [FockState() for _ in range(n)]
    Xp = [Fraction(1)] + [Fraction(0)] * (n - 1)
    for m in range(1, n):
        Xp = _ps_mul(Xp, X, n)
        mode = FockState({((x, m),): c for x, c in enumerate(coords) if c})
        for j, c in enumerate(Xp):
            if c:
                S[j] = S[j] + mode.scale(c / m)
    expo = [FockState.vacuum()] + [FockState() for _ in range(n - 1)]
    power = list(expo)
    for k in range(1, n):
        power = _state_series_mul(power, S, n)
        expo = [e + p.scale(Fraction(1, math.factorial(k))) for e, p in zip(expo, power)]
    base = [Fraction(1, math.factorial(k + 1)) for k in range(n)]
    pre = _ps_mul(_ps_pow(base, -B, n), [Fraction(B, 2) ** k / math.factorial(k) for k in range(n)], n)
    series = [FockState() for _ in range(n)]
    for i, c in enumerate(pre):
        for j, s in enumerate(expo[:n - i]):
            series[i + j] = series[i + j] + s.scale(c)
    # coefficient of w^(-k-1) sits at j = B - k - 1
    return {k: round_to_square(series[B - k - 1], norms) for k in range(kmin, B)}


def fock_two_point(a: int, b: int, norms: Sequence[Fraction], alpha_pair: Sequence[Fraction],
                   alpha_half_norm: Fraction, zeta_exps: tuple[int, ...], tau: complex,
                   zs: Sequence[complex], x: complex, grade_cutoff: int = 8) -> complex:
    """Brute-force sum_n x^n tr u_a(n) u_b(-n) zeta^(h(0)) q^(L(0) - d/24) for |q| < |x| < 1.

    Modes beyond the grade of a basis state contribute n <u_a, u_b> x^n each;
    that tail is summed in closed form.
    """
    if not abs(cmath.exp(2j * cmath.pi * tau)) < abs(x) < 1:
        raise InputError("the double-insertion sum needs |q| < |x| < 1")
    if grade_cutoff > 12:
        raise InputError("grade_cutoff above 12 is not supported (combinatorial growth)")
    d = len(norms)
    ab = norms[a] if a == b else Fraction(0)
    q = cmath.exp(2j * cmath.pi * tau)
    zeta = cmath.exp(2j * cmath.pi * sum(e * z for e, z in zip(zeta_exps, zs)))
    total = 0j
    for g in range(grade_cutoff + 1):
        layer = 0j
        for key in graded_basis(d, g):
            bs = FockState({key: 1})
            for n in range(-g, g + 1):
                st = apply_mode(apply_mode(bs, b, -n, norms, alpha_pair), a, n, norms, alpha_pair)
                c = st.terms.get(key, Fraction(0))
                if c:
                    layer += float(c) * x ** n
            # n > g: u_b(-n) creates a mode that only u_a(n) removes again
            layer += float(ab) * x ** (g + 1) * ((g + 1) - g * x) / (1 - x) ** 2
        total += layer * q ** g
    return total * zeta * q ** float(alpha_half_norm - Fraction(d, 24))
