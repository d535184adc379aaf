"""Heisenberg modules M_H(alpha) and closed-form 1-point functions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from ..eisenstein import classical_E
from ..errors import ConditionHError, InputError
from ..qseries import MultiSeries, as_fraction, eta_inverse_pow, with_rank
from .fock import FockState, bracket_convert, fock_trace


@lru_cache(maxsize=None)
def c_coeff(ell: int, i: int) -> Fraction:
    """c_{l, l-2i}: coefficient of <a,alpha>^(l-2i) (<a,a> E_2)^i in the trace of a[-1]^l."""
    if ell < 0 or i < 0 or 2 * i > ell:
        raise InputError(f"c_coeff index out of range: l={ell}, i={i}")
    if ell <= 1:
        return Fraction(1) if i == 0 else Fraction(0)
    # c_{l,l-2i} = c_{l-1,l-1-2i} + (l-1) c_{l-2,l-2i}
    a = c_coeff(ell - 1, i) if 2 * i <= ell - 1 else Fraction(0)
    b = c_coeff(ell - 2, i - 1) if i >= 1 else Fraction(0)
    return a + (ell - 1) * b


def c_coeff_closed(ell: int, i: int) -> Fraction:
    return Fraction(math.factorial(ell), math.factorial(i) * math.factorial(ell - 2 * i) * 2 ** i)


@dataclass(frozen=True)
class SquareMonomial:
    """v = prod u_x[-m]^l applied to a tail (the vacuum, or a named commutant state)."""
    factors: tuple[tuple[int, int, int], ...] = ()
    tail: str = "vacuum"

    def __post_init__(self):
        fs = []
        for f in self.factors:
            if len(f) != 3:
                raise InputError(f"factor {f} must be (gen, mode, power)")
            gen, mode, power = (int(x) for x in f)
            if gen < 0:
                raise InputError(f"generator index {gen} is negative")
            if mode < 1:
                raise InputError(f"mode {mode} must be at least 1")
            if power < 0:
                raise InputError(f"power {power} must be nonnegative")
            if power:
                fs.append((gen, mode, power))
        object.__setattr__(self, "factors", tuple(sorted(fs)))

    @classmethod
    def vacuum(cls) -> "SquareMonomial":
        return cls(())

    @property
    def weight(self) -> int:
        return sum(m * p for _, m, p in self.factors)

    def check_rank(self, d: int) -> None:
        for g, _, _ in self.factors:
            if g >= d:
                raise InputError(f"generator index {g} is out of range for rank {d}")

    def all_modes_one(self) -> bool:
        return all(m == 1 for _, m, _ in self.factors)

    def exponents(self, d: int) -> tuple[int, ...]:
        """Powers l_x of u_x[-1] (requires all modes equal to 1)."""
        if not self.all_modes_one():
            raise InputError("monomial has modes other than 1; reduce it first")
        self.check_rank(d)
        out = [0] * d
        for g, _, p in self.factors:
            out[g] += p
        return tuple(out)

    def to_state(self) -> FockState:
        key = []
        for g, m, p in self.factors:
            key.extend([(g, m)] * p)
        return FockState.monomial(key)

    def to_dict(self) -> dict:
        return {"factors": [list(f) for f in self.factors], "tail": self.tail}

    @classmethod
    def from_dict(cls, d) -> "SquareMonomial":
        return cls(tuple(tuple(f) for f in d.get("factors", [])), d.get("tail", "vacuum"))


@dataclass(frozen=True)
class HeisenbergModule:
    """M_H(alpha) for an orthogonal basis u_x with <u_x, u_x> = norms[x]; alpha in u-coordinates."""
    norms: tuple[Fraction, ...]
    alpha: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        norms = tuple(as_fraction(b) for b in self.norms)
        if any(b <= 0 for b in norms):
            raise InputError("generator norms must be positive")
        alpha = tuple(as_fraction(a) for a in (self.alpha or (0,) * len(norms)))
        if len(alpha) != len(norms):
            raise InputError("alpha has the wrong length")
        object.__setattr__(self, "norms", norms)
        object.__setattr__(self, "alpha", alpha)

    @property
    def rank(self) -> int:
        return len(self.norms)

    @property
    def central_charge(self) -> int:
        return self.rank

    def inner(self, a: Sequence, b: Sequence) -> Fraction:
        return sum((self.norms[i] * as_fraction(a[i]) * as_fraction(b[i]) for i in range(self.rank)),
                   Fraction(0))

    def alpha_pairings(self) -> tuple[Fraction, ...]:
        """<u_x, alpha> for each generator."""
        return tuple(b * a for b, a in zip(self.norms, self.alpha))

    def half_norm(self) -> Fraction:
        return self.inner(self.alpha, self.alpha) / 2

    def zeta_exponents(self, hs) -> tuple[int, ...]:
        hs = getattr(hs, "vectors", hs)
        out = []
        for j, h in enumerate(hs):
            if len(h) != self.rank:
                raise InputError(f"h-vector {j} has the wrong length")
            e = self.inner(self.alpha, h)
            if e.denominator != 1:
                raise ConditionHError(f"Condition H violation: <alpha, h_{j}> = {e} is not an integer")
            out.append(int(e))
        return tuple(out)

    def partition_series(self, hs: Sequence[Sequence], N: int) -> MultiSeries:
        """J(1) = eta^-d q^(<alpha,alpha>/2) zeta^(<alpha,h>)."""
        ex = self.zeta_exponents(hs)
        return with_rank(eta_inverse_pow(self.rank, N), len(ex)).shift(self.half_norm(), ex)

    def closed_form(self, exponents: Sequence[int], zero_modes: Sequence[int], hs, N: int,
                    tail: str = "vacuum") -> MultiSeries:
        """Trace of o(prod u_x[-1]^l_x 1) times the zero modes of the listed generators."""
        if tail != "vacuum":
            raise InputError("Heisenberg modules only support the vacuum tail")
        pair = self.alpha_pairings()
        scalar = Fraction(1)
        for x in zero_modes:
            scalar *= pair[x]
        out = with_rank(MultiSeries.constant(scalar, 0, N), len(hs))
        for x, ell in enumerate(exponents):
            if ell:
                out = out * with_rank(f_series(self.norms[x], pair[x], ell, N), len(hs))
        return out * self.partition_series(hs, N)


def f_series(norm, pairing, ell: int, N: int) -> MultiSeries:
    """sum_i c_{l,l-2i} <a,alpha>^(l-2i) (<a,a> E_2)^i for <a,a> = norm, <a,alpha> = pairing."""
    if ell < 0:
        raise InputError("l must be nonnegative")
    norm, pairing = as_fraction(norm), as_fraction(pairing)
    e2 = classical_E(2, N)
    out = MultiSeries.zero(0, N)
    power = MultiSeries.one(0, N)
    for i in range(ell // 2 + 1):
        out = out + power.scale(c_coeff(ell, i) * pairing ** (ell - 2 * i))
        power = power * e2.scale(norm)
    return out


def f_series_for(M: HeisenbergModule, a: int, ell: int, N: int) -> MultiSeries:
    M_pair = M.alpha_pairings()
    return f_series(M.norms[a], M_pair[a], ell, N)


def heisenberg_trace(v: SquareMonomial, M: HeisenbergModule, hs, N: int) -> MultiSeries:
    if v.tail != "vacuum":
        raise InputError("heisenberg_trace needs the vacuum tail")
    if not v.all_modes_one():
        raise InputError("all modes must be 1; reduce other modes with the recursion module")
    return M.closed_form(v.exponents(M.rank), (), hs, N)


def fock_trace_oracle(u: FockState, M: HeisenbergModule, hs, grade_cutoff: int) -> MultiSeries:
    """Brute-force trace of o(u) over the graded basis of M (u in round modes)."""
    return fock_trace(u, M.norms, M.alpha_pairings(), M.half_norm(), M.zeta_exponents(hs),
                      grade_cutoff)


def square_oracle(v: SquareMonomial, M: HeisenbergModule, hs, grade_cutoff: int) -> MultiSeries:
    return fock_trace_oracle(bracket_convert(v.to_state(), M.norms), M, hs, grade_cutoff)
