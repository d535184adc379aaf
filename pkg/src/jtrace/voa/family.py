"""Module families built from lattice cosets and a commutant part.

Each module M^r decomposes as a sum over coset representatives gamma_t of
(sum over alpha in Lambda + gamma_t of M_H(alpha)) tensor Omega_t.  The
commutant contributes a user-supplied series J_Omega(gamma_t; tail); for the
lattice VOA it is the constant 1.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from ..eisenstein import classical_E, twisted_E
from ..errors import ConditionHError, InputError
from ..lattice import (CosetSystem, EvenLattice, HSpec, Vec, discriminant_cosets,
                       min_half_norm, reduce_mod_lattice, short_vectors, theta_weight_series, to_vec)
from ..qseries import MultiSeries, eta_inverse_pow, with_rank
from .heisenberg import SquareMonomial, c_coeff


@dataclass(frozen=True)
class CosetComponent:
    gamma: Vec
    omega: Mapping[str, MultiSeries] = field(default_factory=dict)


@dataclass(frozen=True)
class ModuleDescriptor:
    name: str
    components: tuple[CosetComponent, ...]


class ModuleFamily:
    """A list of modules over a common lattice and orthogonal generator basis.

    ``generators`` are vectors (lattice coordinates) forming an orthogonal
    basis of the ambient space; their squared norms enter through E_2.
    ``tail_components`` maps a tail handle to the index of the commutant
    module it lives in (0 is the commutant of the vacuum module itself).
    """

    def __init__(self, lattice: EvenLattice, modules: Sequence[ModuleDescriptor],
                 generators: Sequence[Sequence] | None = None,
                 tail_components: Mapping[str, int] | None = None,
                 lattice_voa: bool = False):
        self.lattice = lattice
        self.generators: tuple[Vec, ...] = tuple(to_vec(g) for g in (
            generators if generators is not None else lattice.orthogonal_basis()))
        if len(self.generators) != lattice.rank:
            raise InputError("need one generator per lattice dimension")
        for i, a in enumerate(self.generators):
            if len(a) != lattice.rank:
                raise InputError(f"generator {i} has the wrong length")
            for j in range(i):
                if lattice.inner(a, self.generators[j]) != 0:
                    raise InputError("generators must be pairwise orthogonal")
            if lattice.inner(a, a) <= 0:
                raise InputError("generators must be nonzero")
        self.modules = tuple(modules)
        self.tail_components = dict(tail_components or {"vacuum": 0})
        self.tail_components.setdefault("vacuum", 0)
        self.is_lattice_voa = lattice_voa
        self._cosets = []
        zero = tuple(Fraction(0) for _ in range(lattice.rank))
        for m in self.modules:
            if not m.components:
                raise InputError(f"module {m.name} has no coset components")
            reps = [zero]
            for c in m.components:
                if len(c.gamma) != lattice.rank:
                    raise InputError(f"coset rep {c.gamma} has the wrong length")
                if any(c.gamma) or any((x - y).denominator != 1 for x, y in zip(c.gamma, zero)):
                    reps.append(to_vec(c.gamma))
            # CosetSystem rejects reps that repeat a coset
            self._cosets.append(CosetSystem(lattice, tuple(reps)))

    @classmethod
    def lattice_voa(cls, lattice: EvenLattice, generators=None) -> "ModuleFamily":
        cs = discriminant_cosets(lattice)
        mods = []
        for r, g in enumerate(cs.reps):
            comp = CosetComponent(g, {"vacuum": MultiSeries.one(0, 10 ** 9)})
            mods.append(ModuleDescriptor(f"coset{r}", (comp,)))
        return cls(lattice, mods, generators, lattice_voa=True)

    def __len__(self):
        return len(self.modules)

    @property
    def rank(self) -> int:
        return self.lattice.rank

    @property
    def norms(self) -> tuple[Fraction, ...]:
        return tuple(self.lattice.inner(a, a) for a in self.generators)

    def coset_system(self, r: int) -> CosetSystem:
        return self._cosets[r]

    def _coset_index(self, r: int, t: int) -> int:
        return self._cosets[r].index_of(self.modules[r].components[t].gamma)

    def conformal_weight(self, r: int) -> Fraction:
        """Lowest q-power of the lattice part: min half-norm over the module's cosets."""
        cs = self.coset_system(r)
        return min(min_half_norm(cs, self._coset_index(r, t))
                   for t in range(len(self.modules[r].components)))

    def omega_series(self, r: int, t: int, tail: str) -> MultiSeries | None:
        comp = self.modules[r].components[t]
        if tail not in comp.omega:
            raise InputError(f"module {r} coset {t} has no commutant series for tail {tail!r}")
        return comp.omega[tail]

    def module(self, r: int) -> "FamilyModule":
        if not 0 <= r < len(self.modules):
            raise InputError(f"no module with index {r}")
        return FamilyModule(self, r)

    def generator_pairings(self, alpha: Sequence) -> tuple[Fraction, ...]:
        return tuple(self.lattice.inner(a, alpha) for a in self.generators)

    def coset_of(self, r: int) -> Vec:
        """Coset of a lattice-VOA module."""
        return self.modules[r].components[0].gamma


@dataclass(frozen=True)
class SummandMeta:
    i: tuple[int, ...]
    k: int
    quasi_weight: int


class FamilyModule:
    def __init__(self, family: ModuleFamily, r: int):
        self.family = family
        self.r = r

    @property
    def norms(self) -> tuple[Fraction, ...]:
        return self.family.norms

    @property
    def rank(self) -> int:
        return self.family.rank

    def closed_form(self, exponents: Sequence[int], zero_modes: Sequence[int], hs: HSpec, N: int,
                    tail: str = "vacuum", meta: list | None = None) -> MultiSeries:
        fam = self.family
        if not isinstance(hs, HSpec):
            hs = HSpec(tuple(hs))
        if tail not in fam.tail_components:
            raise InputError(f"unknown tail handle {tail!r}")
        m = len(hs)
        if fam.tail_components[tail] != 0:
            # the tail carries nonzero charge, so o(v) shifts alpha and the trace vanishes
            return MultiSeries.zero(m, N)
        norms = fam.norms
        e2 = classical_E(2, N)
        total = None
        desc = fam.modules[self.r]
        gens = fam.generators
        zcount = [0] * fam.rank
        for x in zero_modes:
            zcount[x] += 1
        for t, comp in enumerate(desc.components):
            omega = fam.omega_series(self.r, t, tail)
            cs = fam.coset_system(self.r)
            tt = fam._coset_index(self.r, t)
            lam = min_half_norm(cs, tt)
            inner = MultiSeries.zero(m, N, lam)
            for i in product(*(range(l // 2 + 1) for l in exponents)):
                coef = Fraction(1)
                quasi = MultiSeries.one(0, N)
                for x, (l, ix) in enumerate(zip(exponents, i)):
                    coef *= c_coeff(l, ix)
                    if ix:
                        quasi = quasi * (e2.scale(norms[x]) ** ix)
                pw = [l - 2 * ix + zcount[x] for x, (l, ix) in enumerate(zip(exponents, i))]
                if meta is not None:
                    meta.append(SummandMeta(tuple(i), sum(pw), 2 * sum(i)))
                theta = _theta_monomial(fam, cs, tt, pw, hs, N, lam)
                inner = inner + with_rank(quasi, m) * theta.scale(coef)
            term = with_rank(omega, m) * inner if omega is not None else inner
            total = term if total is None else total + term
        return with_rank(eta_inverse_pow(fam.rank, N), m) * total


def _theta_monomial(fam: ModuleFamily, cs: CosetSystem, t: int, powers: Sequence[int], hs: HSpec,
                    N: int, lam: Fraction) -> MultiSeries:
    gens = fam.generators
    lat = fam.lattice

    def weight(alpha):
        out = Fraction(1)
        for a, p in zip(gens, powers):
            if p:
                out *= lat.inner(a, alpha) ** p
        return out

    return theta_weight_series(cs, t, weight, hs, N, lam)


def assemble_trace(v: SquareMonomial, fam: ModuleFamily, r: int, hs: HSpec, N: int,
                   meta: list | None = None) -> MultiSeries:
    """1-point function of a monomial with all modes 1 on module r, from theta series."""
    if not v.all_modes_one():
        raise InputError("all modes must be 1; route the monomial through the recursion first")
    return fam.module(r).closed_form(v.exponents(fam.rank), (), hs, N, v.tail, meta)


def delta_module_shift(fam: ModuleFamily, h: Sequence) -> list[int]:
    """Permutation r -> r' with coset(r') = coset(r) + h mod the lattice."""
    if not fam.is_lattice_voa:
        raise InputError("module shift is only realized for lattice VOA families")
    h = to_vec(h)
    lat = fam.lattice
    inv_check = discriminant_cosets(lat)
    for g in inv_check.reps:
        if lat.inner(h, g).denominator != 1:
            raise ConditionHError(f"<h, gamma> = {lat.inner(h, g)} is not integral")
    out = []
    for r in range(len(fam)):
        target = [a + b for a, b in zip(fam.coset_of(r), h)]
        match = [s for s in range(len(fam))
                 if all((x - y).denominator == 1 for x, y in zip(fam.coset_of(s), target))]
        if len(match) != 1:
            raise InputError("coset shift does not land on a unique module")
        out.append(match[0])
    return out


# numerics


def eta_value(tau: complex, tol: float = 1e-17) -> complex:
    q = cmath.exp(2j * cmath.pi * tau)
    out = cmath.exp(2j * cmath.pi * tau / 24)
    n = 1
    qn = q
    while abs(qn) > tol:
        out *= 1 - qn
        n += 1
        qn = cmath.exp(2j * cmath.pi * tau * n)
    return out


def _shell_bound(tau: complex, ynorm2: float, degree: int, rank: int, tol: float,
                 bias: float = 0.0) -> int:
    """Half-norm B past which the theta tail is below tol.

    Terms are bounded by (2 B)^(degree/2) exp(-2 pi Im(tau) B + 2 pi sqrt(2 B Y) + bias).
    """
    y = tau.imag
    B = 1
    while True:
        f = (-2 * math.pi * y * B + 2 * math.pi * math.sqrt(2 * B * ynorm2) + bias
             + 0.5 * degree * math.log(2 * B + 2) + (rank + 1) * math.log(B + 2) + 3)
        slope = -2 * math.pi * y + math.pi * math.sqrt(2 * ynorm2 / B) + (degree + rank) / B
        if f < math.log(tol) and slope < 0:
            return B
        B += 1
        if B > 10 ** 5:
            raise InputError("theta enumeration bound diverged")


@lru_cache(maxsize=512)
def _coset_arrays(gram: tuple, gamma: Vec, B: int, gens: tuple, hs: tuple):
    lat = EvenLattice(gram)
    cs = CosetSystem(lat, ((Fraction(0),) * lat.rank,) + ((gamma,) if any(gamma) else ()))
    t = 1 if any(gamma) else 0
    vecs = short_vectors(cs, t, B)
    hn = np.array([float(lat.half_norm(a)) for a in vecs])
    hp = np.array([[float(lat.inner(a, h)) for h in hs] for a in vecs]).reshape(len(vecs), len(hs))
    gp = np.array([[float(lat.inner(a, g)) for g in gens] for a in vecs]).reshape(len(vecs), len(gens))
    return hn, hp, gp


def _ambient_y(fam: ModuleFamily, hs: HSpec, zs: Sequence[complex]) -> float:
    lat = fam.lattice
    d = lat.rank
    if not hs.vectors:
        return 0.0
    y = np.zeros(d)
    for z, h in zip(zs, hs.vectors):
        y += complex(z).imag * np.array([float(c) for c in h])
    G = np.array(lat.gram, dtype=float)
    return float(y @ G @ y)


def theta_numeric(fam: ModuleFamily, gamma: Vec, hs: HSpec, tau: complex, zs: Sequence[complex],
                  powers: Sequence[int] = (), shift: Sequence[complex] | None = None,
                  tol: float = 1e-15) -> complex:
    """sum_alpha prod <u_x,alpha>^p_x e^(2 pi i <alpha, z.h>) q^(<alpha+s, alpha+s>/2), numerically.

    The coset is Lambda + gamma and s is an optional complex shift vector.
    """
    lat = fam.lattice
    G = np.array(lat.gram, dtype=float).reshape(lat.rank, lat.rank)
    # |<alpha, c>| <= sqrt(2 hn) |c| bounds every linear growth term
    lin = math.sqrt(_ambient_y(fam, hs, zs))
    if shift is not None:
        s = np.array([complex(c) for c in shift])
        lin += (tau.imag * math.sqrt(max(float(s.real @ G @ s.real), 0.0))
                + abs(tau.real) * math.sqrt(max(float(s.imag @ G @ s.imag), 0.0)))
    B = _shell_bound(tau, lin ** 2, sum(powers), lat.rank, tol)
    hn, hp, gp = _coset_arrays(lat.gram, tuple(gamma), B, fam.generators, hs.vectors)
    phase = 2j * np.pi * tau * hn
    if len(hs):
        phase = phase + 2j * np.pi * (hp @ np.array([complex(z) for z in zs]))
    if shift is not None:
        vecs = _coset_vectors(lat.gram, tuple(gamma), B)
        phase = phase + 2j * np.pi * tau * (vecs @ G @ s + complex(s @ G @ s) / 2)
    w = np.ones(len(hn), dtype=complex)
    for x, p in enumerate(powers):
        if p:
            w = w * gp[:, x] ** p
    return complex(np.sum(w * np.exp(phase)))


@lru_cache(maxsize=512)
def _coset_vectors(gram: tuple, gamma: Vec, B: int) -> np.ndarray:
    lat = EvenLattice(gram)
    cs = CosetSystem(lat, ((Fraction(0),) * lat.rank,) + ((gamma,) if any(gamma) else ()))
    t = 1 if any(gamma) else 0
    return np.array([[float(c) for c in a] for a in short_vectors(cs, t, B)]).reshape(-1, lat.rank)


def family_trace_value(fam: ModuleFamily, r: int, v: SquareMonomial, hs: HSpec, tau: complex,
                       zs: Sequence[complex] = (), tol: float = 1e-15) -> complex:
    """Numerical 1-point function of an all-modes-one monomial (lattice VOA family)."""
    if not fam.is_lattice_voa:
        raise InputError("numerical evaluation is implemented for lattice VOA families")
    if v.tail != "vacuum":
        raise InputError("numerical evaluation needs the vacuum tail")
    tau = complex(tau)
    ex = v.exponents(fam.rank)
    norms = fam.norms
    e2 = twisted_E(2, tau, 0.0) if any(ex) else 0.0
    gamma = fam.coset_of(r)
    total = 0j
    for i in product(*(range(l // 2 + 1) for l in ex)):
        coef = 1.0 + 0j
        for x, (l, ix) in enumerate(zip(ex, i)):
            coef *= float(c_coeff(l, ix)) * (float(norms[x]) * e2) ** ix
        pw = [l - 2 * ix for l, ix in zip(ex, i)]
        total += coef * theta_numeric(fam, gamma, hs, tau, zs, pw, tol=tol)
    return total / eta_value(tau) ** fam.rank


def phi_trace(fam: ModuleFamily, r: int, u: Sequence[complex], w: Sequence[complex], tau: complex,
              tol: float = 1e-15) -> complex:
    """tr e^(2 pi i (w(0) + <u,w>/2)) q^(L(0) + u(0) + <u,u>/2 - c/24) on a lattice module (v = 1).

    u and w are complex vectors in lattice coordinates.
    """
    if not fam.is_lattice_voa:
        raise InputError("phi_trace is realized for lattice VOA modules only")
    lat = fam.lattice
    tau = complex(tau)
    d = lat.rank
    G = np.array(lat.gram, dtype=float).reshape(d, d)
    u = np.array([complex(c) for c in u])
    w = np.array([complex(c) for c in w])
    # <alpha, w> = sum_i w_i <alpha, e_i>, so the basis vectors serve as h with z = w
    basis = HSpec(tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d)))
    val = theta_numeric(fam, fam.coset_of(r), basis, tau, tuple(w), (), shift=u, tol=tol)
    pre = cmath.exp(1j * cmath.pi * complex(u @ G @ w)) if d else 1
    return pre * val / eta_value(tau) ** d
