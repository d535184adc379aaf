"""Even positive-definite lattices, coset systems and theta series.

Vectors are rational coordinate tuples in the lattice basis; the pairing is
<x, y> = x^T G y for the Gram matrix G.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

from .errors import ConditionHError, InputError, LatticeError
from .qseries import MultiSeries, as_fraction

Vec = tuple[Fraction, ...]


def to_vec(x: Iterable) -> Vec:
    return tuple(as_fraction(c) if not isinstance(c, float) else _float_frac(c) for c in x)


def _float_frac(c: float) -> Fraction:
    if not float(c).is_integer():
        raise InputError(f"non-integral float {c} in an exact vector; use a 'p/q' string")
    return Fraction(int(c))


def ldl(gram: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Exact G = U^T D U with U unit upper triangular; raises if not positive definite."""
    d = len(gram)
    a = [[Fraction(gram[i][j]) for j in range(d)] for i in range(d)]
    U = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    D: list[Fraction] = []
    for i in range(d):
        di = a[i][i] - sum(D[k] * U[k][i] ** 2 for k in range(i))
        if di <= 0:
            raise LatticeError("gram matrix is not positive definite")
        D.append(di)
        for j in range(i + 1, d):
            U[i][j] = (a[i][j] - sum(D[k] * U[k][i] * U[k][j] for k in range(i))) / di
    return U, D


class EvenLattice:
    def __init__(self, gram: Sequence[Sequence[int]]):
        g = [list(row) for row in gram]
        d = len(g)
        for row in g:
            if len(row) != d:
                raise LatticeError("gram matrix is not square")
            for x in row:
                if isinstance(x, bool) or int(x) != x:
                    raise LatticeError(f"gram entries must be integers, got {x!r}")
        g = [[int(x) for x in row] for row in g]
        for i in range(d):
            for j in range(d):
                if g[i][j] != g[j][i]:
                    raise LatticeError("gram matrix is not symmetric")
            if g[i][i] % 2:
                raise LatticeError(f"even lattice violation: diagonal entry {g[i][i]} is odd")
        self.gram: tuple[tuple[int, ...], ...] = tuple(tuple(r) for r in g)
        self.rank = d
        self._U, self._D = ldl(self.gram)

    def __eq__(self, other):
        return isinstance(other, EvenLattice) and self.gram == other.gram

    def __hash__(self):
        return hash(self.gram)

    def __repr__(self):
        return f"EvenLattice({[list(r) for r in self.gram]})"

    def inner(self, x: Sequence, y: Sequence) -> Fraction:
        g = self.gram
        return sum((x[i] * g[i][j] * y[j] for i in range(self.rank) for j in range(self.rank)),
                   Fraction(0))

    def half_norm(self, x: Sequence) -> Fraction:
        return self.inner(x, x) / 2

    def det(self) -> int:
        out = Fraction(1)
        for di in self._D:
            out *= di
        return int(out)

    def inverse_gram(self) -> list[list[Fraction]]:
        d = self.rank
        m = [[Fraction(self.gram[i][j]) for j in range(d)] + [Fraction(int(i == j)) for j in range(d)]
             for i in range(d)]
        for c in range(d):
            piv = next(r for r in range(c, d) if m[r][c] != 0)
            m[c], m[piv] = m[piv], m[c]
            inv = 1 / m[c][c]
            m[c] = [x * inv for x in m[c]]
            for r in range(d):
                if r != c and m[r][c]:
                    f = m[r][c]
                    m[r] = [a - f * b for a, b in zip(m[r], m[c])]
        return [row[d:] for row in m]

    def dual_pairing_integral(self, x: Sequence) -> bool:
        """True if <x, Lambda> is contained in Z."""
        return all((sum(Fraction(x[i]) * self.gram[i][j] for i in range(self.rank))).denominator == 1
                   for j in range(self.rank))

    def orthogonal_basis(self) -> list[Vec]:
        """Rational Gram-Schmidt basis of the ambient space, in lattice coordinates."""
        basis: list[Vec] = []
        for i in range(self.rank):
            v = [Fraction(int(i == j)) for j in range(self.rank)]
            for b in basis:
                c = self.inner(v, b) / self.inner(b, b)
                v = [vi - c * bi for vi, bi in zip(v, b)]
            basis.append(tuple(v))
        return basis


def reduce_mod_lattice(x: Sequence) -> Vec:
    return tuple(Fraction(c) - math.floor(Fraction(c)) for c in x)


def _congruent(x: Sequence, y: Sequence) -> bool:
    return all((Fraction(a) - Fraction(b)).denominator == 1 for a, b in zip(x, y))


@lru_cache(maxsize=4096)
def _enumerate(gram: tuple, gamma: Vec, bound: Fraction) -> tuple[Vec, ...]:
    lat = _lattice_cache(gram)
    d = lat.rank
    if d == 0:
        return ((),)
    U, D = lat._U, lat._D
    out: list[Vec] = []
    x: list[Fraction] = [Fraction(0)] * d
    budget0 = 2 * bound  # on <x, x>

    def rec(i: int, budget: Fraction):
        c = -sum((U[i][j] * x[j] for j in range(i + 1, d)), Fraction(0))
        rad = math.sqrt(float(budget / D[i])) + 1e-9
        g = gamma[i]
        lo = math.ceil(float(c - g) - rad)
        hi = math.floor(float(c - g) + rad)
        for n in range(lo, hi + 1):
            xi = g + n
            rest = budget - D[i] * (xi - c) ** 2
            if rest < 0:
                continue
            x[i] = xi
            if i == 0:
                out.append(tuple(x))
            else:
                rec(i - 1, rest)
        x[i] = Fraction(0)

    rec(d - 1, budget0)
    out.sort(key=lambda v: (lat.half_norm(v), v))
    return tuple(out)


@lru_cache(maxsize=64)
def _lattice_cache(gram: tuple) -> EvenLattice:
    return EvenLattice(gram)


@dataclass(frozen=True)
class CosetSystem:
    lattice: EvenLattice
    reps: tuple[Vec, ...]

    def __post_init__(self):
        reps = tuple(to_vec(r) for r in self.reps)
        if not reps:
            raise InputError("coset system needs at least one representative")
        for r in reps:
            if len(r) != self.lattice.rank:
                raise InputError(f"coset rep {r} has wrong length")
        if any(c != 0 for c in reps[0]):
            raise InputError("the first coset representative must be 0")
        for i in range(len(reps)):
            for j in range(i):
                if _congruent(reps[i], reps[j]):
                    raise InputError(f"coset reps {j} and {i} are congruent mod the lattice")
        object.__setattr__(self, "reps", reps)

    def __len__(self):
        return len(self.reps)

    def index_of(self, x: Sequence) -> int:
        for i, r in enumerate(self.reps):
            if _congruent(r, x):
                return i
        raise InputError(f"{tuple(x)} is not congruent to any coset representative")


def short_vectors(cs: CosetSystem, t: int, max_half_norm) -> list[Vec]:
    """All alpha in Lambda + gamma_t with <alpha, alpha>/2 <= max_half_norm."""
    bound = as_fraction(max_half_norm) if not isinstance(max_half_norm, float) else \
        Fraction(max_half_norm).limit_denominator(10 ** 9)
    if bound < 0:
        raise InputError("max_half_norm must be nonnegative")
    if not 0 <= t < len(cs):
        raise InputError(f"no coset with index {t}")
    return list(_enumerate(cs.lattice.gram, cs.reps[t], bound))


def min_half_norm(cs: CosetSystem, t: int) -> Fraction:
    """Smallest <alpha, alpha>/2 over the coset."""
    lat = cs.lattice
    g = cs.reps[t]
    # a reduced representative gives an upper bound; enumeration finds the minimum
    start = lat.half_norm(reduce_mod_lattice(g))
    return lat.half_norm(short_vectors(cs, t, start)[0])


def discriminant_cosets(L: EvenLattice) -> CosetSystem:
    """Representatives of the dual quotient, canonically ordered.

    The group is generated by the columns of G^-1 mod Z^d; we close under
    addition instead of computing a Smith normal form.
    """
    if L.rank < 1:
        raise InputError("discriminant group needs rank >= 1")
    inv = L.inverse_gram()
    gens = [reduce_mod_lattice([inv[i][j] for i in range(L.rank)]) for j in range(L.rank)]
    zero = tuple(Fraction(0) for _ in range(L.rank))
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = reduce_mod_lattice([a + b for a, b in zip(x, g)])
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    if len(seen) != L.det():
        raise AssertionError("discriminant group order does not match det(G)")
    reps = sorted(seen)
    tmp = CosetSystem(L, (zero,) + tuple(r for r in reps if r != zero))
    order = sorted(range(len(tmp)), key=lambda i: (min_half_norm(tmp, i), tmp.reps[i]))
    return CosetSystem(L, tuple(tmp.reps[i] for i in order))


@dataclass(frozen=True)
class HSpec:
    """Vectors h_1..h_m (lattice coordinates) defining the zeta variables."""
    vectors: tuple[Vec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vectors", tuple(to_vec(v) for v in self.vectors))

    def __len__(self):
        return len(self.vectors)

    def gram(self, lattice: EvenLattice) -> list[list[Fraction]]:
        return [[lattice.inner(a, b) for b in self.vectors] for a in self.vectors]

    def validate(self, lattice: EvenLattice) -> None:
        for v in self.vectors:
            if len(v) != lattice.rank:
                raise InputError(f"h-vector {v} does not match lattice rank {lattice.rank}")
        G = self.gram(lattice)
        if self.vectors:
            _, D = _ldl_semidef(G)
            if any(x == 0 for x in D):
                raise InputError("h-vectors are linearly dependent")

    def exponents(self, lattice: EvenLattice, alpha: Sequence) -> tuple[int, ...]:
        out = []
        for j, h in enumerate(self.vectors):
            e = lattice.inner(alpha, h)
            if e.denominator != 1:
                raise ConditionHError(
                    f"Condition H violation: <alpha, h_{j}> = {e} is not an integer "
                    f"for alpha = {tuple(str(c) for c in alpha)}")
            out.append(int(e))
        return tuple(out)


def _ldl_semidef(G):
    try:
        return ldl(G)
    except LatticeError:
        return None, [0]


def theta_weight_series(cs: CosetSystem, t: int, weight, h: HSpec, N: int,
                        offset: Fraction | None = None) -> MultiSeries:
    """sum_alpha weight(alpha) q^(<alpha,alpha>/2) zeta^(<alpha,h>) over the coset, N layers."""
    if N < 1:
        raise InputError("N must be at least 1")
    lat = cs.lattice
    h.validate(lat)
    lam0 = min_half_norm(cs, t) if offset is None else offset
    coeffs: dict = {}
    for alpha in short_vectors(cs, t, lam0 + N - 1):
        hn = lat.half_norm(alpha)
        diff = hn - lam0
        if diff.denominator != 1:
            raise ConditionHError(f"half-norm {hn} is not congruent to the offset {lam0} mod 1")
        c = weight(alpha)
        if c == 0:
            continue
        key = (int(diff), h.exponents(lat, alpha))
        coeffs[key] = coeffs.get(key, Fraction(0)) + c
    return MultiSeries(len(h), lam0, coeffs, N)


def theta_series(cs: CosetSystem, t: int, a: Sequence, k: int, h: HSpec, N: int) -> MultiSeries:
    """sum_{alpha in Lambda + gamma_t} <a, alpha>^k q^(<alpha,alpha>/2) zeta^(<alpha, h>)."""
    if k < 0:
        raise InputError("k must be nonnegative")
    lat = cs.lattice
    a = to_vec(a)
    if k == 0:
        return theta_weight_series(cs, t, lambda _: 1, h, N)
    return theta_weight_series(cs, t, lambda al: lat.inner(a, al) ** k, h, N)


def theta_product_series(cs: CosetSystem, t: int, factors: Sequence[tuple[Vec, int]],
                         h: HSpec, N: int) -> MultiSeries:
    """Theta series weighted by prod_i <a_i, alpha>^{k_i}, assembled by polarization.

    prod_i <a_i,alpha>^{k_i} = (1/K!) sum_{p <= k} (-1)^{K-|p|} prod binom(k_i,p_i)
    <sum p_i a_i, alpha>^K with K = sum k_i, so only single-vector theta series
    are needed.
    """
    factors = [(to_vec(a), k) for a, k in factors if k]
    K = sum(k for _, k in factors)
    if K == 0:
        return theta_series(cs, t, (Fraction(0),) * cs.lattice.rank, 0, h, N)
    total = None
    for p in product(*(range(k + 1) for _, k in factors)):
        if sum(p) == 0:
            continue
        c = Fraction((-1) ** (K - sum(p)), math.factorial(K))
        for (_, k), pi in zip(factors, p):
            c *= math.comb(k, pi)
        vec = tuple(sum((pi * a[i] for (a, _), pi in zip(factors, p)), Fraction(0))
                    for i in range(cs.lattice.rank))
        term = theta_series(cs, t, vec, K, h, N).scale(c)
        total = term if total is None else total + term
    return total
