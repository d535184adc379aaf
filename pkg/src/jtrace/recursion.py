"""Reduction of trace functions of Heisenberg states to closed forms.

States are square-bracket Fock states of the vacuum module.  A reduction
rewrites J(u[-p] v) as a combination of coefficient functions times traces of
strictly lighter states (plus zero-mode insertions and D_z, D_tau operators),
until only u[-1] factors remain, which have closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .eisenstein import TwistSpec, classical_E, classical_E_eval, is_untwisted, twisted_E
from .errors import DomainError, InputError
from .lattice import HSpec
from .qseries import MultiSeries, SamplePoint, with_rank
from .voa.fock import FockState, apply_mode, charged_pair_products
from .voa.heisenberg import HeisenbergModule, SquareMonomial
from .weierstrass import twisted_P

KINDS = ("E", "Et", "P", "Dz", "Dtau", "delta", "const")


@dataclass(frozen=True)
class Coefficient:
    """A tagged coefficient function.

    E: classical E_order; Et: twisted Et_order(tau, z.mu); P: Pt_order(w_s - w, tau, z.mu);
    Dz: (1/2 pi i) d/dz_index applied to the sub-trace; Dtau: (1/2 pi i) d/dtau;
    delta: 1 if z.mu is an integer else 0; const: the scale alone.
    """
    kind: str
    order: int = 0
    scale: Fraction = Fraction(1)
    mu: tuple[int, ...] = ()
    index: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown coefficient kind {self.kind!r}")
        object.__setattr__(self, "scale", Fraction(self.scale))

    @property
    def is_operator(self) -> bool:
        return self.kind in ("Dz", "Dtau")

    @property
    def twisted(self) -> bool:
        return any(self.mu)

    def series(self, N: int) -> MultiSeries:
        """Formal series of an untwisted scalar coefficient."""
        if self.kind == "E" or (self.kind == "Et" and not self.twisted):
            if self.order % 2 or self.order < 2:
                # odd untwisted E vanish; E_1 only multiplies zero states here
                return MultiSeries.zero(0, N) if self.order != 1 else \
                    MultiSeries.constant(Fraction(-1, 2) * self.scale, 0, N)
            return classical_E(self.order, N).scale(self.scale)
        if self.kind in ("const", "delta") and not self.twisted:
            return MultiSeries.constant(self.scale, 0, N)
        raise InputError(f"coefficient {self.kind} with twist {self.mu} has no formal series")

    def value(self, p: SamplePoint, dw: complex | None = None) -> complex:
        x = TwistSpec(self.mu).pair(p.zs) if self.mu else 0j
        s = float(self.scale)
        if self.kind == "E":
            return s * classical_E_eval(self.order, p.tau) if self.order % 2 == 0 else \
                (s * -0.5 if self.order == 1 else 0j)
        if self.kind == "Et":
            return s * twisted_E(self.order, p.tau, x)
        if self.kind == "P":
            if dw is None:
                raise InputError("P coefficient needs the insertion difference")
            return s * twisted_P(self.order, dw, p.tau, x, extended=True)
        if self.kind == "delta":
            return s * (1.0 if is_untwisted(x) else 0.0)
        if self.kind == "const":
            return s + 0j
        raise InputError("operator coefficients have no scalar value")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "order": self.order, "scale": str(self.scale),
                "mu": list(self.mu), "index": self.index}


@dataclass(frozen=True)
class ReducedTerm:
    coefficient: Coefficient
    state: FockState
    zero_modes: tuple[int, ...] = ()


@dataclass
class ReducedForm:
    source_weight: int
    terms: list[ReducedTerm] = field(default_factory=list)

    def __post_init__(self):
        for t in self.terms:
            self._check(t)

    def _check(self, t: ReducedTerm) -> None:
        for key in t.state.terms:
            w = sum(n for _, n in key)
            if w >= self.source_weight:
                raise AssertionError(
                    f"sub-request of weight {w} does not decrease from {self.source_weight}")

    def add(self, t: ReducedTerm) -> None:
        self._check(t)
        self.terms.append(t)

    def series(self, module, hs, N: int) -> MultiSeries:
        """Sum of coefficient x sub-trace as an exact series (untwisted coefficients only)."""
        m = len(hs)
        total = MultiSeries.zero(m, N)
        for t in self.terms:
            sub = state_trace(t.state, module, hs, N, t.zero_modes)
            c = t.coefficient
            if c.kind == "Dz":
                term = sub.d_z(c.index).scale(c.scale)
            elif c.kind == "Dtau":
                term = sub.d_tau().scale(c.scale)
            else:
                term = with_rank(c.series(N), m) * sub
            total = total + term
        return total

    def value(self, module, hs, p: SamplePoint, N: int = 30) -> complex:
        """Numerical value, with twisted coefficients evaluated at p."""
        total = 0j
        for t in self.terms:
            sub = state_trace(t.state, module, hs, N, t.zero_modes)
            c = t.coefficient
            if c.kind == "Dz":
                total += float(c.scale) * sub.d_z(c.index).eval(p)
            elif c.kind == "Dtau":
                total += float(c.scale) * sub.d_tau().eval(p)
            else:
                total += c.value(p) * sub.eval(p)
        return total


def _as_state(v) -> FockState:
    if isinstance(v, SquareMonomial):
        if v.tail != "vacuum":
            raise InputError("only vacuum tails can be rewritten as Fock states")
        return v.to_state()
    if isinstance(v, FockState):
        return v
    raise InputError(f"expected a SquareMonomial or FockState, got {type(v).__name__}")


def _weight(state: FockState) -> int:
    return state.max_grade()


def square_mode(state: FockState, gen: int, n: int, norms) -> FockState:
    """u_gen[n] on a square-bracket state of the vacuum module (u[0] acts as 0)."""
    return apply_mode(state, gen, n, norms, None)


def virasoro_square(state: FockState, n: int, norms) -> FockState:
    """L[n] = 1/2 sum_x (1/b_x) sum_m :u_x[m] u_x[n-m]: on a square-bracket state."""
    W = state.max_grade()
    out = FockState()
    for x, b in enumerate(norms):
        for m in range(n - W - 1, W + 2):
            k = n - m
            first, second = (m, k) if m >= k else (k, m)
            cur = square_mode(state, x, first, norms)
            if cur.is_zero():
                continue
            cur = square_mode(cur, x, second, norms)
            out = out + cur.scale(Fraction(1, 2) / b)
    return out


def zero_mode_vanish(u: int, states: Sequence, norms, mu: TwistSpec | None = None) -> list[list[FockState]]:
    """Insertion lists whose traces sum to zero: u[0] applied to each insertion in turn."""
    if mu is not None and not mu.trivial:
        raise InputError("the zero-mode identity is only represented for untwisted u (mu = 0)")
    sts = [_as_state(s) for s in states]
    out = []
    for i in range(len(sts)):
        row = list(sts)
        row[i] = square_mode(sts[i], u, 0, norms)
        out.append(row)
    return out


def reduce_neg_mode(u: int, p: int, tail, norms, mu: TwistSpec | None = None) -> ReducedForm:
    """J(u[-p] tail) = delta_{p,1} tr o(u) o(tail)
                       + (-1)^(p+1) sum_k binom(k+p-1, p-1) Et_{k+p}(tau, z.mu) J(u[k] tail)."""
    if p < 1:
        raise InputError("p must be at least 1")
    mu = mu or TwistSpec(())
    st = _as_state(tail)
    W = _weight(st)
    form = ReducedForm(W + p)
    if p == 1 and not st.is_zero():
        form.add(ReducedTerm(Coefficient("delta", mu=mu.mu), st, (u,)))
    sign = 1 if p % 2 else -1
    for k in range(0, W + 1):
        sub = square_mode(st, u, k, norms)
        if sub.is_zero():
            continue
        scale = sign * math.comb(k + p - 1, p - 1)
        kind = "Et" if not mu.trivial else "E"
        coef = Coefficient(kind, k + p, scale, mu.mu)
        if kind == "E" and (k + p) % 2:
            continue
        form.add(ReducedTerm(coef, sub))
    # u[k] tail = 0 for k > W: abelian currents are nilpotent on finite states
    if not square_mode(st, u, W + 1, norms).is_zero():
        raise AssertionError("u[k] does not annihilate the tail beyond its weight")
    return form


def reduce_charged(fam, beta, p: int, hs: HSpec) -> tuple[ReducedForm, FockState]:
    """Twisted reduction of J(e^beta[-p] e^-beta) on a lattice VOA family.

    Returns the ReducedForm (coefficients Et_{k+p}(tau, z.mu) with mu_j = <beta, h_j>)
    together with the neutral source state e^beta[-p] e^-beta for direct evaluation.
    """
    if p < 1:
        raise InputError("p must be at least 1")
    lat = fam.lattice
    beta = tuple(Fraction(b) for b in beta)
    if len(beta) != lat.rank or any(b.denominator != 1 for b in beta):
        raise InputError("beta must be a lattice vector in lattice coordinates")
    mu = TwistSpec(tuple(int(lat.inner(beta, h)) for h in hs.vectors))
    if mu.trivial and p == 1:
        raise InputError("the untwisted p = 1 case needs tr o(u) o(v) for charged states")
    coords = [lat.inner(beta, g) / lat.inner(g, g) for g in fam.generators]
    prods = charged_pair_products(coords, fam.norms, -p)
    source = prods[-p]
    form = ReducedForm(_weight(source) + 1)
    sign = 1 if p % 2 else -1
    for k in range(0, max(prods) + 1):
        sub = prods[k]
        if sub.is_zero():
            continue
        kind = "E" if mu.trivial else "Et"
        if kind == "E" and (k + p) % 2:
            continue
        form.add(ReducedTerm(Coefficient(kind, k + p, sign * math.comb(k + p - 1, p - 1), mu.mu), sub))
    return form, source


def reduce_h_minus1(v: SquareMonomial, gen: int, h_index: int, norms) -> ReducedForm:
    """J(h[-1] rest) = D_z J(rest) + sum_k E_2k J(h[2k-1] rest), with h = u_gen = h_{h_index}."""
    counts = {(g, m): p for g, m, p in v.factors}
    if counts.get((gen, 1), 0) < 1:
        raise InputError("monomial has no leading h[-1] factor")
    rest = SquareMonomial(tuple((g, m, p - (g == gen and m == 1)) for g, m, p in v.factors), v.tail)
    st = _as_state(rest)
    W = _weight(st)
    form = ReducedForm(v.weight)
    form.add(ReducedTerm(Coefficient("Dz", index=h_index), st))
    for k in range(1, W // 2 + 2):
        sub = square_mode(st, gen, 2 * k - 1, norms)
        if not sub.is_zero():
            form.add(ReducedTerm(Coefficient("E", 2 * k), sub))
    return form


def reduce_L_minus2(v, norms) -> ReducedForm:
    """J(L[-2] v) = D_tau J(v) + sum_k E_2k J(L[2k-2] v); the source has weight wt(v) + 2."""
    st = _as_state(v)
    W = _weight(st)
    form = ReducedForm(W + 2)
    form.add(ReducedTerm(Coefficient("Dtau"), st))
    for k in range(1, W // 2 + 2):
        sub = virasoro_square(st, 2 * k - 2, norms)
        if not sub.is_zero():
            form.add(ReducedTerm(Coefficient("E", 2 * k), sub))
    return form


def _split_monomial(key) -> tuple[int, int, tuple] | None:
    """Pick a factor with mode >= 2 (largest mode first); return (gen, mode, rest)."""
    best = None
    for i, (g, n) in enumerate(key):
        if n >= 2 and (best is None or n > key[best][1]):
            best = i
    if best is None:
        return None
    g, n = key[best]
    return g, n, key[:best] + key[best + 1:]


def state_trace(state: FockState, module, hs, N: int, zero_modes: Sequence[int] = (),
                _memo: dict | None = None) -> MultiSeries:
    """J(state) with extra zero-mode insertions, reduced until all modes are 1."""
    memo = {} if _memo is None else _memo
    m = len(hs)
    total = MultiSeries.zero(m, N)
    norms = module.norms
    for key, c in state.items():
        mk = (key, tuple(sorted(zero_modes)))
        if mk not in memo:
            memo[mk] = _monomial_trace(key, module, hs, N, tuple(sorted(zero_modes)), memo)
        total = total + memo[mk].scale(c)
    return total


def _monomial_trace(key, module, hs, N, zero_modes, memo) -> MultiSeries:
    split = _split_monomial(key)
    if split is None:
        ex = [0] * module.rank
        for g, _ in key:
            ex[g] += 1
        return module.closed_form(tuple(ex), zero_modes, hs, N)
    g, p, rest = split
    form = reduce_neg_mode(g, p, FockState.monomial(rest), module.norms)
    total = MultiSeries.zero(len(hs), N)
    for t in form.terms:
        sub = state_trace(t.state, module, hs, N, zero_modes + t.zero_modes, memo)
        total = total + with_rank(t.coefficient.series(N), len(hs)) * sub
    return total


def reduce_full(v, module, hs, N: int) -> MultiSeries:
    """Exact 1-point function of a square-bracket state (SquareMonomial or FockState)."""
    if isinstance(v, SquareMonomial):
        v.check_rank(module.rank)
        if v.tail != "vacuum":
            return module.closed_form(v.exponents(module.rank), (), hs, N, v.tail) \
                if v.all_modes_one() else _abstract_tail(v, module, hs, N)
    return state_trace(_as_state(v), module, hs, N)


def _abstract_tail(v: SquareMonomial, module, hs, N):
    # the recursion never touches the commutant tail, so reduce the Heisenberg part with it attached
    st = v.to_state()
    total = MultiSeries.zero(len(hs), N)
    for key, c in st.items():
        total = total + _tail_trace(key, module, hs, N, (), v.tail).scale(c)
    return total


def _tail_trace(key, module, hs, N, zero_modes, tail):
    split = _split_monomial(key)
    if split is None:
        ex = [0] * module.rank
        for g, _ in key:
            ex[g] += 1
        return module.closed_form(tuple(ex), zero_modes, hs, N, tail)
    g, p, rest = split
    form = reduce_neg_mode(g, p, FockState.monomial(rest), module.norms)
    total = MultiSeries.zero(len(hs), N)
    for t in form.terms:
        for k2, c2 in t.state.items():
            sub = _tail_trace(k2, module, hs, N, zero_modes + t.zero_modes, tail).scale(c2)
            total = total + with_rank(t.coefficient.series(N), len(hs)) * sub
    return total


# two-point functions


@dataclass(frozen=True)
class Insertion:
    state: object
    w: complex


@dataclass(frozen=True)
class TraceRequest:
    module: object
    insertions: tuple[Insertion, ...]
    hs: tuple = ()

    def __post_init__(self):
        ins = tuple(self.insertions)
        object.__setattr__(self, "insertions", ins)
        for i in range(len(ins)):
            for j in range(i):
                if abs(complex(ins[i].w) - complex(ins[j].w)) < 1e-12:
                    raise InputError("insertion positions coincide")

    @property
    def n(self) -> int:
        return len(self.insertions)


def _weight_one_generator(state) -> int | None:
    st = _as_state(state)
    items = st.items()
    if len(items) == 1 and items[0][0] == () and items[0][1] == 1:
        return None
    if len(items) != 1 or len(items[0][0]) != 1 or items[0][0][0][1] != 1:
        raise InputError("two-point reduction handles generators u[-1]1 and the vacuum")
    (key, c), = items
    return key[0][0], c


def two_point_reduce(req: TraceRequest, p: SamplePoint, N: int = 40) -> complex:
    """F((v, w), (v1, w1)) = tr o(v) o(v1) + sum_k Pt_{k+1}(w1 - w, tau, z.mu) J(v[k] v1).

    Both insertions are weight-one generators (or the vacuum); v has mu = 0.
    """
    if req.n != 2:
        raise InputError("two_point_reduce needs exactly two insertions")
    module = req.module
    hs = req.hs
    (a, b) = req.insertions
    ga, gb = _weight_one_generator(a.state), _weight_one_generator(b.state)
    if ga is None or gb is None:
        other = b if ga is None else a
        st = _as_state(other.state)
        return reduce_full(st, module, hs, N).eval(p)
    (xa, ca), (xb, cb) = ga, gb
    v1 = FockState.monomial([(xb, 1)], cb)
    form = ReducedForm(3)
    form.add(ReducedTerm(Coefficient("delta", scale=ca), v1, (xa,)))
    dw = complex(b.w) - complex(a.w)
    total = 0j
    for t in form.terms:
        total += t.coefficient.value(p) * state_trace(t.state, module, hs, N, t.zero_modes).eval(p)
    for k in range(0, 2):
        sub = square_mode(v1, xa, k, module.norms).scale(ca)
        if sub.is_zero():
            continue
        total += twisted_P(k + 1, dw, p.tau, 0.0, extended=True) * \
            state_trace(sub, module, hs, N).eval(p)
    return total
