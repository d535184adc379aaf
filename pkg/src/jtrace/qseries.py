"""Exact truncated series in q (rational offset) and Laurent in zeta_1..zeta_m.

A series stores c(l, t) for the monomial q^(offset + l) * prod zeta_j^(t_j),
with 0 <= l < trunc.  Coefficients at l >= trunc are unknown, and every
operation propagates the tightest truncation it can justify.
"""
from __future__ import annotations

import cmath
import math
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, InputError

Key = tuple[int, tuple[int, ...]]


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    raise InputError(f"expected an exact rational, got {type(x).__name__}")


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _add_t(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


class MultiSeries:
    """Immutable truncated q/zeta series with exact rational coefficients."""

    __slots__ = ("_rank", "_offset", "_coeffs", "_trunc")
    __hash__ = None  # equality only compares the known overlap

    def __init__(self, rank: int, offset=0, coeffs: Mapping[Key, object] | None = None,
                 trunc: int = 1):
        if rank < 0:
            raise InputError("zeta rank must be nonnegative")
        if trunc < 0:
            raise InputError("trunc must be nonnegative")
        clean: dict[Key, Fraction] = {}
        for (ell, t), c in (coeffs or {}).items():
            t = tuple(int(x) for x in t)
            if len(t) != rank:
                raise InputError(f"zeta exponent {t} does not have length {rank}")
            if ell < 0:
                raise InputError(f"negative q index {ell}")
            if ell >= trunc:
                continue
            c = as_fraction(c)
            if c:
                clean[(int(ell), t)] = clean.get((int(ell), t), Fraction(0)) + c
        self._rank = rank
        self._offset = as_fraction(offset)
        self._coeffs = {k: v for k, v in clean.items() if v}
        self._trunc = int(trunc)

    # construction helpers
    @classmethod
    def zero(cls, rank: int, trunc: int, offset=0) -> "MultiSeries":
        return cls(rank, offset, {}, trunc)

    @classmethod
    def constant(cls, c, rank: int, trunc: int) -> "MultiSeries":
        return cls(rank, 0, {(0, (0,) * rank): c}, trunc)

    @classmethod
    def one(cls, rank: int, trunc: int) -> "MultiSeries":
        return cls.constant(1, rank, trunc)

    @classmethod
    def monomial(cls, c, q_power, zeta: Iterable[int], trunc: int) -> "MultiSeries":
        zeta = tuple(zeta)
        return cls(len(zeta), q_power, {(0, zeta): c}, trunc)

    @classmethod
    def from_q_list(cls, values: Iterable, offset=0, rank: int = 0) -> "MultiSeries":
        values = list(values)
        z = (0,) * rank
        return cls(rank, offset, {(i, z): v for i, v in enumerate(values)}, len(values))

    # accessors
    @property
    def zeta_rank(self) -> int:
        return self._rank

    @property
    def q_offset(self) -> Fraction:
        return self._offset

    @property
    def trunc(self) -> int:
        return self._trunc

    @property
    def coeffs(self) -> dict[Key, Fraction]:
        return dict(self._coeffs)

    def items(self):
        return sorted(self._coeffs.items())

    def __len__(self) -> int:
        return len(self._coeffs)

    def is_zero(self) -> bool:
        return not self._coeffs

    def coefficient(self, ell: int, t: Iterable[int] = ()) -> Fraction:
        t = tuple(t) if self._rank else ()
        if ell >= self._trunc:
            raise InputError(f"coefficient at l={ell} lies beyond trunc={self._trunc}")
        return self._coeffs.get((ell, t), Fraction(0))

    def layer(self, ell: int) -> dict[tuple[int, ...], Fraction]:
        return {t: c for (l, t), c in self._coeffs.items() if l == ell}

    def q_coefficients(self) -> list[Fraction]:
        """Coefficients of a zeta-free series as a list indexed by l."""
        if self._rank:
            raise InputError("q_coefficients needs zeta rank 0")
        return [self._coeffs.get((l, ()), Fraction(0)) for l in range(self._trunc)]

    def _check_rank(self, other: "MultiSeries") -> None:
        if self._rank != other._rank:
            raise InputError(f"zeta rank mismatch: {self._rank} vs {other._rank}")

    # structural operations
    def rebase(self, offset) -> "MultiSeries":
        """Same series written with a smaller q offset (difference must be integral)."""
        offset = as_fraction(offset)
        diff = self._offset - offset
        if diff.denominator != 1:
            raise InputError(f"offsets {self._offset} and {offset} differ by a non-integer")
        s = int(diff)
        if s < 0:
            raise InputError("rebase can only lower the offset")
        if s == 0:
            return self
        return MultiSeries(self._rank, offset,
                           {(l + s, t): c for (l, t), c in self._coeffs.items()},
                           self._trunc + s)

    def truncate(self, n: int) -> "MultiSeries":
        return MultiSeries(self._rank, self._offset, self._coeffs, min(n, self._trunc))

    def shift(self, q_power=0, zeta: Iterable[int] | None = None) -> "MultiSeries":
        """Multiply by the monomial q^q_power * zeta^zeta."""
        zeta = tuple(zeta) if zeta is not None else (0,) * self._rank
        if len(zeta) != self._rank:
            raise InputError("zeta shift has wrong length")
        return MultiSeries(self._rank, self._offset + as_fraction(q_power),
                           {(l, _add_t(t, zeta)): c for (l, t), c in self._coeffs.items()},
                           self._trunc)

    def scale(self, c) -> "MultiSeries":
        c = as_fraction(c)
        return MultiSeries(self._rank, self._offset,
                           {k: v * c for k, v in self._coeffs.items()}, self._trunc)

    def d_tau(self) -> "MultiSeries":
        """(1/2 pi i) d/dtau, i.e. q d/dq."""
        return MultiSeries(self._rank, self._offset,
                           {(l, t): c * (self._offset + l) for (l, t), c in self._coeffs.items()},
                           self._trunc)

    def d_z(self, j: int) -> "MultiSeries":
        """(1/2 pi i) d/dz_j, i.e. zeta_j d/dzeta_j."""
        if not 0 <= j < self._rank:
            raise InputError(f"no zeta variable with index {j}")
        return MultiSeries(self._rank, self._offset,
                           {(l, t): c * t[j] for (l, t), c in self._coeffs.items()},
                           self._trunc)

    def restrict_zeta(self) -> "MultiSeries":
        """Set every zeta to 1 (rank becomes 0)."""
        return MultiSeries(0, self._offset, _sum_layers(self._coeffs), self._trunc)

    # arithmetic
    def _align(self, other: "MultiSeries") -> tuple["MultiSeries", "MultiSeries"]:
        self._check_rank(other)
        lo = min(self._offset, other._offset)
        return self.rebase(lo), other.rebase(lo)

    def __add__(self, other):
        if not isinstance(other, MultiSeries):
            other = MultiSeries.constant(as_fraction(other), self._rank, self._trunc)
        self._check_rank(other)
        if (self._offset - other._offset).denominator != 1:
            # a zero summand only limits how far the other one is known
            if self.is_zero() or other.is_zero():
                z, s = (self, other) if self.is_zero() else (other, self)
                known = math.ceil(z._offset + z._trunc - s._offset)
                return s.truncate(max(0, known))
        a, b = self._align(other)
        out = dict(a._coeffs)
        for k, v in b._coeffs.items():
            out[k] = out.get(k, Fraction(0)) + v
        return MultiSeries(a._rank, a._offset, out, min(a._trunc, b._trunc))

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if not isinstance(other, MultiSeries):
            other = MultiSeries.constant(as_fraction(other), self._rank, self._trunc)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiSeries):
            return self.scale(other)
        self._check_rank(other)
        n = min(self._trunc, other._trunc)
        la = _layers(self._coeffs, n)
        lb = _layers(other._coeffs, n)
        out: dict[Key, Fraction] = {}
        for i, da in la.items():
            for j, db in lb.items():
                ell = i + j
                if ell >= n:
                    continue
                for ta, ca in da.items():
                    for tb, cb in db.items():
                        key = (ell, _add_t(ta, tb))
                        out[key] = out.get(key, Fraction(0)) + ca * cb
        return MultiSeries(self._rank, self._offset + other._offset, out, n)

    def __rmul__(self, other):
        return self.scale(other)

    def inverse(self) -> "MultiSeries":
        """Reciprocal; the lowest layer must be a single monomial c * zeta^t."""
        if self.is_zero():
            raise DomainError("cannot invert the zero series")
        first = min(l for l, _ in self._coeffs)
        base = self.rebase(self._offset) if first == 0 else MultiSeries(
            self._rank, self._offset + first,
            {(l - first, t): c for (l, t), c in self._coeffs.items()}, self._trunc - first)
        lead = base.layer(0)
        if len(lead) != 1:
            raise DomainError("leading q-layer is not a monomial; inverse is not a Laurent series")
        (t0, c0), = lead.items()
        n = base._trunc
        a = _layers(base._coeffs, n)
        inv_c0 = 1 / c0
        neg_t0 = tuple(-x for x in t0)
        b: dict[int, dict[tuple[int, ...], Fraction]] = {0: {neg_t0: inv_c0}}
        for ell in range(1, n):
            acc: dict[tuple[int, ...], Fraction] = {}
            for k in range(1, ell + 1):
                ak = a.get(k)
                bk = b.get(ell - k)
                if not ak or not bk:
                    continue
                for ta, ca in ak.items():
                    for tb, cb in bk.items():
                        t = _add_t(ta, tb)
                        acc[t] = acc.get(t, Fraction(0)) + ca * cb
            layer = {}
            for t, c in acc.items():
                if c:
                    layer[_add_t(t, neg_t0)] = -c * inv_c0
            b[ell] = layer
        out = {(l, t): c for l, d in b.items() for t, c in d.items()}
        return MultiSeries(self._rank, -base._offset, out, n)

    def __pow__(self, e: int):
        if not isinstance(e, int):
            raise InputError("only integer powers are supported")
        if e < 0:
            return self.inverse() ** (-e)
        result = MultiSeries.one(self._rank, self._trunc)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, MultiSeries):
            return NotImplemented
        if self._rank != other._rank:
            return False
        diff = self._offset - other._offset
        if diff.denominator != 1:
            return self.is_zero() and other.is_zero()
        a, b = self._align(other)
        n = min(a._trunc, b._trunc)
        return a.truncate(n)._coeffs == b.truncate(n)._coeffs

    def __repr__(self):
        return (f"MultiSeries(rank={self._rank}, offset={self._offset}, "
                f"terms={len(self._coeffs)}, trunc={self._trunc})")

    # numerics
    def eval(self, p: "SamplePoint | complex", zs: Iterable[complex] | None = None) -> complex:
        if isinstance(p, SamplePoint):
            tau, zs = p.tau, p.zs
        else:
            tau, zs = complex(p), tuple(zs or ())
        zs = tuple(complex(z) for z in zs)
        if len(zs) != self._rank:
            raise InputError(f"point has {len(zs)} z-coordinates, series has rank {self._rank}")
        if not self._coeffs:
            return 0j
        keys = list(self._coeffs)
        ells = np.array([float(self._offset + l) for l, _ in keys])
        expo = 2j * np.pi * tau * ells
        if self._rank:
            ts = np.array([t for _, t in keys], dtype=float)
            expo = expo + 2j * np.pi * (ts @ np.array(zs))
        cs = np.array([float(self._coeffs[k]) for k in keys])
        return complex(np.sum(cs * np.exp(expo)))

    # serialization
    def to_dict(self) -> dict:
        return {
            "offset": _frac_str(self._offset),
            "rank": self._rank,
            "terms": [[l, list(t), _frac_str(c)] for (l, t), c in self.items()],
            "trunc": self._trunc,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: Mapping) -> "MultiSeries":
        try:
            rank = int(d["rank"])
            coeffs = {(int(l), tuple(int(x) for x in t)): Fraction(c) for l, t, c in d["terms"]}
            return cls(rank, Fraction(d["offset"]), coeffs, int(d["trunc"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed series document: {exc}") from exc

    @classmethod
    def from_json(cls, s: str) -> "MultiSeries":
        return cls.from_dict(json.loads(s))


def _layers(coeffs: Mapping[Key, Fraction], n: int) -> dict[int, dict[tuple[int, ...], Fraction]]:
    out: dict[int, dict[tuple[int, ...], Fraction]] = {}
    for (l, t), c in coeffs.items():
        if l < n:
            out.setdefault(l, {})[t] = c
    return out


def _sum_layers(coeffs: Mapping[Key, Fraction]) -> dict[Key, Fraction]:
    out: dict[Key, Fraction] = {}
    for (l, _), c in coeffs.items():
        out[(l, ())] = out.get((l, ()), Fraction(0)) + c
    return out


def series_add(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    return a + b


def series_mul(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    return a * b


@dataclass(frozen=True)
class SamplePoint:
    """A point (tau, z_1..z_m) and optionally an insertion coordinate w.

    When w is given it must avoid q_w = 1 and lie in the annulus
    |q| < |e^w| < |q|^-1.  Functions that need the narrower annulus
    |q| < |e^w| < 1 check it themselves.
    """
    tau: complex
    zs: tuple[complex, ...] = ()
    w: complex | None = None

    def __post_init__(self):
        object.__setattr__(self, "tau", complex(self.tau))
        object.__setattr__(self, "zs", tuple(complex(z) for z in self.zs))
        if self.tau.imag <= 0:
            raise DomainError(f"Im(tau) must be positive, got {self.tau}")
        if self.w is not None:
            w = complex(self.w)
            object.__setattr__(self, "w", w)
            lq = -2 * cmath.pi * self.tau.imag
            if not (lq < w.real < -lq):
                raise DomainError(f"|e^w| must lie strictly between |q| and 1/|q| (w={w})")
            if abs(cmath.exp(w) - 1) < 1e-14:
                raise DomainError("w is a pole (e^w = 1)")

    @property
    def q(self) -> complex:
        return cmath.exp(2j * cmath.pi * self.tau)


@dataclass(frozen=True)
class TruncationPolicy:
    n_q: int = 20
    tail_tol: float = 1e-17
    max_terms: int = 200_000

    def __post_init__(self):
        if self.n_q < 1:
            raise InputError("n_q must be at least 1")
        if not self.tail_tol > 0:
            raise InputError("tail_tol must be positive")


DEFAULT_POLICY = TruncationPolicy()


def pentagonal_euler(N: int) -> list[int]:
    """Coefficients of prod_{n>=1} (1 - q^n) up to q^(N-1)."""
    out = [0] * N
    k = 0
    while True:
        done = True
        for kk in ((k,) if k == 0 else (k, -k)):
            e = kk * (3 * kk - 1) // 2
            if e < N:
                out[e] += -1 if kk % 2 else 1
                done = False
        if done and k > 0:
            break
        k += 1
    return out


def eta(N: int) -> MultiSeries:
    """eta(tau) = q^(1/24) prod (1 - q^n), to N terms."""
    if N < 1:
        raise InputError("N must be at least 1")
    return MultiSeries.from_q_list(pentagonal_euler(N), Fraction(1, 24))


def _sigma1(n: int) -> int:
    s, d = 0, 1
    while d * d <= n:
        if n % d == 0:
            s += d
            if d * d != n:
                s += n // d
        d += 1
    return s


def colored_partitions(d: int, N: int) -> list[int]:
    """p_d(n) for n < N: coefficients of prod (1 - q^n)^(-d)."""
    p = [0] * N
    if N:
        p[0] = 1
    sig = [0] + [_sigma1(k) for k in range(1, N)]
    for n in range(1, N):
        # n p_d(n) = d sum_k sigma(k) p_d(n-k)
        p[n] = d * sum(sig[k] * p[n - k] for k in range(1, n + 1)) // n
    return p


def eta_inverse_pow(d: int, N: int) -> MultiSeries:
    """eta(tau)^(-d) with offset -d/24 and d-colored partition counts."""
    if N < 1:
        raise InputError("N must be at least 1")
    if d < 0:
        raise InputError("d must be nonnegative")
    if d == 0:
        return MultiSeries.one(0, N)
    return MultiSeries.from_q_list(colored_partitions(d, N), Fraction(-d, 24))


def with_rank(s: MultiSeries, rank: int) -> MultiSeries:
    """Embed a zeta-free series into zeta rank `rank`."""
    if s.zeta_rank == rank:
        return s
    if s.zeta_rank:
        raise InputError("can only lift zeta-free series")
    z = (0,) * rank
    return MultiSeries(rank, s.q_offset, {(l, z): c for (l, _), c in s.coeffs.items()}, s.trunc)
