"""Numerical checks of transformation laws.

Every check returns a Report; the S-matrix fit returns a FitResult.  Sample
points come from a seeded generator and avoid the torsion points
(1/t)(Z + Z tau), t <= 12, of the elliptic variable.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .eisenstein import classical_E_eval, twisted_E
from .errors import DomainError, InputError, VerificationError
from .lattice import HSpec, to_vec
from .qseries import SamplePoint
from .voa.family import ModuleFamily, delta_module_shift, family_trace_value
from .voa.heisenberg import SquareMonomial

TORSION_ORDER = 12
TORSION_MARGIN = 1e-3
MIN_IMAG = 0.05

S = ((0, -1), (1, 0))
T = ((1, 1), (0, 1))
ST = ((0, -1), (1, 1))


@dataclass(frozen=True)
class JacobiMeta:
    weight: int
    index: tuple[tuple[Fraction, ...], ...]
    level: int = 1
    depth: tuple[int, ...] | None = None

    def __post_init__(self):
        idx = tuple(tuple(Fraction(x) for x in row) for row in self.index)
        n = len(idx)
        if any(len(row) != n for row in idx):
            raise InputError("index must be a square matrix")
        if any(idx[i][j] != idx[j][i] for i in range(n) for j in range(n)):
            raise InputError("index must be symmetric")
        if self.level < 1:
            raise InputError("level must be at least 1")
        object.__setattr__(self, "index", idx)

    @classmethod
    def from_gram(cls, weight: int, gram, level: int = 1) -> "JacobiMeta":
        return cls(weight, tuple(tuple(Fraction(x) / 2 for x in row) for row in gram), level)


@dataclass
class Report:
    check: str
    params: dict
    max_residual: float
    passed: bool
    details: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"check": self.check, "params": self.params,
                "max_residual": float(self.max_residual), "pass": bool(self.passed),
                "details": self.details}


@dataclass
class FitResult:
    matrix: np.ndarray
    fit_residual: float
    validation_residual: float
    gamma: tuple[tuple[int, int], tuple[int, int]]
    condition: float = 0.0
    passed: bool = False

    def __post_init__(self):
        (a, b), (c, d) = self.gamma
        if a * d - b * c != 1:
            raise InputError(f"gamma {self.gamma} does not have determinant 1")

    def to_dict(self) -> dict:
        return {"gamma": [list(r) for r in self.gamma],
                "matrix": [[[float(x.real), float(x.imag)] for x in row] for row in self.matrix],
                "fit_residual": float(self.fit_residual),
                "validation_residual": float(self.validation_residual),
                "condition": float(self.condition), "pass": bool(self.passed)}


def _cpx(x: complex) -> list[float]:
    return [float(x.real), float(x.imag)]


# sampling


def near_torsion(z: complex, tau: complex, order: int = TORSION_ORDER,
                 margin: float = TORSION_MARGIN) -> bool:
    """True if z is within margin of (1/t)(Z + Z tau) for some t <= order."""
    b = z.imag / tau.imag
    a = z.real - b * tau.real
    for t in range(1, order + 1):
        da = a * t - round(a * t)
        db = b * t - round(b * t)
        if abs(complex(da, 0) + db * tau) / t < margin:
            return True
    return False


def sample_points(seed: int, n: int, n_z: int = 1, re_tau=(-0.5, 0.5), im_tau=(0.8, 1.5),
                  re_z=(-0.5, 0.5), im_z=(-0.3, 0.3)) -> list[SamplePoint]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        tau = complex(rng.uniform(*re_tau), rng.uniform(*im_tau))
        zs = tuple(complex(rng.uniform(*re_z), rng.uniform(*im_z)) for _ in range(n_z))
        if any(near_torsion(z, tau) for z in zs):
            continue
        out.append(SamplePoint(tau, zs))
    return out


def random_gammas(seed: int, n: int, bound: int = 5) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        a, b, c, d = (int(x) for x in rng.integers(-bound, bound + 1, size=4))
        if a * d - b * c == 1:
            out.append(((a, b), (c, d)))
    return out


def moebius(gamma, tau: complex) -> complex:
    (a, b), (c, d) = gamma
    return (a * tau + b) / (c * tau + d)


# twisted Eisenstein series


def _et(k: int, tau: complex, z: complex, e0: float) -> complex:
    return complex(e0) if k == 0 else twisted_E(k, tau, z)


def verify_twistedE_S(m: int, samples: Sequence[SamplePoint], tol: float,
                      e0: float = -1.0) -> Report:
    """tau^-m Et_m(-1/tau, z/tau) = sum_k (-1)^(m-k)/(m-k)! Et_k(tau, z) (z/tau)^(m-k).

    e0 is the weight-0 member entering the sum (the constant -B_0/0!).
    """
    if m < 0:
        raise InputError("m must be nonnegative")
    details = []
    worst = 0.0
    for p in samples:
        tau, z = p.tau, p.zs[0]
        if near_torsion(z, tau, 1, 1e-12):
            raise DomainError(f"sample z = {z} lies in Z + Z tau")
        if m == 0:
            lhs = rhs = complex(e0)
        else:
            lhs = tau ** (-m) * twisted_E(m, -1 / tau, z / tau)
            rhs = sum((-1) ** (m - k) / math.factorial(m - k) * _et(k, tau, z, e0) * (z / tau) ** (m - k)
                      for k in range(m + 1))
        r = abs(lhs - rhs)
        worst = max(worst, r)
        details.append({"tau": _cpx(tau), "z": _cpx(z), "residual": r})
    return Report("twistedE_S", {"m": m, "tol": tol, "e0": e0}, worst, worst < tol, details)


def verify_twistedE_elliptic(m: int, lambdas: Sequence[int], samples: Sequence[SamplePoint], tol: float,
                             predict: Sequence[int] = (-4, 4), e0: float = -1.0) -> Report:
    """Fit Et_m(tau, z + lam tau) by a degree-m polynomial in lam and extrapolate.

    Each detail also records the residual of the closed law
    Et_m(tau, z + lam tau) = sum_k lam^(m-k)/(m-k)! Et_k(tau, z).
    """
    lambdas = sorted(set(int(l) for l in lambdas))
    if len(lambdas) < m + 1:
        raise InputError(f"need at least {m + 1} distinct lambdas for degree {m}")
    details = []
    worst = 0.0
    for p in samples:
        tau, z = p.tau, p.zs[0]
        for lam in list(lambdas) + list(predict):
            if near_torsion(z + lam * tau, tau, 1, 1e-12):
                raise DomainError("shifted sample lies in Z + Z tau")
        vals = np.array([_et(m, tau, z + l * tau, e0) if m else 1.0 + 0j for l in lambdas])
        V = np.vander(np.array(lambdas, dtype=float), m + 1, increasing=True).astype(complex)
        coef, *_ = np.linalg.lstsq(V, vals, rcond=None)
        fit_res = float(np.max(np.abs(V @ coef - vals)))
        pred_res = 0.0
        law_res = 0.0
        for lam in predict:
            actual = _et(m, tau, z + lam * tau, e0) if m else 1.0 + 0j
            guess = sum(c * lam ** i for i, c in enumerate(coef))
            pred_res = max(pred_res, abs(actual - guess) / max(1.0, abs(actual)))
            if m:
                law = sum(lam ** (m - k) / math.factorial(m - k) * _et(k, tau, z, e0) for k in range(m + 1))
                law_res = max(law_res, abs(actual - law) / max(1.0, abs(actual)))
        worst = max(worst, pred_res)
        details.append({"tau": _cpx(tau), "z": _cpx(z), "fit_residual": fit_res,
                        "prediction_residual": pred_res, "closed_law_residual": law_res})
    return Report("twistedE_elliptic", {"m": m, "lambdas": lambdas, "predict": list(predict), "tol": tol},
                  worst, worst < tol, details)


def verify_E2(gammas: Sequence, taus: Sequence[complex], tol: float) -> Report:
    """E_2(g tau) - (c tau + d)^2 E_2(tau) + c (c tau + d)/(2 pi i) for each pair."""
    if len(gammas) != len(taus):
        raise InputError("need one tau per gamma")
    details = []
    worst = 0.0
    for g, tau in zip(gammas, taus):
        (a, b), (c, d) = g
        if a * d - b * c != 1:
            raise InputError(f"{g} is not in SL2(Z)")
        tau = complex(tau)
        j = c * tau + d
        if j == 0:
            raise DomainError("c tau + d vanishes")
        gt = moebius(g, tau)
        r = abs(classical_E_eval(2, gt, tol / 10) - j * j * classical_E_eval(2, tau, tol / 10)
                + c * j / (2j * math.pi))
        worst = max(worst, r)
        details.append({"gamma": [list(g[0]), list(g[1])], "tau": _cpx(tau), "residual": r})
    return Report("E2", {"tol": tol, "count": len(taus)}, worst, worst < tol, details)


def e2_samples(seed: int, n: int, bound: int = 5, min_imag: float = MIN_IMAG) -> tuple[list, list]:
    """(gamma, tau) pairs with Im(gamma tau) >= min_imag so the Lambert series converges fast."""
    rng = np.random.default_rng(seed)
    gammas, taus = [], []
    pool = random_gammas(seed, 50 * n, bound)
    i = 0
    while len(gammas) < n:
        g = pool[i % len(pool)]
        i += 1
        tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.7, 1.5))
        if moebius(g, tau).imag < min_imag:
            continue
        gammas.append(g)
        taus.append(tau)
    return gammas, taus


# module families


def _check_commuting(fam: ModuleFamily, v: SquareMonomial, hs: HSpec) -> None:
    v.check_rank(fam.rank)
    if not v.all_modes_one():
        raise InputError("transformation checks take monomials with all modes equal to 1")
    for g, _, _ in v.factors:
        for h in hs.vectors:
            if fam.lattice.inner(fam.generators[g], h) != 0:
                raise InputError(f"generator {g} is not orthogonal to the h-vectors: h(n) v != 0")


def trace_vector(fam: ModuleFamily, v: SquareMonomial, hs: HSpec, tau: complex,
                 zs: Sequence[complex]) -> np.ndarray:
    return np.array([family_trace_value(fam, r, v, hs, tau, zs) for r in range(len(fam))])


def _automorphy(gamma, tau: complex, zs: Sequence[complex], G: np.ndarray, k: int) -> complex:
    (_, _), (c, d) = gamma
    j = c * tau + d
    z = np.array(zs, dtype=complex)
    return j ** k * cmath.exp(1j * math.pi * c * complex(z @ G @ z) / j)


def fit_S_matrix(fam: ModuleFamily, v: SquareMonomial, gamma, hs: HSpec,
                 fit_points: Sequence[SamplePoint], val_points: Sequence[SamplePoint],
                 tol: float, max_condition: float = 1e10) -> FitResult:
    """Fit A with J_r(g.(tau, z)) = (c tau + d)^k e(c G[z]/(2(c tau + d))) sum_l A_r^l J_l(tau, z).

    Residuals are relative to max(1, |J_r(g.(tau, z))|).
    """
    _check_commuting(fam, v, hs)
    gamma = tuple(tuple(int(x) for x in row) for row in gamma)
    s = len(fam)
    if len(fit_points) < s:
        raise InputError(f"need at least {s} fit points")
    fit_ids = {(p.tau, p.zs) for p in fit_points}
    if any((p.tau, p.zs) in fit_ids for p in val_points):
        raise InputError("validation points must be disjoint from fit points")
    G = np.array([[float(x) for x in row] for row in hs.gram(fam.lattice)], dtype=float).reshape(len(hs), len(hs))
    k = v.weight
    (a, b), (c, d) = gamma

    def rows(points):
        X, Y = [], []
        for p in points:
            j = c * p.tau + d
            gt = moebius(gamma, p.tau)
            gz = tuple(z / j for z in p.zs)
            X.append(trace_vector(fam, v, hs, p.tau, p.zs) * _automorphy(gamma, p.tau, p.zs, G, k))
            Y.append(trace_vector(fam, v, hs, gt, gz))
        return np.array(X), np.array(Y)

    X, Y = rows(fit_points)
    cond = float(np.linalg.cond(X))
    if not np.isfinite(cond) or cond > max_condition:
        raise VerificationError(f"ill-conditioned fit (condition number {cond:.3g}); choose other points")
    At, *_ = np.linalg.lstsq(X, Y, rcond=None)
    A = At.T

    def resid(X, Y):
        return float(np.max(np.abs(X @ A.T - Y) / np.maximum(1.0, np.abs(Y))))

    fr = resid(X, Y)
    Xv, Yv = rows(val_points)
    vr = resid(Xv, Yv)
    return FitResult(A, fr, vr, gamma, cond, vr < tol)


def t_matrix_expected(fam: ModuleFamily) -> np.ndarray:
    """diag e^(2 pi i (lambda_r - c/24)) for the lattice-VOA family."""
    c = fam.rank
    return np.diag([cmath.exp(2j * math.pi * float(fam.conformal_weight(r) - Fraction(c, 24)))
                    for r in range(len(fam))])


def verify_elliptic_perm(fam: ModuleFamily, v: SquareMonomial, lam: Sequence[int], mu: Sequence[int],
                         hs: HSpec, samples: Sequence[SamplePoint], tol: float,
                         margin: float = 10.0) -> tuple[list[int] | None, Report]:
    """Find r -> r' with J_r(tau, z + lam tau + mu) = e(-(G[lam] tau + 2 z.G lam)/2) J_r'(tau, z).

    The residual is normalized by the automorphy factor and max(1, |J_r'|).
    The best candidate must beat the runner-up by the given margin.
    """
    _check_commuting(fam, v, hs)
    lam = [int(x) for x in lam]
    mu = [int(x) for x in mu]
    if len(lam) != len(hs) or len(mu) != len(hs):
        raise InputError("lambda and mu need one entry per h-vector")
    G = np.array([[float(x) for x in row] for row in hs.gram(fam.lattice)], dtype=float).reshape(len(hs), len(hs))
    L = np.array(lam, dtype=float)
    s = len(fam)
    table = np.zeros((s, s))
    for p in samples:
        zs = np.array(p.zs, dtype=complex)
        shifted = tuple(zs + L * p.tau + np.array(mu, dtype=float))
        lhs = trace_vector(fam, v, hs, p.tau, shifted)
        # undo the automorphy factor before comparing
        lhs = lhs * cmath.exp(1j * math.pi * (float(L @ G @ L) * p.tau + 2 * complex(zs @ G @ L)))
        base = trace_vector(fam, v, hs, p.tau, tuple(zs))
        for r in range(s):
            for r2 in range(s):
                table[r, r2] = max(table[r, r2], abs(lhs[r] - base[r2]) / max(1.0, abs(base[r2])))
    perm = []
    ambiguous = False
    for r in range(s):
        order = np.argsort(table[r])
        best = int(order[0])
        if s > 1 and not table[r, best] * margin < table[r, order[1]]:
            ambiguous = True
        perm.append(best)
    ok = (not ambiguous and sorted(perm) == list(range(s))
          and all(table[r, perm[r]] < tol for r in range(s)))
    worst = float(max(table[r, perm[r]] for r in range(s)))
    details = [{"residuals": [float(x) for x in row]} for row in table]
    shift_perm = None
    if fam.is_lattice_voa:
        h = [sum(Fraction(l) * hv[i] for l, hv in zip(lam, hs.vectors)) for i in range(fam.rank)]
        shift_perm = delta_module_shift(fam, to_vec(h))
        ok = ok and shift_perm == perm
    params = {"lambda": lam, "mu": mu, "tol": tol, "ambiguous": ambiguous,
              "permutation": perm, "coset_shift": shift_perm}
    return (perm if not ambiguous else None), Report("elliptic_perm", params, worst, ok, details)
