"""Command line front end.

    jtrace <command> --config FILE [--tol X] [--trunc N] [--out PATH] [--format json|csv]

Exit status: 0 on success, 1 when a verification fails, 2 on input errors.
"""
from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from .config import COMMANDS, RunConfig
from .eisenstein import TwistSpec, twisted_E
from .errors import DomainError, InputError, VerificationError
from .lattice import HSpec
from .jacobi import (e2_samples, fit_S_matrix, sample_points, t_matrix_expected, verify_E2,
                     verify_elliptic_perm, verify_twistedE_S, verify_twistedE_elliptic)
from .qseries import MultiSeries, SamplePoint
from .recursion import (Insertion, TraceRequest, reduce_charged, reduce_full, reduce_h_minus1,
                        reduce_L_minus2, reduce_neg_mode, two_point_reduce)
from .voa.family import family_trace_value
from .voa.fock import FockState, fock_two_point
from .voa.heisenberg import HeisenbergModule, square_oracle
from .weierstrass import twisted_P


def _cpx(x: complex) -> list[float]:
    return [float(complex(x).real), float(complex(x).imag)]


def _series_rows(s: MultiSeries) -> list[dict]:
    return [{"l": l, "q_power": str(s.q_offset + l), "zeta": " ".join(map(str, t)), "coefficient": str(c)}
            for (l, t), c in s.items()]


def _state_dict(st: FockState) -> list:
    return [[[list(f) for f in key], str(c)] for key, c in st.items()]


# commands


def cmd_expand(cfg: RunConfig) -> tuple[dict, list, bool]:
    M, hs, _ = cfg.module()
    v = cfg.monomial()
    s = reduce_full(v, M, hs, cfg.trunc)
    return {"command": "expand", "monomial": v.to_dict(), "series": s.to_dict()}, _series_rows(s), True


def _trace_value(cfg, M, hs, fam, v, p: SamplePoint) -> complex:
    if fam is not None and v.all_modes_one() and v.tail == "vacuum":
        return family_trace_value(fam, M.r, v, hs, p.tau, p.zs, tol=min(cfg.tol, 1e-12))
    return reduce_full(v, M, hs, cfg.trunc).eval(p)


def cmd_eval(cfg: RunConfig) -> tuple[dict, list, bool]:
    fn = cfg.get("function", {"name": "trace"})
    name = fn["name"]
    rows = []
    if name == "trace":
        M, hs, fam = cfg.module()
        v = cfg.monomial()
        pts = cfg.points(len(hs))
        for p in pts:
            rows.append({"tau": _cpx(p.tau), "z": [_cpx(z) for z in p.zs],
                         "value": _cpx(_trace_value(cfg, M, hs, fam, v, p))})
        params = {"monomial": v.to_dict()}
    else:
        mu = TwistSpec(tuple(fn.get("mu", [1])))
        order = int(fn.get("order", 2))
        pts = cfg.points(len(mu.mu))
        for p in pts:
            x = mu.pair(p.zs)
            if name == "twisted_E":
                val = twisted_E(order, p.tau, x)
            else:
                if p.w is None:
                    raise InputError("twisted_P needs a w coordinate on every point")
                val = twisted_P(order, p.w, p.tau, x, extended=bool(fn.get("extended", True)))
            row = {"tau": _cpx(p.tau), "z": [_cpx(z) for z in p.zs], "value": _cpx(val)}
            if p.w is not None:
                row["w"] = _cpx(p.w)
            rows.append(row)
        params = {"order": order, "mu": list(mu.mu)}
    payload = {"command": "eval", "function": name, "params": params, "values": rows}
    flat = [{"tau": f"{r['tau'][0]!r} {r['tau'][1]!r}",
             "z": ";".join(f"{z[0]!r} {z[1]!r}" for z in r["z"]),
             "re": repr(r["value"][0]), "im": repr(r["value"][1])} for r in rows]
    return payload, flat, True


def cmd_reduce(cfg: RunConfig) -> tuple[dict, list, bool]:
    M, hs, fam = cfg.module()
    spec = cfg.require("reduction")
    kind = spec["kind"]
    v = cfg.monomial()
    norms = M.norms
    out: dict = {"command": "reduce", "kind": kind}
    if kind == "neg_mode":
        form = reduce_neg_mode(int(spec.get("generator", 0)), int(spec.get("p", 1)), v, norms,
                               TwistSpec(tuple(spec.get("mu", []))))
    elif kind == "h_minus1":
        form = reduce_h_minus1(v, int(spec.get("generator", 0)), int(spec.get("h_index", 0)), norms)
    elif kind == "L_minus2":
        form = reduce_L_minus2(v, norms)
    else:
        if fam is None:
            raise InputError("charged reductions need a lattice module")
        form, source = reduce_charged(fam, spec.get("beta", [1] + [0] * (fam.rank - 1)),
                                      int(spec.get("p", 1)), hs)
        out["source_state"] = _state_dict(source)
    out["source_weight"] = form.source_weight
    out["terms"] = [{"coefficient": t.coefficient.to_dict(), "state": _state_dict(t.state),
                     "zero_modes": list(t.zero_modes)} for t in form.terms]
    if all(not t.coefficient.twisted and t.coefficient.kind != "P" for t in form.terms):
        s = form.series(M, hs, cfg.trunc)
        out["series"] = s.to_dict()
        rows = _series_rows(s)
    else:
        rows = [{"coefficient": json.dumps(t["coefficient"], sort_keys=True),
                 "state": json.dumps(t["state"]), "zero_modes": json.dumps(t["zero_modes"])}
                for t in out["terms"]]
    return out, rows, True


def cmd_verify(cfg: RunConfig) -> tuple[dict, list, bool]:
    check = cfg.require("check")
    n = int(cfg.get("samples", 10))
    m = int(cfg.get("m", 2))
    if check == "twistedE_S":
        rep = verify_twistedE_S(m, sample_points(cfg.seed, n), cfg.tol)
    elif check == "twistedE_elliptic":
        rep = verify_twistedE_elliptic(m, cfg.get("lambdas", list(range(-3, 4))),
                                       sample_points(cfg.seed, n), cfg.tol)
    elif check == "E2":
        gammas, taus = e2_samples(cfg.seed, n)
        rep = verify_E2(gammas, taus, cfg.tol)
    else:
        M, hs, fam = cfg.module()
        if fam is None:
            raise InputError("elliptic_perm needs a lattice module family")
        lam = cfg.get("lambda", [1] * len(hs))
        mu = cfg.get("mu", [0] * len(hs))
        _, rep = verify_elliptic_perm(fam, cfg.monomial(), lam, mu, hs,
                                      sample_points(cfg.seed, n, len(hs)), cfg.tol)
    d = rep.to_dict()
    return {"command": "verify", "report": d}, [
        {"check": d["check"], "max_residual": repr(d["max_residual"]), "pass": d["pass"]}], rep.passed


def cmd_fit(cfg: RunConfig) -> tuple[dict, list, bool]:
    M, hs, fam = cfg.module()
    if fam is None:
        raise InputError("fit-smatrix needs a lattice module family")
    if not len(hs):
        d = fam.rank
        hs = HSpec(tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d)))
    s = len(fam)
    nf = int(cfg.get("fit_points", 2 * s + 2))
    nv = int(cfg.get("val_points", s + 2))
    pts = sample_points(cfg.seed, nf + nv, len(hs))
    gamma = cfg.gamma()
    res = fit_S_matrix(fam, cfg.monomial(), gamma, hs, pts[:nf], pts[nf:], cfg.tol)
    out = {"command": "fit-smatrix", "fit": res.to_dict()}
    ok = res.passed
    if gamma == ((1, 1), (0, 1)):
        dev = float(np.max(np.abs(res.matrix - t_matrix_expected(fam))))
        out["expected_T_deviation"] = dev
        ok = ok and dev < cfg.tol
    rows = [{"row": r, "col": c, "re": repr(float(x.real)), "im": repr(float(x.imag))}
            for r, row in enumerate(res.matrix) for c, x in enumerate(row)]
    return out, rows, ok


def cmd_oracle(cfg: RunConfig) -> tuple[dict, list, bool]:
    M, hs, fam = cfg.module()
    if not isinstance(M, HeisenbergModule):
        raise InputError("the Fock oracle runs on heisenberg modules")
    kind = cfg.get("oracle", "one_point")
    if kind == "one_point":
        g = int(cfg.get("grade_cutoff", 6))
        v = cfg.monomial()
        a = square_oracle(v, M, hs, g)
        b = reduce_full(v, M, hs, g + 1)
        ok = a == b
        return ({"command": "oracle", "oracle": kind, "brute_force": a.to_dict(), "reduced": b.to_dict(),
                 "equal": ok}, _series_rows(a), ok)
    ins = cfg.require("insertions")
    g = int(cfg.get("grade_cutoff", 8))
    rows = []
    worst = 0.0
    for p in cfg.points(len(hs)):
        wa, wb = complex(*ins[0]["w"]), complex(*ins[1]["w"])
        a, b = ins[0]["generator"], ins[1]["generator"]
        req = TraceRequest(M, (Insertion(FockState.monomial([(a, 1)]), wa),
                               Insertion(FockState.monomial([(b, 1)]), wb)), tuple(hs))
        red = two_point_reduce(req, SamplePoint(p.tau, p.zs, wb - wa))
        brute = fock_two_point(a, b, M.norms, M.alpha_pairings(), M.half_norm(),
                               M.zeta_exponents(hs), p.tau, p.zs, cmath.exp(wb - wa), g)
        worst = max(worst, abs(red - brute))
        rows.append({"tau": _cpx(p.tau), "reduced": _cpx(red), "brute_force": _cpx(brute),
                     "difference": abs(red - brute)})
    ok = worst < cfg.tol
    return ({"command": "oracle", "oracle": kind, "max_difference": worst, "pass": ok, "points": rows},
            [{"tau": json.dumps(r["tau"]), "difference": repr(r["difference"])} for r in rows], ok)


HANDLERS = {"expand": cmd_expand, "eval": cmd_eval, "reduce": cmd_reduce, "verify": cmd_verify,
            "fit-smatrix": cmd_fit, "oracle": cmd_oracle}


def render(payload: dict, rows: list, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    fields = sorted({k for r in rows for k in r})
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jtrace", description="Trace functions of lattice and Heisenberg modules.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--tol", type=float, help="override the configured tolerance")
    ap.add_argument("--trunc", type=int, help="override the configured truncation")
    ap.add_argument("--out", help="write output here instead of stdout")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.command, args.config, args.tol, args.trunc)
        payload, rows, ok = HANDLERS[args.command](cfg)
    except (InputError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except VerificationError as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return 1
    text = render(payload, rows, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
