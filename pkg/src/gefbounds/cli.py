"""Command line interface: ``gefbounds {catalog,measure,verify,roof,coeffs}``.

Exit codes: 0 success, 1 a check failed (violations, a non-converged roof
under ``--strict``, a failed coefficient step), 2 invalid input, 3 internal
error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import traceback
from dataclasses import replace
from itertools import combinations

import numpy as np

from . import catalog as cat
from .bounds import VIOLATED, state_digest
from .campaign import (FOUR_MIXED_INNER, FOUR_MIXED_ROOF, Campaign, run_campaign, summarize,
                       to_csv, to_json)
from .coefficients import derive_coefficients, fmt_coefficients, fmt_form
from .gef import (INNER_ROOF, MODIFIED, ORIGINAL, diagnostics, gef_mixed_four, gef_mixed_tri,
                  gef_pure_four, gef_pure_tri, pair_eof)
from .measures import _entropy, _pure_eof_batch
from .qmat import (DensityMatrix, EigenError, PureState, StateError, _ptrace, _reduce_pure,
                   label, pure_to_density)
from .roof import RoofConfig, minimize_convex_roof

OK, FAILED, INVALID, INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------------
# argument helpers


def parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.replace("x", ",").split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}; use e.g. 2,2,2") from None
    if len(dims) < 2 or any(d < 2 for d in dims):
        raise argparse.ArgumentTypeError("need at least two parties of dimension >= 2")
    return dims


def parse_rank(text: str) -> tuple[int, int]:
    try:
        lo, _, hi = text.partition("-")
        lo, hi = int(lo), int(hi or lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad rank {text!r}; use 2 or 2-8") from None
    if not 1 <= lo <= hi:
        raise argparse.ArgumentTypeError(f"bad rank range {text!r}")
    return lo, hi


def parse_ids(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _state_args(p: argparse.ArgumentParser, required: bool = True):
    p.add_argument("name", nargs="?", help=f"catalog state: {', '.join(cat.NAMES)}")
    p.add_argument("--state", metavar="FILE", help="read the state from a JSON state file")
    p.add_argument("--n", type=int, default=3, help="parties for ghz and dephased_ghz")
    p.add_argument("--p", type=float, default=1.0, help="Werner weight")
    p.add_argument("--theta", type=float, default=0.0, help="spectator angle theta")
    p.add_argument("--phi", type=float, default=0.0, help="spectator phase phi")
    p.add_argument("--sign", choices=("+", "-"), default="+")
    p.add_argument("--bell", choices=tuple(cat.BELL), default="phi+")
    p.set_defaults(state_required=required)


def _roof_args(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int,
                   help="master seed; required by random verify campaigns, else 0")
    p.add_argument("--roof-restarts", type=int, help="restarts of the outer roof search")
    p.add_argument("--roof-iters", type=int, help="evaluation budget per restart")
    p.add_argument("--inner-restarts", type=int, help="restarts of nested triple roofs")
    p.add_argument("--inner-iters", type=int, help="evaluation budget of nested roofs")


def _load(args):
    if args.state and args.name:
        raise UsageError("give either a catalog name or --state, not both")
    if args.state:
        return cat.load_state(args.state)
    if args.name:
        return cat.named_state(args.name, n=args.n, dims=getattr(args, "dims", None) or (2, 2, 2),
                           p=args.p, theta=args.theta, phi=args.phi, sign=args.sign,
                           which=args.bell)
    if args.state_required:
        raise UsageError("a catalog name or --state FILE is required")
    return None


def _budgets(args, n_parties: int, kind: str) -> tuple[RoofConfig, RoofConfig]:
    four_mixed = n_parties == 4 and kind == "mixed"
    roof = FOUR_MIXED_ROOF if four_mixed else RoofConfig()
    inner = FOUR_MIXED_INNER if four_mixed else INNER_ROOF
    seed = 0 if args.seed is None else args.seed
    roof = replace(roof, seed=seed,
                   restarts=args.roof_restarts or roof.restarts,
                   max_evals=args.roof_iters or roof.max_evals)
    inner = replace(inner, seed=seed,
                    restarts=args.inner_restarts or inner.restarts,
                    max_evals=args.inner_iters or inner.max_evals)
    return roof, inner


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, default=_jsonable) + "\n"


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _finite(x):
    return None if x is None or not math.isfinite(x) else float(x)


# ----------------------------------------------------------------------------
# subcommands


def cmd_catalog(args) -> int:
    if args.list:
        _emit("\n".join(cat.NAMES) + "\n", None)
        return OK
    state = _load(args)
    _emit(cat.dumps_state(state) + "\n", args.out)
    return OK


def _breakdown_json(b) -> dict:
    return {
        "total": b.total,
        "definition": b.definition,
        "estimate": b.is_estimate,
        "terms": [{"subsystem": label(t.subsystem), "kind": t.kind, "weight": str(t.weight),
                   "value": t.value, "estimate": t.is_estimate} for t in b.terms],
    }


def _roof_json(res, with_members: bool = False) -> dict:
    out = {"value": res.value, "estimate": res.is_estimate, "converged": res.converged,
           "restarts_used": res.restarts_used, "evaluations": res.evaluations}
    d = res.decomposition
    out["decomposition"] = {"probabilities": [float(p) for p in d.probabilities]}
    if with_members:
        out["decomposition"]["members"] = [[[float(z.real), float(z.imag)] for z in a]
                                           for a in d.amplitudes]
    return out


def _diag_json(dg) -> dict:
    return {"gamma2": _finite(dg.gamma2), "gamma3": _finite(dg.gamma3),
            "delta2": _finite(dg.delta2),
            "gamma2_triples": {label(t): _finite(v) for t, v in dg.gamma2_triples.items()}}


def measure(state, roof: RoofConfig | None = None, inner: RoofConfig | None = None) -> dict:
    """Entropies, pair EoFs and the GEF of ``state`` as a JSON-ready dict."""
    roof = roof or RoofConfig()
    inner = inner or INNER_ROOF
    pure = isinstance(state, PureState)
    dims, n = state.dims, len(state.dims)

    def reduced(sub):
        if pure:
            return _reduce_pure(state.amplitudes, dims, sub)
        return _ptrace(state.matrix, dims, sub) if len(sub) < n else state.matrix

    out = {"dims": list(dims), "kind": "pure" if pure else "mixed",
           "digest": state_digest(state), "entropies": {}, "eof": {}}
    for size in range(1, n + 1 if not pure else n):
        for sub in combinations(range(n), size):
            out["entropies"][label(sub)] = float(_entropy(reduced(sub)))
    for i, pair in enumerate(combinations(range(n), 2)):
        red = DensityMatrix(reduced(pair), tuple(dims[k] for k in pair))
        if pure and n == 2:
            value, est = out["entropies"]["A"], False
        else:
            value, est, _ = pair_eof(red, roof.child(100 + i))
        out["eof"][label(pair)] = {"value": value, "estimate": est}

    if n == 2:
        e = out["eof"]["AB"]
        out["gef"] = {"value": e["value"], "estimate": e["estimate"]}
    elif n == 3 and pure:
        out["gef_original"] = _breakdown_json(gef_pure_tri(state, roof, ORIGINAL))
        out["gef_modified"] = _breakdown_json(gef_pure_tri(state, roof, MODIFIED))
    elif n == 3:
        res = gef_mixed_tri(state, roof)
        out["gef_original"] = _roof_json(res)
        out["gef_modified"] = _roof_json(gef_mixed_tri(state, roof.child(1), MODIFIED))
        out["diagnostics"] = _diag_json(diagnostics(state, res.decomposition))
    elif n == 4 and pure:
        out["gef"] = _breakdown_json(gef_pure_four(state, inner))
    elif n == 4:
        res = gef_mixed_four(state, roof, inner)
        out["gef"] = _roof_json(res)
        out["diagnostics"] = _diag_json(diagnostics(state, res.decomposition, inner))
    return out


def cmd_measure(args) -> int:
    state = _load(args)
    roof, inner = _budgets(args, len(state.dims), "pure" if isinstance(state, PureState) else "mixed")
    _emit(_dump(measure(state, roof, inner)), args.out)
    return OK


FUNCTIONALS = ("gef", "gef-modified", "eof")


def roof_report(state, functional: str = "gef", roof: RoofConfig | None = None,
                inner: RoofConfig | None = None) -> dict:
    rho = state if isinstance(state, DensityMatrix) else pure_to_density(state)
    n = rho.n_parties
    roof = roof or RoofConfig()
    if functional == "eof" or n == 2:
        if n != 2:
            raise UsageError("the eof functional needs a two-party state")
        if functional == "gef-modified":
            raise UsageError("the modified definition needs three parties")
        res = minimize_convex_roof(rho, _pure_eof_batch, roof, batched=True)
        return {"functional": "eof", **_roof_json(res, True)}
    if n == 3:
        definition = MODIFIED if functional == "gef-modified" else ORIGINAL
        res = gef_mixed_tri(rho, roof, definition)
        out = {"functional": functional, **_roof_json(res, True)}
        if definition == ORIGINAL:
            out["diagnostics"] = _diag_json(diagnostics(rho, res.decomposition))
        return out
    if n == 4:
        if functional == "gef-modified":
            raise UsageError("the modified definition needs three parties")
        res = gef_mixed_four(rho, roof, inner or INNER_ROOF)
        out = {"functional": functional, **_roof_json(res, True)}
        out["diagnostics"] = _diag_json(diagnostics(rho, res.decomposition, inner or INNER_ROOF))
        return out
    raise UsageError(f"no GEF is defined for {n} parties")


def cmd_roof(args) -> int:
    state = _load(args)
    roof, inner = _budgets(args, len(state.dims), "mixed")
    report = roof_report(state, args.functional, roof, inner)
    _emit(_dump(report), args.out)
    if args.strict and not report["converged"]:
        print("roof search did not converge", file=sys.stderr)
        return FAILED
    return OK


def cmd_verify(args) -> int:
    state = _load(args)
    if state is not None:
        dims, kind = state.dims, "pure" if isinstance(state, PureState) else "mixed"
    else:
        if args.seed is None:
            raise UsageError("--seed is required when sampling random states")
        dims, kind = args.dims, args.kind
    roof, inner = _budgets(args, len(dims), kind)
    c = Campaign(seed=roof.seed, trials=args.trials, dims=dims, kind=kind, rank=args.rank,
                 ids=args.ineq, tol=args.tol, roof=roof, inner=inner,
                 gamma_terms=args.gamma_terms == "include", state=state)
    rows = run_campaign(c, args.workers)
    _emit(to_csv(rows) if args.format == "csv" else to_json(rows), args.out)
    s = summarize(rows)
    print(" ".join(f"{k}={v}" for k, v in s.items()), file=sys.stderr)
    return FAILED if s[VIOLATED] else OK


def cmd_coeffs(args) -> int:
    report = derive_coefficients()
    if args.format == "json":
        body = {"ok": report.ok, "notes": list(report.notes),
                "steps": [{"name": s.name, "derived": fmt_form(s.derived),
                           "expected": fmt_form(s.expected), "via": list(s.via), "ok": s.ok}
                          for s in report.steps]}
        _emit(_dump(body), args.out)
    else:
        lines = [f"{s.name:5s} {fmt_coefficients(s.derived):24s} {'PASS' if s.ok else 'FAIL'}"
                 f"  [{fmt_form(s.derived)}]" for s in report.steps]
        lines += [f"NOTE  {n}" for n in report.notes]
        _emit("\n".join(lines) + "\n", args.out)
    return OK if report.ok else FAILED


# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gefbounds",
                                     description="Generalized entanglement of formation bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="write a named special state as a state file")
    _state_args(p)
    p.add_argument("--dims", type=parse_dims, help="party dimensions for product")
    p.add_argument("--list", action="store_true", help="list the known names")
    p.add_argument("--out")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("measure", help="entropies, pair EoFs and GEF of one state")
    _state_args(p)
    p.add_argument("--dims", type=parse_dims, help="party dimensions for product")
    _roof_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("roof", help="convex-roof search with its decomposition")
    _state_args(p)
    p.add_argument("--dims", type=parse_dims, help="party dimensions for product")
    p.add_argument("--functional", choices=FUNCTIONALS, default="gef")
    p.add_argument("--strict", action="store_true", help="exit 1 unless the search converged")
    _roof_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_roof)

    p = sub.add_parser("verify", help="check the inequality registry on seeded states")
    _state_args(p, required=False)
    _roof_args(p)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--dims", type=parse_dims, default=(2, 2, 2))
    p.add_argument("--kind", choices=("pure", "mixed"), default="pure")
    p.add_argument("--rank", type=parse_rank, default=(2, 2), help="rank or range, e.g. 2-8")
    p.add_argument("--ineq", type=parse_ids, help="comma-separated inequality ids")
    p.add_argument("--tol", type=float, help="override the per-entry tolerance")
    p.add_argument("--gamma-terms", choices=("omit", "include"), default="omit",
                   help="also check the four-party mixed lower bound with gamma_3, delta_2")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("coeffs", help="re-derive the bound coefficients exactly")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_coeffs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INVALID if exc.code else OK
    try:
        return args.func(args)
    except EigenError as exc:
        print(f"gefbounds: internal error: {exc}", file=sys.stderr)
        return INTERNAL
    except (UsageError, StateError, OSError, ValueError) as exc:
        print(f"gefbounds: error: {exc}", file=sys.stderr)
        return INVALID
    except Exception:
        traceback.print_exc()
        return INTERNAL


if __name__ == "__main__":
    sys.exit(main())
