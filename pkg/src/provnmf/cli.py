"""Command-line front end.

Every subcommand prints one JSON report (``schema: 1``) on stdout and writes
factors as ``A.csv`` and ``W.csv`` into ``--out``. Exit codes: 0 success,
2 no factorization returned (not separable, unresolved, provably infeasible,
rejected by ``verify``), 3 infeasible or invalid parameters, 1 input/output
or parse errors.
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .approx import ApproxConfig, approx_nmf
from .errors import (BudgetExceededError, EpsTooLargeError, InfeasibleParamsError,
                     InvalidParamsError, NMFError, NoRobustLonersError,
                     NotSeparableError, ParseError, RankMismatchError,
                     RankTooHighError)
from .exact import Status, solve_general_nmf, solve_sf, verify_factorization
from .instances import build_gadget_2d, build_intermediate_simplex, gen_separable
from .matrix_io import parse_matrix_csv, write_matrix_csv
from .partitions import enumerate_hyperplane_partitions, enumerate_simplicial_partitions
from .robust import derive_params, solve_separable_robust
from .separable import solve_separable

EXIT_OK = 0
EXIT_IO = 1
EXIT_NO_FACTORIZATION = 2
EXIT_PARAMS = 3


class _Outcome(Exception):
    """Carries a non-success outcome and exit code up to :func:`main`."""

    def __init__(self, outcome, code, detail="", extra=None):
        super().__init__(detail)
        self.outcome = outcome
        self.code = code
        self.detail = detail
        self.extra = extra or {}


def default_seed():
    return int(os.environ.get("NMF_SEED", "0"))


def _write_factors(out, fact):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(out / "A.csv", fact.a)
    write_matrix_csv(out / "W.csv", fact.w)
    # report residuals as recomputed from the files just written
    return {"A": str(out / "A.csv"), "W": str(out / "W.csv")}


def _factor_fields(m, fact, out):
    files = _write_factors(out, fact)
    a = parse_matrix_csv(files["A"])
    w = parse_matrix_csv(files["W"])
    resid = m - a @ w
    return {"outcome": "Success", "inner_dim": int(fact.inner_dim),
            "residual_fro": float(np.linalg.norm(resid)),
            "residual_row_l1_max": float(np.abs(resid).sum(axis=1).max()),
            "files": files}


def cmd_separable(args):
    m = parse_matrix_csv(args.matrix)
    try:
        res = solve_separable(m, args.r, loner_tol=args.loner_tol, dup_tol=args.dup_tol,
                              backend=args.backend, n_jobs=args.threads)
    except NotSeparableError as exc:
        raise _Outcome("NotSeparable", EXIT_NO_FACTORIZATION, str(exc),
                       {"found_k": exc.found_k})
    out = _factor_fields(m, res.factorization, args.out)
    out["loner_rows"] = [int(i) for i in res.loner_row_indices]
    return out


def cmd_robust(args):
    m = parse_matrix_csv(args.matrix)
    p = derive_params(args.eps, args.alpha)
    try:
        res = solve_separable_robust(m, p, expected_r=args.r, backend=args.backend,
                                     n_jobs=args.threads)
    except NoRobustLonersError as exc:
        raise _Outcome("NotSeparable", EXIT_NO_FACTORIZATION, str(exc))
    out = _factor_fields(m, res.factorization, args.out)
    out.update({"robust_loners": [int(i) for i in res.robust_loners],
                "representatives": [int(i) for i in res.representatives],
                "found_r": res.found_r, "r_mismatch": res.r_mismatch,
                "residual_bound_row_l1": p.residual_bound,
                "d": p.d, "cluster_radius": p.cluster_radius})
    return out


def _exact_outcome(m, res, args):
    if res.status is Status.SUCCESS:
        out = _factor_fields(m, res.factorization, args.out)
        out["verified_tol"] = args.tol
        out["restarts_used"] = res.restarts_used
        return out
    raise _Outcome(res.status.value, EXIT_NO_FACTORIZATION, res.reason,
                   {"restarts_used": res.restarts_used,
                    "note": "Unresolved does not prove that no factorization exists"
                    if res.status is Status.UNRESOLVED else ""})


def cmd_sf(args):
    m = parse_matrix_csv(args.matrix)
    res = solve_sf(m, args.r, restarts=args.restarts, seed=args.seed, tol=args.tol)
    return _exact_outcome(m, res, args)


def cmd_nmf(args):
    m = parse_matrix_csv(args.matrix)
    res = solve_general_nmf(m, args.r, restarts_sf=args.restarts,
                            restarts_per_pair=args.restarts_per_pair,
                            max_pairs=args.max_pairs, seed=args.seed, tol=args.tol)
    out = _exact_outcome(m, res, args)
    out["budget_exceeded"] = res.budget_exceeded
    return out


def cmd_approx(args):
    m = parse_matrix_csv(args.matrix)
    cfg = ApproxConfig.default(args.eps, args.r, max_candidates=args.max_candidates)
    res = approx_nmf(m, args.r, args.eps, cfg)
    out = _factor_fields(m, res.factorization, args.out)
    out.update({"budget_exceeded": res.budget_exceeded,
                "n_candidates": res.n_candidates, "t0": res.t0,
                "delta": res.config.delta, "net_eps1": res.config.net_eps1,
                "net_eps2": res.config.net_eps2,
                "relative_residual": out["residual_fro"] / float(np.linalg.norm(m))})
    return out


def cmd_gen(args):
    out_dir = Path(args.out)
    if args.kind == "separable":
        inst = gen_separable(args.n, args.m, args.r, alpha_min=args.alpha_min,
                             noise_eps=args.noise, seed=args.seed)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_matrix_csv(out_dir / "M.csv", inst.m)
        write_matrix_csv(out_dir / "A_true.csv", inst.a_true)
        write_matrix_csv(out_dir / "W_true.csv", inst.w_true)
        return {"outcome": "Success", "alpha": inst.alpha, "r": inst.r,
                "anchor_rows": inst.anchor_rows, "files": {
                    "M": str(out_dir / "M.csv"), "A_true": str(out_dir / "A_true.csv"),
                    "W_true": str(out_dir / "W_true.csv")}}
    values = [float(v) for v in args.values.split(",")]
    if args.kind == "gadget":
        g = build_gadget_2d(values, args.eps_g)
        payload = g.to_json()
    else:
        inst = build_intermediate_simplex(values, args.d, args.eps_g)
        payload = inst.to_json()
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{args.kind}.json"
    path.write_text(json.dumps(payload, sort_keys=True))
    return {"outcome": "Success", "files": {"instance": str(path)}}


def cmd_enum_partitions(args):
    m = parse_matrix_csv(args.matrix)
    labs = enumerate_hyperplane_partitions(m, args.s)
    out = {"outcome": "Success", "n_hyperplane_partitions": len(labs)}
    if args.k is not None:
        parts = enumerate_simplicial_partitions(m, args.k, args.s, cap=args.cap)
        out["n_simplicial_partitions"] = len(parts)
    return out


def cmd_verify(args):
    m = parse_matrix_csv(args.matrix)
    a = parse_matrix_csv(args.a)
    w = parse_matrix_csv(args.w)
    rep = verify_factorization(m, a, w, args.tol)
    body = rep.to_dict()
    body["residual_row_l1_max"] = float(np.abs(m - a @ w).sum(axis=1).max())
    if not rep.ok:
        raise _Outcome("Rejected", EXIT_NO_FACTORIZATION, "verification failed", body)
    body["outcome"] = "Success"
    return body


def build_parser():
    parser = argparse.ArgumentParser(
        prog="provnmf", description="Nonnegative matrix factorization with guarantees.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--seed", type=int, default=default_seed(),
                       help="random seed (default: $NMF_SEED or 0)")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        if out:
            p.add_argument("--out", default=".", help="directory for A.csv and W.csv")

    p = sub.add_parser("separable", help="exact separable factorization")
    p.add_argument("matrix")
    p.add_argument("-r", type=int, required=True)
    p.add_argument("--loner-tol", type=float, default=1e-7)
    p.add_argument("--dup-tol", type=float, default=1e-9)
    p.add_argument("--backend", choices=["highs", "simplex"], default="highs")
    common(p)
    p.set_defaults(func=cmd_separable)

    p = sub.add_parser("robust", help="noise-tolerant separable factorization")
    p.add_argument("matrix")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("-r", type=int, default=None, help="expected inner dimension")
    p.add_argument("--backend", choices=["highs", "simplex"], default="highs")
    common(p)
    p.set_defaults(func=cmd_robust)

    for name, func, helptext in (("sf", cmd_sf, "simplicial factorization"),
                                 ("nmf", cmd_nmf, "general exact factorization")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("matrix")
        p.add_argument("-r", type=int, required=True)
        p.add_argument("--restarts", type=int, default=200)
        p.add_argument("--tol", type=float, default=1e-8)
        if name == "nmf":
            p.add_argument("--restarts-per-pair", type=int, default=50)
            p.add_argument("--max-pairs", type=int, default=20)
        common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("approx", help="approximate factorization by net search")
    p.add_argument("matrix")
    p.add_argument("-r", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--max-candidates", type=int, default=10**6)
    common(p)
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("gen", help="generate instances")
    p.add_argument("kind", choices=["separable", "gadget", "intermediate-simplex"])
    p.add_argument("-n", type=int, default=20)
    p.add_argument("-m", type=int, default=10)
    p.add_argument("-r", type=int, default=3)
    p.add_argument("--alpha-min", type=float, default=0.1)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--values", default="0.25,0.75", help="comma-separated values in [0, 1]")
    p.add_argument("-d", type=int, default=2)
    p.add_argument("--eps-g", type=float, default=0.01)
    common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("enum-partitions", help="count hyperplane/simplicial partitions")
    p.add_argument("matrix")
    p.add_argument("-s", type=int, required=True)
    p.add_argument("-k", type=int, default=None)
    p.add_argument("--cap", type=int, default=10**7)
    common(p, out=False)
    p.set_defaults(func=cmd_enum_partitions)

    p = sub.add_parser("verify", help="check a factorization")
    p.add_argument("matrix")
    p.add_argument("a")
    p.add_argument("w")
    p.add_argument("--tol", type=float, default=1e-8)
    common(p, out=False)
    p.set_defaults(func=cmd_verify)
    return parser


def _inputs(args):
    skip = {"func", "command", "seed"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    np.random.seed(args.seed)
    report = {"schema": 1, "command": args.command, "inputs": _inputs(args),
              "seed": args.seed, "residual_fro": None, "residual_row_l1_max": None}
    start = time.perf_counter()
    code = EXIT_OK
    try:
        report.update(args.func(args))
    except _Outcome as exc:
        report.update(exc.extra)
        report.update({"outcome": exc.outcome, "detail": exc.detail})
        code = exc.code
    except (InfeasibleParamsError, InvalidParamsError, EpsTooLargeError,
            RankMismatchError, RankTooHighError, BudgetExceededError) as exc:
        report.update({"outcome": "error", "error": type(exc).__name__, "detail": str(exc)})
        code = EXIT_PARAMS
    except (OSError, ParseError, NMFError, ValueError) as exc:
        report.update({"outcome": "error", "error": type(exc).__name__, "detail": str(exc)})
        code = EXIT_IO
    report["wall_time"] = time.perf_counter() - start
    print(json.dumps(report, sort_keys=True, default=str))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
