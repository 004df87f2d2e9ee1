"""Command-line front end.

Commands: lbp, loopseries, oracle, compare, theta, omega, matching, gen.
Exit codes: 0 success, 1 usage or I/O trouble, 2 LBP non-convergence,
3 identity-check failure.  LOOPCORRECT_THREADS caps worker parallelism
(all current computations run serially, which trivially respects any cap).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .exact import brute_force
from .exceptions import (
    GenerationError,
    IdentityError,
    LoopcorrectError,
    NotConvergedError,
)
from .generate import ising_model, make_topology
from .graph import parse_edge_list
from .graphpoly import (
    loop_count_bound,
    matching_polynomial,
    omega,
    omega_determinant_form,
    theta_at_beta1,
    theta_contraction_deletion,
    theta_direct,
)
from .lbp import LbpOptions, run_lbp, run_lbp_factor
from .loopseries import (
    loop_series_marginal,
    loop_series_marginal_factor,
    loop_series_z,
    loop_series_z_factor,
    truncated_series,
)
from .model import PairwiseModel, model_from_json, pairwise_to_json

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_IDENTITY = 3


def _thread_cap() -> int:
    raw = os.environ.get("LOOPCORRECT_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"LOOPCORRECT_THREADS must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ValueError("LOOPCORRECT_THREADS must be at least 1")
    return cap


def _load_model(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_json(fh.read())


def _load_graph(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def _lbp_opts(args) -> LbpOptions:
    return LbpOptions(max_iters=args.max_iters, tol=args.tol, damping=args.damping)


def _run_model_lbp(model, opts):
    if isinstance(model, PairwiseModel):
        return run_lbp(model, opts)
    return run_lbp_factor(model, opts)


def _emit_rows(rows, header, fmt, out):
    if fmt == "csv":
        out.write(",".join(header) + "\n")
        for row in rows:
            out.write(",".join(str(c) for c in row) + "\n")
    elif fmt == "json":
        out.write(json.dumps([dict(zip(header, row)) for row in rows], indent=1) + "\n")
    else:
        widths = [
            max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
            for i, h in enumerate(header)
        ]
        out.write("  ".join(h.ljust(w) for h, w in zip(header, widths)) + "\n")
        for row in rows:
            out.write(
                "  ".join(str(c).ljust(w) for c, w in zip(row, widths)) + "\n"
            )


def cmd_lbp(args, out=None) -> int:
    out = out or sys.stdout
    model = _load_model(args.model)
    res = _run_model_lbp(model, _lbp_opts(args))
    rows = [
        (i, f"{b[0]:.12g}", f"{b[1]:.12g}")
        for i, b in enumerate(res.node_beliefs)
    ]
    _emit_rows(rows, ["node", "belief_minus", "belief_plus"], args.format, out)
    out.write(f"log_Z_B = {res.log_z_b:.12g}\n")
    out.write(
        f"iterations = {res.iterations}  converged = {res.converged}  "
        f"residual = {res.residual:.3e}\n"
    )
    if not res.converged:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_oracle(args, out=None) -> int:
    out = out or sys.stdout
    model = _load_model(args.model)
    res = brute_force(model)
    rows = [
        (i, f"{m[0]:.12g}", f"{m[1]:.12g}") for i, m in enumerate(res.marginals)
    ]
    _emit_rows(rows, ["node", "p_minus", "p_plus"], args.format, out)
    out.write(f"log_Z = {res.log_z:.12g}\n")
    return EXIT_OK


def cmd_loopseries(args, out=None) -> int:
    out = out or sys.stdout
    model = _load_model(args.model)
    res = _run_model_lbp(model, _lbp_opts(args))
    if not res.converged:
        sys.stderr.write(
            f"LBP did not converge (residual {res.residual:.3e})\n"
        )
        return EXIT_NOT_CONVERGED
    pairwise = isinstance(model, PairwiseModel)
    report = loop_series_z(model, res) if pairwise else loop_series_z_factor(model, res)
    if args.terms:
        rows = []
        running: list[float] = []
        for s, r in report.terms:
            running.append(r)
            mask = sum(1 << e for e in s)
            rows.append((mask, len(s), f"{r:.12g}", f"{math.fsum(running):.12g}"))
        _emit_rows(rows, ["subset", "size", "r", "partial_sum"], args.format, out)
    if args.max_size is not None:
        for size, partial in truncated_series(report, args.max_size):
            out.write(f"partial_sum(size<={size}) = {partial:.12g}\n")
    out.write(f"series_total = {report.total:.12g}\n")
    out.write(f"log_Z_B = {report.log_z_b:.12g}\n")
    out.write(f"corrected log_Z = {report.log_z_b + math.log(report.total):.12g}\n")
    if args.target is not None:
        corr = (
            loop_series_marginal(model, res, args.target)
            if pairwise
            else loop_series_marginal_factor(model, res, args.target)
        )
        out.write(
            f"marginal[{args.target}] corrected = "
            f"({corr.corrected_marginal[0]:.12g}, {corr.corrected_marginal[1]:.12g})\n"
        )
    return EXIT_OK


def cmd_compare(args, out=None) -> int:
    out = out or sys.stdout
    model = _load_model(args.model)
    res = _run_model_lbp(model, _lbp_opts(args))
    if not res.converged:
        sys.stderr.write(
            f"LBP did not converge (residual {res.residual:.3e})\n"
        )
        return EXIT_NOT_CONVERGED
    pairwise = isinstance(model, PairwiseModel)
    exact = brute_force(model)
    report = loop_series_z(model, res) if pairwise else loop_series_z_factor(model, res)
    corrected_log_z = report.log_z_b + math.log(report.total)
    abs_err = abs(math.exp(corrected_log_z) - math.exp(exact.log_z))
    rel_err = abs_err / math.exp(exact.log_z)
    rows = [
        ("log_Z_exact", f"{exact.log_z:.12g}"),
        ("log_Z_B", f"{res.log_z_b:.12g}"),
        ("series_total", f"{report.total:.12g}"),
        ("log(Z_B*total)", f"{corrected_log_z:.12g}"),
        ("bethe_abs_error", f"{abs(res.log_z_b - exact.log_z):.6g}"),
        ("corrected_abs_error", f"{abs(corrected_log_z - exact.log_z):.6g}"),
        ("corrected_rel_error", f"{rel_err:.6g}"),
    ]
    _emit_rows(rows, ["quantity", "value"], args.format, out)

    n = model.node_count if pairwise else model.variable_count
    marg_rows = []
    worst = 0.0
    for i in range(n):
        corr = (
            loop_series_marginal(model, res, i)
            if pairwise
            else loop_series_marginal_factor(model, res, i)
        )
        before = abs(res.node_beliefs[i][1] - exact.marginals[i][1])
        after = abs(corr.corrected_marginal[1] - exact.marginals[i][1])
        worst = max(worst, after)
        marg_rows.append((i, f"{before:.6g}", f"{after:.6g}"))
    _emit_rows(
        marg_rows, ["node", "belief_error", "corrected_error"], args.format, out
    )
    if rel_err > args.check_tol or worst > args.check_tol:
        sys.stderr.write(
            f"exactness check failed: rel_err={rel_err:.3e} worst_marginal={worst:.3e}\n"
        )
        return EXIT_IDENTITY
    return EXIT_OK


def cmd_theta(args, out=None) -> int:
    out = out or sys.stdout
    g = _load_graph(args.graph)
    theta = (
        theta_contraction_deletion(g) if args.method == "cd" else theta_direct(g)
    )
    out.write(f"theta = {theta.poly}\n")
    if args.check:
        other = theta_direct(g) if args.method == "cd" else theta_contraction_deletion(g)
        if theta.poly != other.poly:
            raise IdentityError("direct and contraction-deletion theta disagree")
        theta_at_beta1(g)
        bound = loop_count_bound(g)
        out.write(
            f"loop_count = {bound.count}  bound = {bound.bound:.9g}  "
            f"attained = {bound.attained}\n"
        )
    return EXIT_OK


def cmd_omega(args, out=None) -> int:
    out = out or sys.stdout
    g = _load_graph(args.graph)
    w = omega(g)
    out.write(f"omega = {w.poly}\n")
    if args.check:
        omega_determinant_form(g)
        out.write("determinant-sum identity holds\n")
    return EXIT_OK


def cmd_matching(args, out=None) -> int:
    out = out or sys.stdout
    g = _load_graph(args.graph)
    alpha = matching_polynomial(g)
    out.write(f"alpha = {alpha.poly}\n")
    return EXIT_OK


def cmd_gen(args, out=None) -> int:
    out = out or sys.stdout
    rng = np.random.default_rng(args.seed)
    topo_args = args.topology[1:]
    g = make_topology(args.topology[0], topo_args, rng)
    model = ising_model(g, rng, coupling=args.coupling, field=args.field)
    text = pairwise_to_json(model)
    if args.output == "-":
        out.write(text + "\n")
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def _add_lbp_flags(p):
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--max-iters", type=int, default=10_000)


def _add_format_flag(p):
    p.add_argument("--format", choices=["table", "csv", "json"], default="table")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loopcorrect",
        description=(
            "Exact loop-series corrections to loopy belief propagation, plus "
            "the associated graph polynomials."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lbp", help="run LBP and print beliefs and log Z_B")
    p.add_argument("--model", required=True)
    _add_lbp_flags(p)
    _add_format_flag(p)
    p.set_defaults(func=cmd_lbp)

    p = sub.add_parser("oracle", help="exact brute-force log Z and marginals")
    p.add_argument("--model", required=True)
    _add_format_flag(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("loopseries", help="evaluate the loop series")
    p.add_argument("--model", required=True)
    p.add_argument("--target", type=int, default=None, help="marginal target node")
    p.add_argument("--max-size", type=int, default=None, help="truncation report")
    p.add_argument("--terms", action="store_true", help="dump the per-term table")
    _add_lbp_flags(p)
    _add_format_flag(p)
    p.set_defaults(func=cmd_loopseries)

    p = sub.add_parser("compare", help="oracle vs Bethe vs corrected values")
    p.add_argument("--model", required=True)
    p.add_argument("--check-tol", type=float, default=1e-8)
    _add_lbp_flags(p)
    _add_format_flag(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("theta", help="the bivariate subgraph-sum polynomial")
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--method", choices=["direct", "cd"], default="direct")
    p.add_argument("--check", action="store_true", help="run cross-identities")
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("omega", help="theta at xi=sqrt(-1) over (1-b)^(|E|-|V|)")
    p.add_argument("--graph", required=True)
    p.add_argument("--check", action="store_true")
    p.set_defaults(func=cmd_omega)

    p = sub.add_parser("matching", help="matching polynomial")
    p.add_argument("--graph", required=True)
    p.set_defaults(func=cmd_matching)

    p = sub.add_parser("gen", help="write a seeded random model JSON")
    p.add_argument(
        "topology",
        nargs="+",
        help="tree N | cycle N | grid R C | example1 | random N M",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--coupling", "-J", type=float, default=1.0)
    p.add_argument("--field", "-H", dest="field", type=float, default=0.5)
    p.add_argument("--output", "-o", default="-")
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _thread_cap()
        return args.func(args)
    except NotConvergedError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NOT_CONVERGED
    except IdentityError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IDENTITY
    except (OSError, ValueError, IndexError, GenerationError, LoopcorrectError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
