"""Command-line entry point: ``ibkit <subcommand> [options]``.

Exit status: 0 on success, 1 when an input fails validation, 2 when
``--strict`` is given and some solve did not converge.  Output is written
only after the whole table has been computed.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace

import numpy as np

from . import io as ibio
from .closedform import critical_betas, vector_gaussian_ib
from .coding import cr_rate, cran_region_point, remote_rd_point, wak_rate
from .dib import DIBSolveConfig, optimize_gaussian_dib, solve_dib_discrete, symmetric_scalar_dib
from .errors import IBKitError
from .ib_discrete import IBSolveConfig, log_gamma_grid, sweep_solutions
from .oracle import GridSpec, grid_ib_frontier
from .prob import LN2
from .variational import vib_gap

log = logging.getLogger("ibkit")


class NotConverged(Exception):
    pass


def _scale(args) -> float:
    return 1.0 / LN2 if args.units == "bits" else 1.0


def _to_nats(args, v: float) -> float:
    return v * LN2 if args.units == "bits" else v


def _gammas(args):
    return log_gamma_grid(args.gamma_min, args.gamma_max, args.gamma_count)


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _strict_check(args, flags, what: str):
    bad = [p for p, ok in flags if not ok]
    if bad and args.strict:
        raise NotConverged(f"{what} did not converge at {', '.join(f'{b:.9g}' for b in bad)}")
    if bad:
        log.warning("%s did not converge at %d point(s)", what, len(bad))


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_ib_curve(args) -> str:
    j = ibio.read_joint(args.input)
    cfg = IBSolveConfig(gamma=1.0, u_card=args.u_card, tol=args.tol, max_iter=args.max_iter,
                        n_restarts=args.restarts, rng_seed=args.seed)
    sols = sweep_solutions(j, _gammas(args), cfg, warm_start=args.warm_start, workers=args.workers)
    _strict_check(args, [(s.gamma, s.converged) for s in sols], "IB solver")
    k = _scale(args)
    rows = [(s.gamma, s.complexity_nats * k, s.relevance_nats * k, s.lagrangian * k, s.iterations, s.converged)
            for s in sols]
    return ibio.render_csv(["gamma", "complexity", "relevance", "lagrangian", "iterations", "converged"], rows)


def cmd_gauss_curve(args) -> str:
    m = ibio.read_gaussian_model(args.input)
    k = _scale(args)
    rows = []
    for g in _gammas(args):
        proj, pt = vector_gaussian_ib(m, float(g))
        rows.append((g, proj.active_dims, pt.complexity * k, pt.relevance * k))
    log.info("critical gammas: %s", critical_betas(m))
    return ibio.render_csv(["gamma", "active_dims", "complexity", "relevance"], rows)


def cmd_vib_eval(args) -> str:
    j = ibio.read_joint(args.input)
    e = ibio.read_encoder(args.encoder)
    v = ibio.read_components(args.components)
    r = vib_gap(j, e, v, args.beta)
    k = _scale(args)
    return ibio.render_csv(["l_ib", "l_vib", "gap", "decoder_kl", "prior_kl"],
                           [[x * k for x in (r.l_ib, r.l_vib, r.gap, r.decoder_kl, r.prior_kl)]])


def cmd_dib_curve(args) -> str:
    dj = ibio.read_distributed(args.input)
    u_cards = tuple([args.u_card] * dj.K) if args.u_card else None
    cfg = DIBSolveConfig(s=0.0, u_cards=u_cards, tol=args.tol, max_iter=args.max_iter,
                         n_restarts=args.restarts, rng_seed=args.seed)
    sols = [solve_dib_discrete(dj, replace(cfg, s=s)) for s in args.s_grid]
    _strict_check(args, [(s.s, s.converged) for s in sols], "DIB solver")
    k = _scale(args)
    rows = sorted(((s.s, s.sum_rate * k, s.delta * k) for s in sols), key=lambda r: (r[1], r[0]))
    return ibio.render_csv(["s", "sum_rate", "relevance"], rows)


def cmd_dib_gauss(args) -> str:
    k = _scale(args)
    if args.snr is not None:
        if args.input:
            raise IBKitError("give either --snr or --input, not both")
        rows = []
        for r in args.rate:
            vals = symmetric_scalar_dib(args.snr, _to_nats(args, r))
            rows.append((r,) + tuple(v * k for v in vals))
        return ibio.render_csv(["R", "delta_star", "delta_ub", "delta_lb"], rows)
    if not args.input:
        raise IBKitError("dib-gauss needs --snr or --input")
    m = ibio.read_gaussian_dib(args.input)
    rows = []
    for r in args.rate:
        base = m.with_point(m.omega, [_to_nats(args, r)] * m.K)
        val, _ = optimize_gaussian_dib(base, tied=args.tied)
        rows.append((r, val * k))
    return ibio.render_csv(["R", "delta"], rows)


def cmd_coding_derive(args) -> str:
    j = ibio.read_joint(args.input)
    pts = ibio.read_curve_csv(args.curve, args.units)
    cfg = IBSolveConfig(gamma=1.0, n_restarts=args.restarts, rng_seed=args.seed)
    hx = float(j.h_x())
    mi = float(j.h_x() - j.h_x_given_y())
    k = _scale(args)
    rows = []
    for p in pts:
        rate, d_remote = remote_rd_point(j, p)
        wak = wak_rate(j, rate, cfg).rate
        cr = cr_rate(j, hx - rate, cfg).rate if rate <= mi else math.nan
        rows.append((rate * k, d_remote * k, wak * k, cr * k))
    return ibio.render_csv(["R", "D_remote", "R_wak", "R_cr"], rows)


def cmd_cran_check(args) -> str:
    m = ibio.read_cran(args.input)
    k = _scale(args)
    join = lambda idx: ";".join(str(i + 1) for i in idx)
    rows = [(join(b.users), join(b.relays), b.bound * k) for b in cran_region_point(m)]
    return ibio.render_csv(["users", "relays", "bound"], rows)


def cmd_oracle_frontier(args) -> str:
    j = ibio.read_joint(args.input)
    pts = grid_ib_frontier(j, GridSpec(args.step, args.u_card), workers=args.workers)
    k = _scale(args)
    return ibio.render_csv(["complexity", "relevance"], [(p.complexity * k, p.relevance * k) for p in pts])


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--units", choices=("bits", "nats"), default="bits")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true", help="exit 2 if any solve fails to converge")
    p.add_argument("--output", "-o", help="write CSV here instead of standard output")
    p.add_argument("--verbose", "-v", action="store_true")
    return p


def _gamma_flags(p):
    p.add_argument("--gamma-min", type=float, default=1.0)
    p.add_argument("--gamma-max", type=float, default=100.0)
    p.add_argument("--gamma-count", type=int, default=20)


def _solver_flags(p, restarts=10):
    p.add_argument("--restarts", type=int, default=restarts)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=10_000)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="ibkit", description="Information bottleneck trade-off toolkit")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("ib-curve", parents=[common], help="sweep the discrete IB curve")
    p.add_argument("--input", required=True, help="joint JSON")
    _gamma_flags(p)
    _solver_flags(p)
    p.add_argument("--u-card", type=int)
    p.add_argument("--warm-start", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_ib_curve)

    p = sub.add_parser("gauss-curve", parents=[common], help="Gaussian IB curve")
    p.add_argument("--input", required=True, help="Gaussian model JSON")
    _gamma_flags(p)
    p.set_defaults(func=cmd_gauss_curve)

    p = sub.add_parser("vib-eval", parents=[common], help="variational bound and its gap")
    p.add_argument("--input", required=True, help="joint JSON")
    p.add_argument("--encoder", required=True, help="encoder JSON")
    p.add_argument("--components", required=True, help="decoder/prior JSON")
    p.add_argument("--beta", type=float, default=1.0)
    p.set_defaults(func=cmd_vib_eval)

    p = sub.add_parser("dib-curve", parents=[common], help="discrete distributed IB sweep")
    p.add_argument("--input", required=True, help="distributed model JSON")
    p.add_argument("--s-grid", type=_float_list, default=[0.1, 0.3, 1.0, 3.0])
    p.add_argument("--u-card", type=int)
    _solver_flags(p)
    p.set_defaults(func=cmd_dib_curve)

    p = sub.add_parser("dib-gauss", parents=[common], help="Gaussian distributed IB")
    p.add_argument("--snr", type=float, help="symmetric two-view scalar model")
    p.add_argument("--input", help="Gaussian views JSON")
    p.add_argument("--rate", type=_float_list, required=True, help="per-view rate(s), comma separated")
    p.add_argument("--tied", action="store_true", help="share one operating point across views")
    p.set_defaults(func=cmd_dib_gauss)

    p = sub.add_parser("coding-derive", parents=[common], help="remote, WAK and common-reconstruction rates")
    p.add_argument("--input", required=True, help="joint JSON")
    p.add_argument("--curve", required=True, help="curve CSV (in --units)")
    p.add_argument("--restarts", type=int, default=5)
    p.set_defaults(func=cmd_coding_derive)

    p = sub.add_parser("cran-check", parents=[common], help="oblivious-relay rate bounds")
    p.add_argument("--input", required=True, help="relay model JSON")
    p.set_defaults(func=cmd_cran_check)

    p = sub.add_parser("oracle-frontier", parents=[common], help="brute-force IB frontier")
    p.add_argument("--input", required=True, help="joint JSON")
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--u-card", type=int, default=2)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_oracle_frontier)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return 1 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        text = args.func(args)
    except IBKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.output:
        try:
            with open(args.output, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {args.output}: {exc.strerror}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())
