"""Command-line front end.

Every subcommand prints a JSON report to stdout (also written to
``--report`` when given) and writes its main artifact to ``--output``.
``lb-demo`` without ``--output`` prints its CSV curve instead of the report.
Files are replaced atomically, so a failed run never leaves a partial file.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import sys
from dataclasses import asdict
from typing import Optional, Sequence

from menusize import io
from menusize.core import Menu, menu_size, revenue_exact, revenue_mc
from menusize.dist import DEFAULT_LIMIT, JointDist, ProductDist, expand
from menusize.errors import MenuSizeError
from menusize.experiments import (bundle_price_curve, cc_deterministic, full_price_stats,
                                  simulate_public_coin)
from menusize.myerson import myerson_price
from menusize.oracle import DEFAULT_GUARD, LpStatus, opt_menu_lp
from menusize.simplify import PipelineDiagnostics, pipeline, pipeline_correlated
from menusize.srev import CompoundMenu, build_srev_auction, compound_revenue

DEFAULT_SEED = 20240101


def _epsilon(text: str) -> float:
    eps = float(text)
    if not (0 < eps < 1):
        raise argparse.ArgumentTypeError("epsilon must lie in (0, 1)")
    return eps


def _emit(args, report: dict) -> None:
    text = io.dumps(report)
    if getattr(args, "report", None):
        io.write_text_atomic(args.report, text)
    if not getattr(args, "stdout_used", False):
        sys.stdout.write(text)


def cmd_myerson(args) -> dict:
    F = io.load_dist(args.input)
    if isinstance(F, JointDist):
        raise io.FormatError("myerson needs per-item distributions")
    items = [asdict(myerson_price(d)) | {"item": i} for i, d in enumerate(F.items)]
    return {"items": items, "srev": sum(r["revenue"] for r in items)}


def cmd_oracle(args) -> dict:
    F = io.load_dist(args.input)
    sol = opt_menu_lp(F if isinstance(F, JointDist) else expand(F, args.lp_guard), args.lp_guard)
    if sol.status is not LpStatus.OPTIMAL:
        raise MenuSizeError(f"LP status {sol.status.value}: {sol.message}")
    if args.output:
        io.write_json(args.output, io.menu_to_dict(sol.menu))
    return {"status": sol.status.value, "objective": sol.objective, "menu_size": menu_size(sol.menu)}


def cmd_simplify(args) -> dict:
    F = io.load_dist(args.input)
    start = io.load_menu(args.menu) if args.menu else None
    if isinstance(F, ProductDist):
        out, diag = pipeline(F, args.epsilon, start, args.expand_limit, args.lp_guard)
    else:
        if args.H is None:
            raise io.FormatError("a joint distribution needs --H")
        if start is None:
            sol = opt_menu_lp(F, args.lp_guard)
            if sol.status is not LpStatus.OPTIMAL:
                raise MenuSizeError(f"LP status {sol.status.value}: {sol.message}")
            start = sol.menu
        diag = PipelineDiagnostics(n=F.n, eps=args.epsilon)
        out = pipeline_correlated(F, args.H, args.epsilon, start, diag)
        diag.stage_revenue["final"] = revenue_exact(out, F)
        diag.entry_counts["final"] = {"size": menu_size(out)}
    if args.output:
        io.write_json(args.output, io.menu_to_dict(out))
    return diag.to_dict() | {"menu_size": menu_size(out)}


def cmd_srev_build(args) -> dict:
    F = io.load_dist(args.input)
    if isinstance(F, JointDist):
        raise io.FormatError("srev-build needs per-item distributions")
    C, report = build_srev_auction(F, args.epsilon)
    if args.output:
        io.write_json(args.output, io.compound_to_dict(C))
    rev, se = compound_revenue(C, F, "auto", args.samples, args.seed, args.expand_limit)
    return report.to_dict() | {"revenue": rev, "stderr": se}


def cmd_eval(args) -> dict:
    F = io.load_dist(args.input)
    M = io.load_any_menu(args.menu)
    if isinstance(M, CompoundMenu):
        if isinstance(F, JointDist):
            raise io.FormatError("compound menus are evaluated on per-item distributions")
        rev, se = compound_revenue(M, F, args.mode, args.samples, args.seed, args.expand_limit)
        return {"revenue": rev, "stderr": se, "mode": args.mode}
    if args.mode == "mc":
        if isinstance(F, JointDist):
            raise io.FormatError("mc mode samples per-item distributions")
        rev, se = revenue_mc(M, F, args.samples, args.seed)
        return {"revenue": rev, "stderr": se, "mode": "mc", "menu_size": menu_size(M)}
    J = F if isinstance(F, JointDist) else expand(F, args.expand_limit)
    return {"revenue": revenue_exact(M, J), "stderr": 0.0, "mode": "exact", "menu_size": menu_size(M)}


def _csv(rows, header) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_lb_demo(args) -> dict:
    curve = bundle_price_curve(args.n)
    text = _csv([(repr(p), repr(r)) for p, r in zip(curve.prices, curve.revenues)], ["price", "revenue"])
    gaps = []
    for n in args.gap_n:
        c = bundle_price_curve(n)
        gaps.append((n, c.best_price, c.best_revenue, c.gap, c.gap / n ** 0.5))
    if args.output:
        io.write_text_atomic(args.output, text)
    else:
        sys.stdout.write(text)
        args.stdout_used = True
    if args.gap_output:
        io.write_text_atomic(args.gap_output, _csv([tuple(map(repr, g)) for g in gaps],
                                                   ["n", "best_price", "best_revenue", "gap", "gap_over_sqrt_n"]))
    report = {"n": args.n, "best_price": curve.best_price, "best_revenue": curve.best_revenue,
              "welfare": args.n / 2, "gap": curve.gap,
              "gaps": [dict(zip(["n", "best_price", "best_revenue", "gap", "gap_over_sqrt_n"], g))
                       for g in gaps]}
    if args.n <= 20:
        stats = full_price_stats(Menu.from_arrays([[1.0] * args.n], [curve.best_price]), args.n)
        report["bundle_full_price_fraction"] = stats.fraction_full_price
    return report


def cmd_cc(args) -> dict:
    M = io.load_menu(args.menu)
    return {"menu_size": menu_size(M), "bits": cc_deterministic(M)}


def cmd_protocol_sim(args) -> dict:
    M = io.load_menu(args.menu)
    run = simulate_public_coin(M, args.value, args.trials, args.seed)
    return asdict(run) | {"trials": args.trials, "seed": args.seed, "value": args.value}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="menusize", description="Menu-size experiments for one additive buyer.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, *, inp=True, eps=False, out=True):
        sp = sub.add_parser(name, help=help_)
        if inp:
            sp.add_argument("--input", required=True, help="distribution JSON")
        if eps:
            sp.add_argument("--epsilon", type=_epsilon, required=True)
        if out:
            sp.add_argument("--output", help="where to write the main artifact")
        sp.add_argument("--report", help="also write the JSON report here")
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--samples", type=int, default=10**6)
        sp.add_argument("--expand-limit", type=int, default=DEFAULT_LIMIT)
        sp.add_argument("--lp-guard", type=int, default=DEFAULT_GUARD)
        sp.set_defaults(func=func)
        return sp

    add("myerson", cmd_myerson, "optimal posted price per item", out=False)
    add("oracle", cmd_oracle, "optimal menu by linear programming")
    sp = add("simplify", cmd_simplify, "simplify a near-optimal menu to a small one", eps=True)
    sp.add_argument("--menu", help="starting menu JSON (default: LP oracle)")
    sp.add_argument("--H", type=float, help="tail threshold for joint inputs")
    add("srev-build", cmd_srev_build, "compound auction near separate-selling revenue", eps=True)
    sp = add("eval", cmd_eval, "revenue of a menu or compound menu", out=False)
    sp.add_argument("--menu", required=True)
    sp.add_argument("--mode", choices=["exact", "mc", "auto"], default="auto")
    sp = add("lb-demo", cmd_lb_demo, "grand-bundle revenue curve on uniform {0,1}^n", inp=False)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--gap-n", type=int, nargs="*", default=[16, 64, 256])
    sp.add_argument("--gap-output", help="CSV file for the gap table")
    sp = add("cc", cmd_cc, "deterministic communication bits of a menu", inp=False, out=False)
    sp.add_argument("--menu", required=True)
    sp = add("protocol-sim", cmd_protocol_sim, "simulate the one-bit public-coin protocol",
             inp=False, out=False)
    sp.add_argument("--menu", required=True)
    sp.add_argument("--value", type=float, required=True)
    sp.add_argument("--trials", type=int, default=10**5)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = args.func(args)
    except (MenuSizeError, ValueError, OSError) as exc:
        print(f"menusize {args.command}: error: {exc}", file=sys.stderr)
        return 1
    _emit(args, report)
    return 0


def main() -> None:
    sys.exit(run())
