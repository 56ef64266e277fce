"""Command-line front end: ``coallab rates|simulate|verify|limits``.

Exit codes: 0 success, 1 a verification threshold failed, 2 bad
configuration.  Numbers are written with ``repr`` (shortest string that
round-trips the double), so identical inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import limits as L
from . import measures as M
from . import simulator as S
from . import stats as St
from .errors import CoalLabError
from .rates import rate_table
from .rng import SeedSpec

EXTERNAL_HEADER = ["replicate", "n", "sigma", "t_len", "tau", "y_at_sigma"]
CHAIN_HEADER = ["replicate", "step", "y", "x", "wait"]
BLOCK_HEADER = ["replicate", "t", "time", "blocks"]
RATES_HEADER = ["quantity", "b", "k", "value"]
LIMIT_HEADER = ["t", "cdf", "pdf"]

LAWS = ("sigma", "tlen", "y-sigma", "kingman-sigma", "kingman-tlen",
        "kingman-y-sigma", "exp", "bs-tlen", "bs-sigma")


def _num(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _add_measure(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--beta", nargs=2, type=float, metavar=("A", "B"),
                   help="Beta(A, B) measure")
    g.add_argument("--kingman", action="store_true", help="Kingman coalescent")
    g.add_argument("--density", metavar="NAME",
                   help=f"registered density: {', '.join(M.DENSITY_REGISTRY)}")
    p.add_argument("--c0", type=_positive_float, help="constant C0 of a density")
    p.add_argument("--alpha", type=float, help="index alpha of a density")


def _add_run(p: argparse.ArgumentParser, reps: int = 20000) -> None:
    p.add_argument("--n", type=_positive_int, required=True, help="sample size")
    p.add_argument("--reps", type=_positive_int, default=reps,
                   help=f"replicates (default {reps})")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--workers", type=_positive_int,
                   help="worker processes (default: COALLAB_WORKERS or CPU count)")
    p.add_argument("--out", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coallab",
        description="Exact rates, simulation and limit-law checks for "
                    "Lambda-n-coalescents.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="merger rates, total rates and X1 pmf as CSV")
    _add_measure(p)
    p.add_argument("--b", type=int, required=True, help="block count")
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="per-replicate CSV output")
    p.add_argument("what", choices=("external", "blockcount", "chain"))
    _add_measure(p)
    _add_run(p, reps=1000)
    p.add_argument("--sampler", choices=("direct", "cox"), default="direct",
                   help="external branch sampler (cox gives t_len only)")
    p.add_argument("--t-max", type=_positive_float, default=5.0)
    p.add_argument("--grid", type=_positive_int, default=St.BLOCK_GRID)

    p = sub.add_parser("verify", help="Monte Carlo checks as a JSON report")
    p.add_argument("what", choices=("sigma", "tlen", "blockcount", "ratios",
                                    "cox", "convergence", "small-n",
                                    "partition"))
    _add_measure(p)
    _add_run(p)
    p.add_argument("--mode", choices=St.MODES, default="auto",
                   help="limit regime for sigma/tlen/convergence")
    p.add_argument("--sampler", choices=("direct", "cox"), default="direct")
    p.add_argument("--t-max", type=_positive_float, default=5.0)
    p.add_argument("--grid", type=_positive_int, default=St.BLOCK_GRID)
    p.add_argument("--n-list", type=_positive_int, nargs="+",
                   help="sample sizes for convergence (default: --n only)")
    p.add_argument("--verifier", choices=("sigma", "tlen"), default="sigma")
    p.add_argument("--ecdf", metavar="PATH",
                   help="also write the ECDF grid of the first report as CSV")

    p = sub.add_parser("limits", help="tabulate a limit law")
    p.add_argument("action", choices=("tabulate",))
    p.add_argument("--law", choices=LAWS, required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--c0", type=_positive_float)
    p.add_argument("--mu1", type=_positive_float, help="rate of the exp law")
    p.add_argument("--beta", nargs=2, type=float, metavar=("A", "B"),
                   help="take alpha and c0 from Beta(A, B)")
    p.add_argument("--t-max", type=_positive_float, default=1.0)
    p.add_argument("--grid", type=_positive_int, default=101)
    p.add_argument("--out")
    return parser


def measure_from_args(args) -> M.CoalescentMeasure:
    if args.kingman:
        return M.kingman()
    if args.beta is not None:
        return M.beta(*args.beta)
    if args.c0 is None or args.alpha is None:
        raise CoalLabError("--density needs --c0 and --alpha")
    return M.density(args.density, args.c0, args.alpha)


def _write(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


# -- subcommands -------------------------------------------------------------

def cmd_rates(args) -> int:
    measure = measure_from_args(args)
    b = args.b
    table = rate_table(measure, max(b, 2))
    rows = [("lambda", b, k, table.lam(b, k)) for k in range(2, b + 1)]
    rows += [("g", m, "", table.total_rate(m)) for m in range(2, b + 1)]
    law = table.first_jump_law(b)
    rows += [("pmf", b, int(k), float(p)) for k, p in zip(law.ks, law.probs)]
    _write(args, _csv(RATES_HEADER, rows))
    return 0


def cmd_simulate(args) -> int:
    measure = measure_from_args(args)
    n = args.n
    table = rate_table(measure, n)
    if args.what == "external":
        if args.sampler == "cox":
            t = S.cox_batch(table, n, args.seed, args.reps, workers=args.workers)
            rows = (((i, n, "", t[i], "", "")) for i in range(args.reps))
        else:
            bt = S.external_branch_batch(table, n, args.seed, args.reps,
                                         workers=args.workers)
            rows = ((i, n, bt.sigma[i], bt.t_len[i], bt.tau[i],
                     bt.y_at_sigma[i]) for i in range(args.reps))
        _write(args, _csv(EXTERNAL_HEADER, rows))
        return 0
    rows = []
    if args.what == "chain":
        for i in range(args.reps):
            path = S.simulate_jump_chain(table, n, SeedSpec(args.seed, i))
            rows.append((i, 0, n, "", ""))
            rows += [(i, j + 1, path.y[j + 1], path.x[j], path.waits[j])
                     for j in range(path.tau)]
        _write(args, _csv(CHAIN_HEADER, rows))
        return 0
    if measure.is_kingman:
        scale = 1.0 / n
    else:
        St.resolve_mode(measure, "auto")
        scale = n ** (1.0 - measure.alpha)
    grid = np.linspace(0.0, args.t_max, args.grid)
    for i in range(args.reps):
        path = S.simulate_jump_chain(table, n, SeedSpec(args.seed, i))
        r = S.block_count_at(path, grid * scale)
        rows += [(i, grid[j], grid[j] * scale, r[j]) for j in range(args.grid)]
    _write(args, _csv(BLOCK_HEADER, rows))
    return 0


def _run_verify(args, measure) -> list[St.VerificationReport]:
    kw = {"workers": args.workers}
    n, reps, seed = args.n, args.reps, args.seed
    what = args.what
    if what == "sigma":
        return [St.verify_sigma(measure, n, reps, seed, mode=args.mode, **kw)]
    if what == "tlen":
        return [St.verify_tlen(measure, n, reps, seed, sampler=args.sampler,
                               mode=args.mode, **kw)]
    if what == "cox":
        return [St.verify_cox(measure, n, reps, seed, **kw)]
    if what == "ratios":
        return St.verify_ratios(measure, n, reps, seed, **kw)
    if what == "blockcount":
        return [St.verify_blockcount(measure, n, args.t_max, args.grid, reps,
                                     seed)]
    if what == "small-n":
        return St.verify_small_n(measure, n, reps, seed, **kw)
    if what == "partition":
        return [St.verify_partition_oracle(measure, n, reps, seed, **kw)]
    return St.convergence_table(measure, args.n_list or [n], reps, seed,
                                verifier=args.verifier, mode=args.mode, **kw)


def cmd_verify(args) -> int:
    measure = measure_from_args(args)
    reports = _run_verify(args, measure)
    doc = [r.to_dict() for r in reports]
    if args.what == "convergence":
        doc = {"reports": doc, "decreasing": St.is_decreasing(reports)}
    elif len(doc) == 1:
        doc = doc[0]
    _write(args, json.dumps(doc, indent=2) + "\n")
    if args.ecdf:
        first = next((r for r in reports if r.ecdf_grid is not None), None)
        if first is None:
            raise CoalLabError(f"verify {args.what} produces no ECDF grid")
        first.write_ecdf_csv(args.ecdf)
    return 0 if all(r.passed for r in reports) else 1


def _law_from_args(args) -> L.LimitLaw:
    alpha, c0 = args.alpha, args.c0
    if args.beta is not None:
        c0, alpha = M.c0_alpha(M.beta(*args.beta))
    name = args.law
    if name == "kingman-sigma":
        return L.kingman_sigma_limit()
    if name == "kingman-tlen":
        return L.kingman_t_limit()
    if name == "kingman-y-sigma":
        return L.kingman_y_sigma_limit()
    if name == "bs-tlen":
        return L.bs_t_limit()
    if name == "bs-sigma":
        return L.bs_sigma_limit()
    if name == "exp":
        if args.mu1 is None:
            raise CoalLabError("--law exp needs --mu1")
        return L.exp_limit(args.mu1)
    if alpha is None:
        raise CoalLabError(f"--law {name} needs --alpha (or --beta A B)")
    if name == "sigma":
        return L.sigma_limit(alpha)
    if name == "y-sigma":
        return L.y_sigma_limit(alpha)
    if c0 is None:
        raise CoalLabError("--law tlen needs --c0 (or --beta A B)")
    return L.t_limit(alpha, c0)


def cmd_limits(args) -> int:
    law = _law_from_args(args)
    t = np.linspace(0.0, args.t_max, args.grid)
    cdf, pdf = law.cdf(t), law.pdf(t)
    rows = ((t[i], cdf[i], pdf[i]) for i in range(len(t)))
    _write(args, _csv(LIMIT_HEADER, rows))
    return 0


COMMANDS = {"rates": cmd_rates, "simulate": cmd_simulate,
            "verify": cmd_verify, "limits": cmd_limits}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"coallab: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
