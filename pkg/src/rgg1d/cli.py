"""Command-line front end: ``rgg1d <command> [options]``.

Exit codes: 0 success, 1 invalid input, 2 a cross-check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

import numpy as np

from . import __version__, analytic, experiments, montecarlo, recursions
from .core import ModelParams, ParameterError, Variant, validate_params

CSV_COLUMNS = ["statistic", "n", "lambda", "r", "T", "a", "value", "stderr", "seed"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# --- serialization -------------------------------------------------------------


def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    return format(x, ".17g")


def to_json(obj, indent: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{to_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _flatten(prefix: str, value, out: list):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, out)
    elif isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool):
        out.append((prefix, value))


def to_csv(record: dict, rows: list[dict] | None) -> str:
    p = record["params"] or {}
    if rows is None:
        flat: list = []
        _flatten("", record["results"], flat)
        rows = [{"statistic": k, "value": v} for k, v in flat]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        full = {
            "n": p.get("n"),
            "lambda": p.get("lambda"),
            "r": p.get("r"),
            "T": p.get("T"),
            "a": None,
            "stderr": None,
            "seed": record["seed"],
        }
        full.update(row)
        writer.writerow(
            {
                k: "" if full.get(k) is None else (_num(full[k]) if isinstance(full[k], float) else full[k])
                for k in CSV_COLUMNS
            }
        )
    return buf.getvalue()


# --- helpers ----------------------------------------------------------------


def _params(args, n=None, r=None) -> ModelParams:
    return validate_params(
        ModelParams(
            Variant(args.model),
            args.n if n is None else n,
            args.lam,
            args.r if r is None else r,
            T=args.T,
            N=args.N,
        )
    )


def _pmf(p: recursions.Pmf) -> dict:
    out = {"pmf": {str(k): v for k, v in p.as_dict().items()}, "total": p.total(), "mean": p.mean()}
    if p.tail_bound:
        out["tail_bound"] = p.tail_bound
    return out


def _ints(text: str) -> list[int]:
    return [int(float(v)) for v in text.split(",") if v]


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _stat_options(args) -> dict:
    opts = {}
    for key in ("k", "m", "theta", "i"):
        if getattr(args, key, None) is not None:
            opts[key] = getattr(args, key)
    return opts


# --- commands ---------------------------------------------------------------


def cmd_exact(args):
    p = _params(args)
    n, lam, r = p.n, p.lam, p.r
    q = args.quantity
    if q == "connectivity":
        if p.variant is Variant.DOUBLE_EXPONENTIAL:
            return {"p_connected": analytic.double_exp_connectivity_prob(n, lam, r)}
        return {"p_connected": analytic.connectivity_prob(n, lam, r)}
    if q == "double-exp":
        return {"p_connected": analytic.double_exp_connectivity_prob(n, lam, r)}
    if q == "holes":
        h = analytic.hole_length_moments(n, lam, r)
        c = analytic.hole_count_moments(n, lam, r)
        return {
            "hole_length_mean": h.mean,
            "hole_length_variance": h.variance,
            "hole_count_mean": c.mean,
            "hole_count_variance": c.variance,
        }
    if q == "transforms":
        theta = args.theta if args.theta is not None else 0.0
        return {
            "theta": theta,
            "hole_length_laplace": analytic.hole_length_laplace(n, lam, r, theta),
            "hole_count_mgf": analytic.hole_count_mgf(n, lam, r, theta),
        }
    if q == "degree-limit":
        out = {"expected_count_limit": analytic.degree_count_limit(lam, r)}
        if args.k is not None:
            out["expected_count"] = analytic.degree_count_expectation(n, args.k, lam, r)
        return out
    if q == "span-interval":
        lo, hi = analytic.span_gumbel_interval(n, lam, args.alpha)
        return {"alpha": args.alpha, "lower": lo, "upper": hi}
    raise UsageError(f"unknown quantity {q!r}")


def cmd_limit(args):
    lam, r, tol = args.lam, args.r, args.tol
    q = args.quantity
    if q == "pc":
        v = analytic.connectivity_prob_limit(lam, r, tol)
        return {"p_connected_limit": v.value, "tail_bound": v.tail_bound, "terms_used": v.terms_used}
    if q == "theta":
        if args.s is not None:
            return {"s": args.s, "theta": recursions.theta_limit(args.s, lam, r, tol)}
        return _pmf(recursions.theta_pmf(lam, r, tol))
    if q == "components":
        return _pmf(recursions.component_pmf_limit(lam, r, tol))
    if q == "size-m":
        return {"m": args.m, **_pmf(recursions.size_m_component_pmf_limit(args.m, lam, r, tol))}
    raise UsageError(f"unknown quantity {q!r}")


def cmd_components(args):
    p = _params(args)
    if args.m is not None:
        return {"m": args.m, **_pmf(recursions.size_m_component_pmf(p.n, args.m, p.lam, p.r))}
    return _pmf(recursions.component_pmf(p.n, p.lam, p.r))


def cmd_redundant(args):
    p = _params(args)
    return {"method": args.method, **_pmf(recursions.redundant_pmf(p.n, p.lam, p.r, method=args.method))}


def cmd_simulate(args):
    p = _params(args)
    est = montecarlo.estimate(
        p,
        args.statistic,
        args.samples,
        args.seed,
        condition_on_connected=args.condition,
        gstar_method=args.gstar_method,
        **_stat_options(args),
    )
    res = {
        "statistic": est.statistic,
        "mean": est.mean,
        "stderr": est.stderr,
        "num_samples": est.num_samples,
        "num_drawn": est.num_drawn,
    }
    rows = [{"statistic": est.statistic, "value": est.mean, "stderr": est.stderr}]
    return res, rows


def cmd_sweep(args):
    n_values = _ints(args.n_values) if args.n_values else [args.n]
    a_values = _floats(args.a)
    table = experiments.threshold_sweep(args.lam, args.T, n_values, a_values, args.samples, args.seed)
    rows = [
        {
            "statistic": f"p_connected_{row['model']}",
            "n": row["n"],
            "r": row["r"],
            "a": row["a"],
            "value": row["estimate"],
            "stderr": row["stderr"],
        }
        for row in table
    ]
    return {"rows": table, "statistical": True}, rows


def cmd_trajectory(args):
    n_values = _ints(args.n_values) if args.n_values else [args.n]
    seeds = range(args.seed, args.seed + args.seeds)
    table = experiments.strong_law_trajectory(_params(args, n=n_values[-1]), n_values, seeds)
    keys = [k for k in table.rows[0] if k not in ("n", "seed")]
    medians = {str(n): {k: table.median(k, n) for k in keys} for n in n_values}
    rows = [{"statistic": f"median_{k}", "n": n, "value": medians[str(n)][k]} for n in n_values for k in keys]
    return {"medians": medians, "num_seeds": args.seeds, "statistical": True}, rows


def cmd_span_ks(args):
    fit = experiments.span_gumbel_ks(args.n, args.lam, args.samples, args.seed, threshold=args.ks_threshold)
    return {
        "ks_statistic": fit.ks_statistic,
        "threshold": args.ks_threshold,
        "pass": fit.passed,
        "median": fit.median,
        "coverage_95": fit.coverage_95,
    }


def cmd_restricted(args):
    n_values = _ints(args.n_values) if args.n_values else [args.n]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        table = experiments.restricted_graph_experiment(args.lam, args.r, args.a, n_values, args.samples, args.seed)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    rows = []
    for row in table:
        rows.append(
            {"statistic": "p_disconnected", "n": row["n"], "a": args.a, "value": row["estimate"], "stderr": row["stderr"]}
        )
        rows.append({"statistic": "union_bound", "n": row["n"], "a": args.a, "value": row["bound"]})
        rows.append({"statistic": "exact", "n": row["n"], "a": args.a, "value": row["exact"]})
    return {"a": args.a, "rows": table}, rows


def cmd_xcheck(args):
    from .xcheck import run_suite

    report = run_suite(args.seed, args.samples)
    rows = [
        {"statistic": c["name"], "value": c["mc"], "stderr": c["stderr"]} for c in report["comparisons"]
    ]
    return report, rows


COMMANDS = {
    "exact": cmd_exact,
    "limit": cmd_limit,
    "components": cmd_components,
    "redundant": cmd_redundant,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "trajectory": cmd_trajectory,
    "span-ks": cmd_span_ks,
    "restricted": cmd_restricted,
    "xcheck": cmd_xcheck,
}
SEEDED = {"simulate", "sweep", "trajectory", "span-ks", "restricted", "xcheck"}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--lambda", dest="lam", type=float, default=1.0)
    g.add_argument("--r", type=float, default=1.0)
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--T", type=float, default=None)
    g.add_argument("--N", type=int, default=None, help="G* parent sample size")
    g.add_argument("--model", choices=[v.value for v in Variant], default=Variant.EXPONENTIAL.value)
    g.add_argument("--samples", type=int, default=100_000)
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--tol", type=float, default=1e-12)
    g.add_argument("--format", choices=["json", "csv"], default="json")
    g.add_argument("--out", default=None, help="write output here instead of stdout")

    parser = _Parser(prog="rgg1d", description="One-dimensional exponential random geometric graphs.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("exact", parents=[common], help="closed-form finite-n quantities")
    p.add_argument(
        "quantity", choices=["connectivity", "double-exp", "holes", "transforms", "degree-limit", "span-interval"]
    )
    p.add_argument("--theta", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float, default=0.05)

    p = sub.add_parser("limit", parents=[common], help="n -> infinity limits")
    p.add_argument("quantity", choices=["pc", "theta", "components", "size-m"])
    p.add_argument("--s", type=int)
    p.add_argument("--m", type=int, default=1)

    p = sub.add_parser("components", parents=[common], help="component-count pmf")
    p.add_argument("--m", type=int, help="count only components of this size")

    p = sub.add_parser("redundant", parents=[common], help="redundant-node pmf given connectivity")
    p.add_argument("--method", choices=["exact", "recursion"], default="exact")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimate of a statistic")
    p.add_argument("--statistic", choices=sorted(montecarlo.STATISTICS), default="connected")
    p.add_argument("--condition", action="store_true", help="condition on connectivity")
    p.add_argument("--gstar-method", choices=["spacings", "sort"], default="spacings")
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--i", type=int)

    p = sub.add_parser("sweep", parents=[common], help="connectivity threshold sweep")
    p.add_argument("--a", default="0.5,1,1.5", help="comma-separated cutoff multipliers")
    p.add_argument("--n-values", help="comma-separated sizes (default: --n)")

    p = sub.add_parser("trajectory", parents=[common], help="strong-law ratio trajectories")
    p.add_argument("--n-values", help="comma-separated increasing sizes (default: --n)")
    p.add_argument("--seeds", type=int, default=200, help="number of consecutive seeds from --seed")

    p = sub.add_parser("span-ks", parents=[common], help="KS distance of the normalized span to Gumbel")
    p.add_argument("--ks-threshold", type=float, default=experiments.KS_THRESHOLD)

    p = sub.add_parser("restricted", parents=[common], help="disconnection of the restricted graph")
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--n-values", help="comma-separated sizes (default: --n)")

    sub.add_parser("xcheck", parents=[common], help="analytic-vs-MC cross-validation suite")
    return parser


def _echo_params(args) -> dict | None:
    try:
        return validate_params(
            ModelParams(Variant(args.model), args.n, args.lam, args.r, T=args.T, N=args.N)
        ).as_dict()
    except ParameterError:
        return {"model": args.model, "n": args.n, "lambda": args.lam, "r": args.r, "T": args.T, "N": args.N}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"rgg1d: error: {exc}", file=sys.stderr)
        return 1
    try:
        out = COMMANDS[args.command](args)
    except ParameterError as exc:
        print(f"rgg1d: error [{exc.code}] {exc.field}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, UsageError) as exc:
        print(f"rgg1d: error: {exc}", file=sys.stderr)
        return 1
    results, rows = out if isinstance(out, tuple) else (out, None)
    record = {
        "command": args.command,
        "params": _echo_params(args),
        "results": results,
        "seed": args.seed if args.command in SEEDED else None,
        "tool_version": __version__,
    }
    text = to_json(record) + "\n" if args.format == "json" else to_csv(record, rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "xcheck" and not results["passed"]:
        return 2
    return 0


def main() -> None:
    sys.exit(run())
