"""Command line front end.

Subcommands: ``verify`` (oracle suites), ``propagate`` (trajectory CSV),
``compare`` (error-scaling grid), ``average`` (mean-anomaly average of a
registered term), ``terms`` (registry dump).  Exit codes: 0 pass, 1
assertion failure, 2 usage error.  Every report echoes its configuration
and seed; with ``--no-timestamp`` identical (config, seed) runs produce
byte-identical JSON.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .elements import (
    DelaunayState,
    ModelParams,
    PolarNodalState,
    cartesian_to_polar_nodal,
    load_state,
)
from .flows import (
    compare,
    average_over_mean_anomaly,
    default_leo_orbit,
    delaunay_to_polar_nodal,
    orbital_period,
    propagate_intermediary,
    propagate_main,
    write_trajectory_csv,
)
from .model import FamilyTag, find_term, term_registry
from .verify import DEFAULT_TOLS, SUITES, run_suite

USAGE_ERROR = 2


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _float_list(text: str) -> list:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}: {exc}")


def _int_list(text: str) -> list:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}: {exc}")


def _csv_rows(doc: dict):
    """Flatten a report into CSV rows (one table per command)."""
    command = doc.get("command")
    if command == "verify":
        yield ["suite", "check", "max", "p50", "p90", "p99", "tol", "pass"]
        for report in doc["reports"]:
            for check, worst in sorted(report["per_check_max"].items()):
                pct = report["percentiles"][check]
                yield [report["suite"], check, repr(worst), repr(pct["p50"]),
                       repr(pct["p90"]), repr(pct["p99"]), repr(report["tol"]),
                       report["pass"]]
    elif command == "terms":
        yield ["family", "order", "name", "chart"]
        for term in doc["terms"]:
            yield [term["family"], term["order"], term["name"], term["chart"]]
    elif command == "compare":
        yield ["order", "c20", "rms", "max", "status"]
        for row in doc["report"]["per_c20_error_table"]:
            yield [row["order"], repr(row["c20"]),
                   repr(row["rms"]) if row["rms"] is not None else "",
                   repr(row["max"]) if row["max"] is not None else "",
                   row["status"]]
    elif command == "average":
        yield ["term", "value"]
        yield [doc["term"], repr(doc["value"])]
    else:
        raise ValueError(f"no CSV form for command {command!r}")


def _emit(doc: dict, args) -> None:
    if not args.no_timestamp:
        doc["timestamp"] = datetime.now(timezone.utc).isoformat()
    if getattr(args, "output", "json") == "csv":
        import csv as _csv
        import io
        buffer = io.StringIO()
        writer = _csv.writer(buffer)
        writer.writerows(_csv_rows(doc))
        text = buffer.getvalue().rstrip("\n")
    else:
        text = json.dumps(doc, indent=2, sort_keys=True, default=str)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def _params_from(args) -> ModelParams:
    return ModelParams(mu=args.mu, re=args.re, c20=args.c20, epsilon=1.0)


def _load_state_or_die(path, params, parser):
    try:
        return load_state(path, params)
    except FileNotFoundError:
        parser.exit(USAGE_ERROR, f"error: state file not found: {path}\n")
    except json.JSONDecodeError as exc:
        parser.exit(USAGE_ERROR,
                    f"error: malformed JSON in {path}: line {exc.lineno} "
                    f"column {exc.colno}: {exc.msg}\n")
    except ValueError as exc:
        parser.exit(USAGE_ERROR, f"error: bad state file {path}: {exc}\n")


def _config_echo(args, fields) -> dict:
    return {name: getattr(args, name) for name in fields}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_verify(args, parser) -> int:
    params = _params_from(args)
    suites = SUITES if args.suite == "all" else (args.suite,)
    reports = []
    ok = True
    for suite in suites:
        report = run_suite(suite, args.n_points, args.seed, args.tol, params)
        reports.append(report)
        ok = ok and report["pass"]
        print(f"[{'PASS' if report['pass'] else 'FAIL'}] suite={suite} "
              f"max_scaled_residual={report['max_scaled_residual']:.3e} "
              f"tol={report['tol']:.1e}", file=sys.stderr)
    doc = {
        "command": "verify",
        "config": _config_echo(args, ("suite", "n_points", "seed", "tol",
                                      "mu", "re", "c20")),
        "seed": args.seed,
        "reports": reports,
        "pass": ok,
    }
    _emit(doc, args)
    return 0 if ok else 1


def cmd_propagate(args, parser) -> int:
    params = _params_from(args)
    if args.state_file:
        _, state = _load_state_or_die(args.state_file, params, parser)
    else:
        state = default_leo_orbit(params)
    tf = args.tf if args.tf is not None else args.orbits * orbital_period(state, params)
    if args.model == "main":
        traj = propagate_main(state, (0.0, tf), args.tol, params,
                              samples=args.samples)
    else:
        if isinstance(state, DelaunayState):
            pn0 = delaunay_to_polar_nodal(state, params)
        elif isinstance(state, PolarNodalState):
            pn0 = state
        else:
            pn0 = cartesian_to_polar_nodal(state)
        traj = propagate_intermediary(args.order, args.model.endswith("truncated"),
                                      pn0, (0.0, tf), args.tol, params,
                                      samples=args.samples)
    write_trajectory_csv(args.out, traj, params)
    print(f"wrote {args.out}: model={traj.model} samples={traj.t.size} "
          f"nfev={traj.stats['nfev']} energy_drift={traj.stats['energy_drift']:.3e}"
          + (f" n_drift={traj.stats['n_drift']:.3e}" if "n_drift" in traj.stats else ""),
          file=sys.stderr)
    return 0


def cmd_compare(args, parser) -> int:
    params = _params_from(args)
    if len(args.c20_sweep) < 2:
        parser.exit(USAGE_ERROR, "error: --c20-sweep needs at least two values\n")
    if args.orbit_file:
        _, state = _load_state_or_die(args.orbit_file, params, parser)
    else:
        state = default_leo_orbit(params)
    tf = args.tf if args.tf is not None else args.orbits * orbital_period(state, params)
    jobs = args.jobs if args.jobs else (os.cpu_count() or 1)
    report = compare(state, args.orders, args.c20_sweep, (0.0, tf), params,
                     samples=args.samples, seed=args.seed, jobs=jobs)
    failed = [row for row in report.per_c20_error_table if row["status"] != "ok"]
    doc = {
        "command": "compare",
        "config": _config_echo(args, ("orders", "c20_sweep", "tf", "orbits",
                                      "samples", "mu", "re", "c20")),
        "seed": args.seed,
        "report": report.to_dict(),
    }
    _emit(doc, args)
    all_failed = len(failed) == len(report.per_c20_error_table)
    return 1 if all_failed else 0


def cmd_average(args, parser) -> int:
    params = _params_from(args)
    try:
        field = find_term(args.term)
    except KeyError as exc:
        parser.exit(USAGE_ERROR, f"error: {exc}\n")
    if args.state_file:
        _, state = _load_state_or_die(args.state_file, params, parser)
    else:
        state = default_leo_orbit(params)
    value = average_over_mean_anomaly(field, state, params, nodes=args.nodes)
    doc = {
        "command": "average",
        "config": _config_echo(args, ("term", "nodes", "mu", "re", "c20")),
        "seed": args.seed,
        "term": args.term,
        "value": value,
    }
    _emit(doc, args)
    return 0


def cmd_terms(args, parser) -> int:
    rows = []
    for (family, order), fields in sorted(
            term_registry().items(),
            key=lambda kv: (kv[0][1], kv[0][0].value if kv[0][0] else "")):
        for field in fields:
            rows.append({
                "family": family.value if isinstance(family, FamilyTag) else None,
                "order": order,
                "name": field.name,
                "chart": field.chart,
            })
    doc = {"command": "terms", "config": {}, "seed": args.seed, "terms": rows}
    _emit(doc, args)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="j2lab",
        description="Verification, propagation and comparison bench for the "
                    "canonical perturbation machinery of the J2 main problem.")
    parser.add_argument("--config", help="TOML file with defaults for any flag")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=20190531,
                        help="64-bit seed for all randomness")
    common.add_argument("--mu", type=float, default=1.0)
    common.add_argument("--re", type=float, default=1.0)
    common.add_argument("--c20", type=float, default=-1.08262668e-3,
                        help="signed zonal coefficient (= -J2)")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--output", choices=("json", "csv"), default="json",
                        help="report format where both make sense")
    common.add_argument("--no-timestamp", action="store_true",
                        help="omit the timestamp for byte-identical reports")
    common.add_argument("--jobs", type=_positive_int, default=None,
                        help="parallel workers (default: available cores)")

    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", parents=[common],
                              help="run an oracle suite and exit 0 iff it passes")
    p_verify.add_argument("--suite", choices=SUITES + ("all",), required=True)
    p_verify.add_argument("--n-points", type=_positive_int, default=1000)
    p_verify.add_argument("--tol", type=float, default=None,
                          help=f"scaled residual budget (defaults: {DEFAULT_TOLS})")
    p_verify.set_defaults(func=cmd_verify)

    p_prop = sub.add_parser("propagate", parents=[common],
                            help="integrate a model and write a trajectory CSV")
    p_prop.add_argument("--model", choices=("main", "intermediary",
                                            "intermediary-truncated"),
                        default="main")
    p_prop.add_argument("--state-file", help="JSON state file (default: LEO orbit)")
    p_prop.add_argument("--tf", type=float, default=None, help="final time")
    p_prop.add_argument("--orbits", type=float, default=10.0,
                        help="span in orbital periods when --tf is absent")
    p_prop.add_argument("--tol", type=float, default=1e-12)
    p_prop.add_argument("--order", type=int, choices=(1, 2, 3), default=2,
                        help="intermediary truncation order")
    p_prop.add_argument("--samples", type=_positive_int, default=200)
    p_prop.set_defaults(func=cmd_propagate)
    p_prop._required_out = True

    p_cmp = sub.add_parser("compare", parents=[common],
                           help="truth-vs-intermediary error scaling grid")
    p_cmp.add_argument("--orbit-file", help="JSON state file (default: LEO orbit)")
    p_cmp.add_argument("--orders", type=_int_list, default=[1, 2])
    p_cmp.add_argument("--c20-sweep", type=_float_list,
                       default=[1e-3, 1e-4, 1e-5],
                       help="comma-separated |c20| magnitudes")
    p_cmp.add_argument("--tf", type=float, default=None)
    p_cmp.add_argument("--orbits", type=float, default=10.0)
    p_cmp.add_argument("--samples", type=_positive_int, default=128)
    p_cmp.set_defaults(func=cmd_compare)

    p_avg = sub.add_parser("average", parents=[common],
                           help="mean-anomaly average of a registered term")
    p_avg.add_argument("--term", required=True, help="registry name, see 'terms'")
    p_avg.add_argument("--state-file")
    p_avg.add_argument("--nodes", type=_positive_int, default=64)
    p_avg.set_defaults(func=cmd_average)

    p_terms = sub.add_parser("terms", parents=[common],
                             help="dump the (family, order) term registry")
    p_terms.set_defaults(func=cmd_terms)
    return parser


def _apply_config_file(argv, parser):
    """Fold TOML defaults under the command's section into the namespace."""
    if "--config" not in argv:
        return argv, None
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        parser.exit(USAGE_ERROR, "error: --config needs a path\n")
    with open(path, "rb") as handle:
        return [a for i, a in enumerate(argv) if i not in (idx, idx + 1)], \
            tomllib.load(handle)


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    argv, config = _apply_config_file(argv, parser)
    args = parser.parse_args(argv)
    if config:
        section = config.get(args.command, {})
        explicit = {a.lstrip("-").split("=")[0].replace("-", "_") for a in argv}
        for key, value in {**config.get("common", {}), **section}.items():
            attr = key.replace("-", "_")
            if hasattr(args, attr) and attr not in explicit:
                setattr(args, attr, value)
    if args.command == "propagate" and not args.out:
        parser.exit(USAGE_ERROR, "error: propagate requires --out CSV path\n")
    try:
        return args.func(args, parser)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
