"""
Command line front end.

    ffscale run    --config lz.json --out results/
    ffscale verify --config lz.json [--json]
    ffscale sweep  --config lz.json --tref 10,40,160 --out results/ [--tff 2]

Exit codes: 0 success, 2 invalid scenario or arguments, 3 numerical
failure, 4 failed verification.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from ..errors import ConfigError, DomainError, NumericError
from .config import bundled, load_scenario
from .report import write_sweep_csv, write_trajectory_csv
from .sweep import sweep_adiabatic
from .verify import run, verify

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4

log = logging.getLogger("ffscale")


def _config_path(value):
    path = Path(value)
    if not path.exists() and not path.suffix:
        # bare names refer to the scenarios shipped with the package
        return bundled(value)
    return path


def _tref_list(text):
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty --tref list")
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="ffscale", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario and write CSV (and figures)")
    p.add_argument("--config", required=True, help="scenario file or bundled scenario name")
    p.add_argument("--out", required=True, type=Path, help="output directory")
    p.add_argument("--no-plots", action="store_true", help="skip the PNG figures")

    p = sub.add_parser("verify", help="run a scenario and check every invariant")
    p.add_argument("--config", required=True)
    p.add_argument("--json", action="store_true", help="print the report as JSON")

    p = sub.add_parser("sweep", help="adiabatic-limit sweep over reference durations")
    p.add_argument("--config", required=True)
    p.add_argument("--tref", required=True, type=_tref_list, help="ascending list, e.g. 10,40,160")
    p.add_argument("--tff", type=float, help="wall-time duration (default: the scenario's)")
    p.add_argument("--dt", type=float, help="wall-time step (default: the scenario's)")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--no-plots", action="store_true")
    return parser


def _cmd_run(args, scenario):
    result = run(scenario)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / scenario.csv_name
    write_trajectory_csv(result, csv_path, scenario.stride)
    summary = {"scenario": scenario.name, "population_deviation": result.population_deviation,
               **{k: v for k, v in result.metadata.items()}}
    (args.out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    written = [csv_path, args.out / "summary.json"]
    if scenario.plots and not args.no_plots:
        from .plots import plot_populations

        written.append(plot_populations(result, args.out / "populations.png",
                                        title=f"{scenario.name}: max deviation "
                                              f"{result.population_deviation:.2e}"))
    print(f"{scenario.name}: max population deviation {result.population_deviation:.3e}")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_verify(args, scenario):
    report = verify(scenario)
    if args.json:
        print(report.to_json())
    else:
        print("\n".join(report.lines()))
    return EXIT_OK if report.passed else EXIT_VERIFY


def _cmd_sweep(args, scenario):
    t_ff = args.tff if args.tff is not None else scenario.schedule.t_ff
    rows = sweep_adiabatic(scenario, args.tref, t_ff, dt=args.dt)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / "sweep.csv"
    write_sweep_csv(rows, csv_path)
    print(f"{'t_ref':>10} {'infidelity':>12} {'phase_bound':>12}")
    for r in rows:
        if r["error"]:
            print(f"{r['t_ref']:>10g}  error: {r['error']}")
        else:
            print(f"{r['t_ref']:>10g} {r['infidelity']:>12.4e} {r['phase_bound']:>12.4g}")
    print(f"wrote {csv_path}")
    if scenario.plots and not args.no_plots:
        from .plots import plot_sweep

        print(f"wrote {plot_sweep(rows, args.out / 'sweep.png')}")
    return EXIT_NUMERIC if any(r["error"] for r in rows) else EXIT_OK


COMMANDS = {"run": _cmd_run, "verify": _cmd_verify, "sweep": _cmd_sweep}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage, which matches the validation code
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        scenario = load_scenario(_config_path(args.config))
        return COMMANDS[args.command](args, scenario)
    except (ConfigError, ValueError) as exc:
        if isinstance(exc, DomainError):
            print(f"numeric error: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
