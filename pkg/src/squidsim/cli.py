"""Command-line surface: named scenarios and generic dataset subcommands.

Exit codes: 0 success, 2 configuration error, 3 convergence failure,
4 I/O error.  The environment variable SQUIDSIM_THREADS caps the linear
algebra thread count (applied before numpy is imported).
"""

import argparse
import os
import sys


def _apply_thread_override():
    threads = os.environ.get("SQUIDSIM_THREADS")
    if threads:
        for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, threads)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="squidsim",
        description="SQUID ring quantum dynamics: spectra, cat states, "
                    "phase-space fields, decoherence and squeezing.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key-value config file")
        p.add_argument("--dim", type=int, help="basis truncation override")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--format", choices=("csv", "json-bundle"),
                       default="csv", help="dataset emission format")

    p_scen = sub.add_parser("scenario", help="run a named built-in scenario")
    p_scen.add_argument("name", help="scenario name")
    add_common(p_scen)

    for cmd, desc in (
        ("spectrum", "eigenvalue sweep over bias flux"),
        ("eigenstates", "eigenstate wavefunctions at fixed bias"),
        ("wigner", "Wigner function of the configured state"),
        ("weyl", "Weyl function of the configured state"),
        ("evolve", "thermal-bath evolution of the configured state"),
        ("squeeze", "coherent-state squeezing runs (scenario alias)"),
    ):
        p = sub.add_parser(cmd, help=desc)
        add_common(p)
        if cmd in ("spectrum", "eigenstates"):
            p.add_argument("--levels", type=int, help="number of levels")
    return parser


def main(argv=None):
    _apply_thread_override()
    parser = _build_parser()
    args = parser.parse_args(argv)

    from .config import read_config
    from .errors import (ConfigError, ConvergenceError, SquidSimError,
                         TruncationError)
    from . import scenarios

    try:
        overrides = read_config(args.config) if args.config else {}
        if args.dim is not None:
            overrides["run.dim"] = str(args.dim)
        levels = getattr(args, "levels", None)
        if levels is not None:
            overrides["sweep.levels"] = str(levels)

        if args.command == "scenario":
            spec = scenarios.builtin_scenario(args.name, overrides)
            dataset = scenarios.run_scenario(spec)
        elif args.command == "squeeze":
            spec = scenarios.builtin_scenario("squeeze", overrides)
            dataset = scenarios.run_scenario(spec)
        else:
            spec = scenarios.ScenarioSpec.from_flat(overrides)
            runner = {
                "spectrum": scenarios.run_spectrum,
                "eigenstates": scenarios.run_eigenstates,
                "wigner": scenarios.run_wigner,
                "weyl": scenarios.run_weyl,
                "evolve": scenarios.run_evolve,
            }[args.command]
            dataset = runner(spec)
        written = scenarios.emit_dataset(dataset, args.out, args.format)
    except ConfigError as exc:
        print(f"squidsim: config error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, TruncationError) as exc:
        print(f"squidsim: convergence failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"squidsim: i/o error: {exc}", file=sys.stderr)
        return 4
    except SquidSimError as exc:
        print(f"squidsim: error: {exc}", file=sys.stderr)
        return 2

    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
