"""Command-line front end.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical
convergence failure, 4 file I/O failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .exceptions import ConfigError, DomainError, QuadratureError
from .scenario import PRESETS, load_scenario, preset, timed_run, write_outputs

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4

log = logging.getLogger("adreceiver")

_MODES = {"analytic": "analytic", "simulate": "simulate", "compare": "compare"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adreceiver",
        description="Channel response, simulation and error probability of an adsorption/desorption receiver.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "analytic": "evaluate the analytic model only",
        "simulate": "run the particle simulation (analytic column included for reference)",
        "compare": "simulate and report deviations from the analytic model",
        "ber": "error probability over a threshold sweep (simulated too when --trials is given)",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--scenario", type=Path, help="scenario INI file")
        src.add_argument("--preset", choices=sorted(PRESETS), help="built-in figure preset")
        p.add_argument("--variant", help="curve of a multi-curve preset, e.g. 'AD k1=20 k_1=5'")
        p.add_argument("--trials", type=int, help="number of Monte Carlo trials")
        p.add_argument("--seed", type=int, help="root seed of the per-trial random streams")
        p.add_argument("--out", type=Path, default=None, help="CSV output path (default <name>.csv)")
        p.add_argument("--threshold-min", type=int, help="lowest decision threshold of the sweep")
        p.add_argument("--threshold-max", type=int, help="highest decision threshold of the sweep")
        p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return parser


def _load(args):
    sc = load_scenario(args.scenario) if args.scenario else preset(args.preset)
    if args.variant:
        sc = sc.select(args.variant)
    if args.trials is not None and args.trials < 1:
        raise ConfigError(f"--trials must be >= 1, got {args.trials}")
    if args.command == "ber":
        mode = "compare" if args.trials is not None else "analytic"
        outputs = ("ber",)
    else:
        mode, outputs = _MODES[args.command], None
    return sc.with_run(mode=mode, trials=args.trials, seed=args.seed, threshold_min=args.threshold_min,
                       threshold_max=args.threshold_max, outputs=outputs)


def _progress(done, total):
    if done == total or done % max(1, total // 10) == 0:
        log.info("trial %d/%d", done, total)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        sc = _load(args)
        out = args.out or Path(f"{sc.name}.csv")
        result, wall = timed_run(sc, _progress)
        paths = write_outputs(result, out, wall)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"numerical integration did not converge: {exc} "
              f"(estimate {exc.estimate:.6g}, residual {exc.residual:.3g})", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        log.exception("unexpected failure")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    for name, path in paths.items():
        print(f"{name}: {path}")
    print(f"summary: {Path(out).with_suffix('.json')}  ({wall:.2f} s)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
