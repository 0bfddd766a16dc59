"""Command-line interface for running verification experiments.

This module provides the ``levy-mp`` entry point.  Experiments are declared in
TOML files and run in batch; results are written as a JSON report, a CSV
scoreboard and a run_info.json holding the timestamp, version and thread count.

Available Commands:
    * levy-mp run <config>: Simulate, run every declared check and write the reports
    * levy-mp list-catalog: Print the catalog of symbol kinds with their parameters

Exit codes of ``run``:
    * 0: every conclusive check passed
    * 1: a check failed, or a quadrature or other runtime error occurred
    * 2: the experiment file or one of its parameters was rejected
    * 3: a simulated path blew up

Example::

    # Run the bundled mollified Borel drift experiment with 8 threads
    $ levy-mp run configs/stable_sde_borel.toml --threads 8 --out results/borel

    # The negative control exits with status 1
    $ levy-mp run configs/negative_control.toml

    # Show the symbol catalog
    $ levy-mp list-catalog

See Also:
    levy_mp.pipeline: The experiment runner
    levy_mp.config: Configuration settings (threads fall back to LEVY_MP_THREADS)
"""
import argparse
import logging
import sys
from typing import List, Optional

from levy_mp.catalog import list_catalog
from levy_mp.config import config
from levy_mp.exceptions import ConfigError, ParameterError, PreconditionError, SimulationBlowUp
from levy_mp.pipeline import Experiment

__all__ = ["main"]


def _run(args: argparse.Namespace) -> int:
    """Run one experiment file and return the exit code."""
    try:
        experiment = Experiment.from_file(args.config, args.out)
        experiment.run()
        out = experiment.write()
    except (ConfigError, ParameterError, PreconditionError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    except SimulationBlowUp as e:
        print(f"Error: {e} (path {e.path_index}, t={e.time:g})", file=sys.stderr)
        return 3
    except Exception as e:  # pylint: disable=broad-except
        print(f"Error: {e}", file=sys.stderr)
        return 1

    print(experiment.scoreboard.to_string(index=False))
    print(f"Successfully saved results to {out}")
    return experiment.exit_code


def main(argv: Optional[List[str]] = None):
    """Command-line interface for levy-mp.

    Exits with the code of the selected command.
    """
    parser = argparse.ArgumentParser(
        description="Monte Carlo and quadrature verification of martingale problems for Lévy-type operators"
    )
    # flags accepted by every subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--threads', type=int, default=None,
                        help='Worker threads (default: LEVY_MP_THREADS or 4)')
    common.add_argument('-v', '--verbose', action='store_true',
                        help='Log at DEBUG level on stderr')
    subparsers = parser.add_subparsers(dest='command', required=True)

    run_parser = subparsers.add_parser('run', parents=[common], help='Run an experiment file')
    run_parser.add_argument('config', type=str,
                            help='Path to the TOML experiment file')
    run_parser.add_argument('--out', type=str, default=None,
                            help='Output directory (default: [output] dir of the file, else "results")')

    subparsers.add_parser('list-catalog', parents=[common], help='List the symbol kinds of the catalog')

    args = parser.parse_args(argv)

    logging.basicConfig(stream=sys.stderr, level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    if args.threads is not None:
        if args.threads < 1:
            print("Error: --threads must be at least 1", file=sys.stderr)
            sys.exit(2)
        config.set(threads=args.threads)

    if args.command == 'list-catalog':
        print(list_catalog())
        sys.exit(0)

    sys.exit(_run(args))


if __name__ == '__main__':
    main()
