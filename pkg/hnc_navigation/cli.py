"""Command line interface of the hierarchical navigation control simulator."""

from __future__ import annotations

import argparse
import asyncio
import csv
import json
import logging
from pathlib import Path
import sys
from typing import TYPE_CHECKING, NoReturn

import colorlog
import numpy as np

from .clustering import StratumMode, StratumQuery, hc_2means, stratum_contains
from .configuration import Configuration
from .const import DEFAULT_ALPHA, EXIT_INVALID_INPUT, LOGGER
from .exceptions import HncError, ScenarioError
from .executor import async_run_batch, run_hnc
from .hierarchy import BinaryHierarchy, count_trees, enumerate_trees, nni_navigate
from .portal import PortalContext, portal_map
from .scenario import Scenario, error_messages, outcome_message

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .configuration import Points
    from .executor import RunResult

LOG_FORMAT = "%(log_color)s%(asctime)s %(levelname)s [%(name)s] %(message)s%(reset)s"
LOG_COLORS = {
    "DEBUG": "cyan",
    "INFO": "green",
    "WARNING": "yellow",
    "ERROR": "red",
    "CRITICAL": "bold_red",
}


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser reporting usage errors with the invalid input exit code."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID_INPUT, f"{self.prog}: error: {message}\n")


def _echo(text: str) -> None:
    sys.stdout.write(f"{text}\n")


def setup_logging(*, verbose: bool = False) -> None:
    """Attach a colored stderr handler to the package logger."""
    if not any(
        isinstance(handler.formatter, colorlog.ColoredFormatter)
        for handler in LOGGER.handlers
    ):
        handler = logging.StreamHandler()
        handler.setFormatter(
            colorlog.ColoredFormatter(
                LOG_FORMAT, datefmt="%Y-%m-%d %H:%M:%S", log_colors=LOG_COLORS
            )
        )
        LOGGER.addHandler(handler)
    LOGGER.setLevel(logging.DEBUG if verbose else logging.INFO)


def _points(text: str) -> Points:
    points = np.asarray(json.loads(text), dtype=float)
    if points.ndim != 2:
        raise ValueError(f"expected a list of coordinate lists, got {text}")
    return points


def write_trajectory(path: Path, result: RunResult, scenario: Scenario) -> None:
    """Write one CSV row per emitted step."""
    header = ["t"] + [
        f"x{label}_{axis}"
        for label in range(1, scenario.n + 1)
        for axis in range(1, scenario.dimension + 1)
    ]
    with path.open("w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(row.tolist() for row in result.trajectory)


def write_events(path: Path, result: RunResult) -> None:
    """Write one JSON object per event."""
    path.write_text(
        "".join(f"{json.dumps(event.as_dict())}\n" for event in result.events),
        encoding="utf-8",
    )


def write_stats(path: Path, result: RunResult) -> None:
    """Write the run statistics as a JSON object."""
    path.write_text(f"{json.dumps(result.stats.as_dict(), indent=2)}\n", encoding="utf-8")


def _output_path(path: Path, scenario: Scenario, *, batch: bool) -> Path:
    if not batch:
        return path
    return path.with_name(f"{path.stem}_{scenario.name}{path.suffix}")


def _write_outputs(
    args: argparse.Namespace, result: RunResult, scenario: Scenario, *, batch: bool
) -> None:
    if args.traj:
        write_trajectory(_output_path(args.traj, scenario, batch=batch), result, scenario)
    if args.events:
        write_events(_output_path(args.events, scenario, batch=batch), result)
    if args.stats:
        write_stats(_output_path(args.stats, scenario, batch=batch), result)


def _load(path: Path, args: argparse.Namespace) -> Scenario | None:
    try:
        return Scenario.from_file(path).with_overrides(
            dt=args.dt, perturb_seed=args.perturb
        )
    except ScenarioError as err:
        for line in error_messages(err):
            LOGGER.error("%s: %s", path, line)
        return None


def cmd_run(args: argparse.Namespace) -> int:
    """Run one scenario, or several in parallel, and write the output files."""
    batch = len(args.scenario) > 1
    codes: list[int] = []
    scenarios: list[Scenario] = []
    for path in args.scenario:
        if (scenario := _load(path, args)) is None:
            codes.append(EXIT_INVALID_INPUT)
        else:
            scenarios.append(scenario)
    if not batch:
        if not scenarios:
            return EXIT_INVALID_INPUT
        results: list[RunResult | BaseException] = [
            _run_single(scenarios[0], args)
        ]
    else:
        results = asyncio.run(
            async_run_batch(
                scenarios, args.jobs, stride=args.stride, step_events=args.step_events
            )
        )
    for scenario, result in zip(scenarios, results, strict=True):
        if isinstance(result, HncError):
            LOGGER.error("%s: %s", scenario.name, result)
            codes.append(EXIT_INVALID_INPUT)
        elif isinstance(result, BaseException):
            LOGGER.error("%s: unexpected exception", scenario.name, exc_info=result)
            codes.append(EXIT_INVALID_INPUT)
        else:
            _write_outputs(args, result, scenario, batch=batch)
            LOGGER.info(
                "%s: %s, %d trees deployed, %d transitions",
                scenario.name,
                outcome_message(result.outcome.name.lower()),
                result.stats.deployed_trees,
                result.stats.transitions,
            )
            codes.append(result.exit_code)
    return max(codes)


def _run_single(scenario: Scenario, args: argparse.Namespace) -> RunResult | BaseException:
    try:
        return run_hnc(scenario, stride=args.stride, step_events=args.step_events)
    except HncError as err:
        return err


def cmd_validate(args: argparse.Namespace) -> int:
    """Validate scenario files."""
    code = 0
    for path in args.scenario:
        try:
            Scenario.from_file(path)
        except ScenarioError as err:
            for line in error_messages(err):
                _echo(f"{path}: {line}")
            code = EXIT_INVALID_INPUT
        else:
            _echo(f"{path}: ok")
    return code


def cmd_cluster(args: argparse.Namespace) -> int:
    """Print the 2-means hierarchy of a point set."""
    _echo(hc_2means(_points(args.points)).to_newick())
    return 0


def cmd_stratum(args: argparse.Namespace) -> int:
    """Print whether a point set supports a tree."""
    points = _points(args.points)
    query = StratumQuery(
        config=Configuration(points, np.zeros(len(points))),
        tree=BinaryHierarchy.from_newick(args.tree),
        mode=StratumMode.INTERIOR if args.interior else StratumMode.CLOSED,
    )
    _echo(str(stratum_contains(query)).lower())
    return 0


def cmd_nni_path(args: argparse.Namespace) -> int:
    """Print the NNI navigation path between two trees, one tree per line."""
    for tree in nni_navigate(
        BinaryHierarchy.from_newick(args.source), BinaryHierarchy.from_newick(args.goal)
    ):
        _echo(tree.to_newick())
    return 0


def cmd_trees_count(args: argparse.Namespace) -> int:
    """Print the number of rooted binary trees over n labels."""
    _echo(str(len(enumerate_trees(args.n)) if args.enumerate else count_trees(args.n)))
    return 0


def cmd_portal(args: argparse.Namespace) -> int:
    """Print the portal configuration of a point set for an adjacent tree pair."""
    points = _points(args.points)
    radii = np.zeros(len(points)) if args.radii is None else json.loads(args.radii)
    context = PortalContext.from_trees(
        BinaryHierarchy.from_newick(args.source),
        BinaryHierarchy.from_newick(args.target),
        args.alpha,
    )
    portal = portal_map(Configuration(points, radii), context)
    _echo(json.dumps(portal.positions.tolist()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser."""
    parser = _ArgumentParser(
        prog="hnc", description="Hierarchical navigation control for disk robots."
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Log every control decision."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run scenarios and write output files.")
    run.add_argument(
        "--scenario", type=Path, nargs="+", required=True, help="Scenario JSON files."
    )
    run.add_argument("--traj", type=Path, help="Trajectory CSV output.")
    run.add_argument("--events", type=Path, help="Event JSONL output.")
    run.add_argument("--stats", type=Path, help="Statistics JSON output.")
    run.add_argument("--dt", type=float, help="Override the scenario time step.")
    run.add_argument(
        "--perturb", type=int, metavar="SEED", help="Kick the state once when stalled."
    )
    run.add_argument("--jobs", type=int, default=1, help="Parallel scenario runs.")
    run.add_argument(
        "--stride", type=int, default=1, help="Write every n-th step to the trajectory."
    )
    run.add_argument(
        "--step-events", type=int, default=0, help="Log a step event every n steps."
    )
    run.set_defaults(func=cmd_run)

    validate = commands.add_parser("validate", help="Validate scenario files.")
    validate.add_argument("--scenario", type=Path, nargs="+", required=True)
    validate.set_defaults(func=cmd_validate)

    cluster = commands.add_parser("cluster", help="Print the 2-means hierarchy.")
    cluster.add_argument("points", help="JSON list of coordinate lists.")
    cluster.set_defaults(func=cmd_cluster)

    stratum = commands.add_parser("stratum", help="Test stratum membership.")
    stratum.add_argument("tree", help="Tree in Newick form.")
    stratum.add_argument("points", help="JSON list of coordinate lists.")
    stratum.add_argument("--interior", action="store_true", help="Use strict tolerance.")
    stratum.set_defaults(func=cmd_stratum)

    nni_path = commands.add_parser("nni-path", help="Print the NNI navigation path.")
    nni_path.add_argument("source", help="Source tree in Newick form.")
    nni_path.add_argument("goal", help="Goal tree in Newick form.")
    nni_path.set_defaults(func=cmd_nni_path)

    trees_count = commands.add_parser("trees-count", help="Count rooted binary trees.")
    trees_count.add_argument("n", type=int, help="Number of leaves.")
    trees_count.add_argument(
        "--enumerate", action="store_true", help="Count by explicit enumeration."
    )
    trees_count.set_defaults(func=cmd_trees_count)

    portal = commands.add_parser("portal", help="Print a portal configuration.")
    portal.add_argument("source", help="Tree supported by the points.")
    portal.add_argument("target", help="NNI-adjacent tree.")
    portal.add_argument("points", help="JSON list of coordinate lists.")
    portal.add_argument("--radii", help="JSON list of radii, zero by default.")
    portal.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    portal.set_defaults(func=cmd_portal)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line interface and return the exit code."""
    args = build_parser().parse_args(argv)
    setup_logging(verbose=args.verbose)
    try:
        return args.func(args)
    except (HncError, ValueError) as err:
        LOGGER.error("%s", err)
        return EXIT_INVALID_INPUT
    except Exception:  # noqa: BLE001
        LOGGER.exception("Unexpected exception")
        return EXIT_INVALID_INPUT
