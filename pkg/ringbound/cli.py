"""
Command Line
``ringbound run <config>`` and ``ringbound validate <config>``
"""

import argparse
import logging
import platform
import sys
import time
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import scipy
import yaml

import ringbound
from ringbound.core.toolkit import RingBound
from ringbound.exceptions import NumericalFailure
from ringbound.scenario import Scenario
from ringbound.tasks import TaskOutput, run_task
from ringbound.utils.grid_io import write_grid
from ringbound.utils.output import format_value, write_json, write_manifest, write_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringbound",
        description="Ring-integral bounds, capacity oracles and equicontinuity certificates",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {ringbound.__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Validate and execute a scenario file")
    run.add_argument("config", type=Path, help="Scenario YAML file")
    run.add_argument("--out", type=Path, default=None, help="Output directory override")
    run.add_argument("--jobs", type=int, default=1, help="Maximum worker threads (default: 1)")
    run.add_argument("--verbose", action="store_true", help="Debug logging")

    check = sub.add_parser("validate", help="Validate a scenario file without running it")
    check.add_argument("config", type=Path, help="Scenario YAML file")
    check.add_argument("--verbose", action="store_true", help="Debug logging")
    return parser


def report_error(kind: str, reason: Any) -> None:
    """Single machine-parsable line on stderr."""
    text = " ".join(str(reason).split())
    print(f"error kind={kind} reason={text}", file=sys.stderr)


def write_outputs(out_dir: Path, result: TaskOutput) -> List[str]:
    """Write every table and grid; returns the file names in write order."""
    written = []
    for name, table in result.tables.items():
        write_table(out_dir / name, table.header, table.rows, table.meta)
        written.append(name)
    for name, (grid, binary) in result.grids.items():
        write_grid(out_dir / name, grid, binary=binary)
        written.append(name)
    write_json(out_dir / "summary.json", result.summary)
    written.append("summary.json")
    return written


def manifest_entries(
    scenario: Scenario,
    jobs: int,
    files: List[str],
    status: str,
    wall_time: float,
    timings: Dict[str, float],
) -> Dict[str, Any]:
    entries: Dict[str, Any] = {
        "task": scenario.task,
        "scenario": str(scenario.source),
        "status": status,
        "seed": scenario.seed,
        "profile": scenario.profile.name,
        "jobs": jobs,
        "ringbound_version": ringbound.__version__,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
        "pyyaml_version": yaml.__version__,
        "python_version": platform.python_version(),
        "wall_time_s": wall_time,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "files": ",".join(files),
    }
    entries.update({f"timing.{k}": v for k, v in timings.items()})
    tolerances = asdict(scenario.profile)
    tolerances.pop("name")
    entries.update({f"tolerance.{k}": v for k, v in tolerances.items()})
    entries["config"] = " ".join(
        yaml.safe_dump(scenario.data, sort_keys=True, default_flow_style=True).split()
    )
    return entries


def cmd_validate(args: argparse.Namespace) -> int:
    scenario = Scenario.load(args.config)
    print(f"ok task={scenario.task} profile={scenario.profile.name} seed={scenario.seed}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    scenario = Scenario.load(args.config)
    rb = RingBound(profile=scenario.profile, seed=scenario.seed, jobs=args.jobs)
    out_dir = scenario.output_dir(args.out)
    started = time.perf_counter()
    result = run_task(rb, scenario)
    wall = time.perf_counter() - started
    files = write_outputs(out_dir, result)
    status = "ok" if result.failure is None else "numerical-failure"
    write_manifest(
        out_dir / "manifest.txt",
        manifest_entries(scenario, args.jobs, files, status, wall, result.timings),
    )
    logger.info("wrote %d file(s) to %s in %s s", len(files), out_dir, format_value(wall))
    if result.failure is not None:
        report_error("numerical", result.failure)
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of the ``ringbound`` console script.

    Returns:
        0 on success, 2 on validation errors, 3 on numerical failures,
        4 on I/O errors
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    handler = cmd_run if args.command == "run" else cmd_validate
    try:
        return handler(args)
    except NumericalFailure as exc:
        report_error("numerical", exc)
        return EXIT_NUMERICAL
    except ValueError as exc:
        report_error("validation", exc)
        return EXIT_VALIDATION
    except OSError as exc:
        report_error("io", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
