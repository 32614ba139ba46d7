"""Command-line surface: run a scenario, verify a snapshot."""
import sys
from pathlib import Path
from typing import Optional

import typer
from loguru import logger
from typing_extensions import Annotated

from chain.errors import SnapshotError
from cli.errors import ScenarioError
from cli.runner import exit_code, run_scenario, verify_snapshot
from peers.errors import TopologyError

EXIT_SCHEMA_ERROR = 2

app = typer.Typer(help="Smart-contract access control for IoT on a deterministic local ledger.",
                  add_completion=False, no_args_is_help=True)


def configure_logging(verbose):
    """Send diagnostics to stderr; DEBUG when verbose."""
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "INFO",
               format="<level>{level: <7}</level> {name}:{line} {message}")


@app.command("run")
def run_command(
    scenario: Annotated[Path, typer.Argument(help="Scenario document (.scn, YAML)")],
    difficulty: Annotated[Optional[int], typer.Option(
        "--difficulty", min=0, help="Leading zero bits per block (overrides the scenario)")] = None,
    seed: Annotated[Optional[int], typer.Option(
        "--seed", min=0, help="Run seed (overrides the scenario)")] = None,
    out: Annotated[Path, typer.Option(
        "--out", help="Folder for runlog.jsonl and snapshot.json")] = Path("out"),
    strict_time: Annotated[Optional[bool], typer.Option(
        "--strict-time/--supplied-time",
        help="Contracts reason with block time instead of the caller's time")] = None,
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging")] = False,
):
    """Run a scenario; exit 1 on a failed expectation, 2 on a bad document, 3 on a timeout."""
    # pylint: disable=R0913
    configure_logging(verbose)
    try:
        report = run_scenario(scenario, out, seed=seed, difficulty=difficulty,
                              strict_time=strict_time)
    except (ScenarioError, TopologyError) as exc:
        typer.echo(f"error: {exc}", err=True)
        raise typer.Exit(EXIT_SCHEMA_ERROR) from exc
    typer.echo(f"{len(report.records)} records -> {report.runlog_path}")
    typer.echo(f"snapshot -> {report.snapshot_path}")
    if not report.ok:
        typer.echo(f"failed: {report.failure}", err=True)
    raise typer.Exit(exit_code(report.failure))


@app.command("verify")
def verify_command(
    snapshot: Annotated[Path, typer.Argument(help="Snapshot written by run")],
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging")] = False,
):
    """Replay a snapshot on a fresh node; exit 0 when it is valid."""
    configure_logging(verbose)
    try:
        valid = verify_snapshot(snapshot)
    except SnapshotError as exc:
        typer.echo(f"error: {exc}", err=True)
        raise typer.Exit(EXIT_SCHEMA_ERROR) from exc
    typer.echo("valid" if valid else "invalid")
    raise typer.Exit(0 if valid else 1)
