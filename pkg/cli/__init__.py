"""
sernn CLI

Command-line interface for the spatially embedded RNN lab.

Usage:
    sernn gen-task --task synthetic-spikes --out d.jsonl --seed 0
    sernn train --kind sernn --gamma 0.001 --seed 0 --task inference --out runs/
    sernn sweep --config sweep.json --out sweeps/a
    sernn analyze --runs sweeps/a/runs --out metrics.csv
    sernn figures --metrics metrics.csv --which fig2a --out fig2a.csv
    sernn plot --in fig2a.csv --out fig2a.svg
    sernn selftest

Exit codes: 0 success, 1 usage error, 2 runtime failure, 3 selftest failure.
Errors are also reported as one JSON line on stderr.
"""

import json
import logging
import sys
from typing import List, Optional

import typer

try:  # newer typer releases vendor click and raise its exception classes
    from typer._click import exceptions as click_exceptions
except ImportError:
    from click import exceptions as click_exceptions
from pydantic import ValidationError

from backend.app.core.errors import InvalidInputError, LabError
from backend.app.core.logger import configure_logging

from .commands import analyze, figures, gen_task, plot, selftest, sweep, train

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_SELFTEST = selftest.SELFTEST_FAILED

app = typer.Typer(
    name="sernn",
    help="seRNN lab - train, sweep and analyse spatially embedded recurrent networks",
    add_completion=False,
    no_args_is_help=True,
)

app.command(name="gen-task")(gen_task.gen_task)
app.command(name="train")(train.train_cmd)
app.command(name="sweep")(sweep.sweep_cmd)
app.command(name="analyze")(analyze.analyze_cmd)
app.command(name="figures")(figures.figures_cmd)
app.command(name="plot")(plot.plot_cmd)
app.command(name="selftest")(selftest.selftest_cmd)


def _report(code: int, kind: str, message: str) -> int:
    line = json.dumps({"status": "error", "code": code, "kind": kind, "message": message})
    typer.echo(line, err=True)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    configure_logging()
    command = typer.main.get_command(app)
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        result = command.main(args=args, prog_name="sernn", standalone_mode=False)
    except click_exceptions.UsageError as e:
        return _report(EXIT_USAGE, "usage", e.format_message())
    except click_exceptions.Abort:
        return _report(EXIT_USAGE, "aborted", "aborted")
    except ValidationError as e:
        return _report(EXIT_USAGE, "validation", str(e))
    except InvalidInputError as e:
        return _report(EXIT_USAGE, type(e).__name__, str(e))
    except LabError as e:
        return _report(EXIT_RUNTIME, type(e).__name__, str(e))
    except OSError as e:
        return _report(EXIT_RUNTIME, type(e).__name__, str(e))
    except Exception as e:
        logger.exception("Unexpected failure")
        return _report(EXIT_RUNTIME, type(e).__name__, str(e))

    # standalone_mode=False hands back typer.Exit codes as the return value
    if isinstance(result, int):
        return result
    return EXIT_OK


def run() -> None:
    """Console-script entry point."""
    sys.exit(main())


if __name__ == "__main__":
    run()
