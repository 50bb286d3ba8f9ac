"""
selftest - run the numerical oracle suite.
"""

from typing import List, Optional

import typer

from backend.app.selftest import list_oracles, run_selftest

from ..utils.display import print_oracles

SELFTEST_FAILED = 3


def selftest_cmd(
    only: Optional[List[str]] = typer.Option(None, "--only", help="Run just these oracles (repeatable)"),
):
    """Check the numerical core against independent references."""
    unknown = sorted(set(only or []) - set(list_oracles()))
    if unknown:
        raise typer.BadParameter(
            f"unknown oracle(s) {', '.join(unknown)}; available: {', '.join(list_oracles())}",
            param_hint="'--only'",
        )
    summary = run_selftest(only or None)
    print_oracles(summary)
    if not summary.passed:
        raise typer.Exit(code=SELFTEST_FAILED)
