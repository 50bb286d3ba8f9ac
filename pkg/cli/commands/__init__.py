"""
sernn CLI Commands

One module per subcommand.
"""

from . import analyze, figures, gen_task, plot, selftest, sweep, train

__all__ = [
    "analyze",
    "figures",
    "gen_task",
    "plot",
    "selftest",
    "sweep",
    "train",
]
