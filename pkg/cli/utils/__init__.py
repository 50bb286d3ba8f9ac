"""
CLI Utilities
"""

from .display import console, print_claims, print_oracles, print_run, print_sweep
from .paths import claim_output
from .render import STYLES, render_svg

__all__ = [
    "STYLES",
    "claim_output",
    "console",
    "print_claims",
    "print_oracles",
    "print_run",
    "print_sweep",
    "render_svg",
]
