"""
Selftest

Oracles that check the numerical core against independent references.
"""

from . import oracles  # noqa: F401  registers the oracles
from .base import BaseOracle, OracleResult, get_oracle, list_oracles, register_oracle
from .runner import SelftestSummary, run_selftest

__all__ = [
    "BaseOracle",
    "OracleResult",
    "SelftestSummary",
    "get_oracle",
    "list_oracles",
    "register_oracle",
    "run_selftest",
]
