"""
Base Oracle Interface

Every oracle checks one numerical component against an independent
reference and reports the worst deviation it saw.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass
class OracleResult:
    """Outcome of one oracle."""

    name: str
    passed: bool
    max_error: float
    tolerance: float
    detail: str = ""
    error: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "max_error": self.max_error,
            "tolerance": self.tolerance,
            "detail": self.detail,
            "error": self.error,
            "details": self.details,
        }


class BaseOracle(ABC):
    """
    Abstract base class for all oracles.

    Oracles are deterministic: each seeds its own generator.
    """

    name: str = "base"
    description: str = ""

    @abstractmethod
    def run(self) -> OracleResult:
        """Run the check and return its result."""


# Registry of available oracles, in registration order
_ORACLE_REGISTRY: Dict[str, type] = {}


def register_oracle(name: str):
    """Decorator to register an oracle class."""
    def decorator(cls):
        _ORACLE_REGISTRY[name] = cls
        cls.name = name
        return cls
    return decorator


def get_oracle(name: str) -> BaseOracle:
    """
    Get an oracle instance by name.

    Raises:
        ValueError: If the oracle is not registered
    """
    if name not in _ORACLE_REGISTRY:
        available = ", ".join(_ORACLE_REGISTRY.keys())
        raise ValueError(f"Unknown oracle: {name}. Available: {available}")
    return _ORACLE_REGISTRY[name]()


def list_oracles() -> List[str]:
    return list(_ORACLE_REGISTRY.keys())
