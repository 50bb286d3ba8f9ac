"""
Selftest Runner

Runs registered oracles and collects their results. An oracle that raises
is reported as failed with its error message; the remaining oracles still run.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from .base import OracleResult, get_oracle, list_oracles

logger = logging.getLogger(__name__)


@dataclass
class SelftestSummary:
    results: List[OracleResult] = field(default_factory=list)
    elapsed_s: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.results) and all(r.passed for r in self.results)

    @property
    def failed(self) -> List[str]:
        return [r.name for r in self.results if not r.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "elapsed_s": round(self.elapsed_s, 3),
            "results": [r.to_dict() for r in self.results],
        }


def run_selftest(names: Optional[Sequence[str]] = None) -> SelftestSummary:
    """
    Run the named oracles (all registered ones by default).

    Raises:
        ValueError: an unknown oracle name
    """
    oracles = [get_oracle(n) for n in (names or list_oracles())]
    summary = SelftestSummary()
    start = time.perf_counter()
    for oracle in oracles:
        try:
            result = oracle.run()
        except Exception as e:
            logger.error(f"Oracle {oracle.name} raised: {e}")
            result = OracleResult(
                name=oracle.name,
                passed=False,
                max_error=float("nan"),
                tolerance=getattr(oracle, "tolerance", float("nan")),
                error=f"{type(e).__name__}: {e}",
            )
        logger.info(f"{result.name}: {'PASS' if result.passed else 'FAIL'} max_error={result.max_error:.3g}")
        summary.results.append(result)
    summary.elapsed_s = time.perf_counter() - start
    return summary
