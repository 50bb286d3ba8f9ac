"""
Tests for the oracle registry and the selftest runner.
"""
import numpy as np
import pytest

from backend.app.selftest import (
    BaseOracle,
    OracleResult,
    get_oracle,
    list_oracles,
    register_oracle,
    run_selftest,
)
from backend.app.selftest.base import _ORACLE_REGISTRY
from backend.app.selftest.oracles import brute_force_modularity

ORACLES = [
    "matrix_exp", "eigenvalues", "modularity", "modularity_heuristic", "entropy", "rate_gradient", "spiking_gradient",
]


@pytest.fixture
def broken_oracle():
    """A registered oracle that raises; removed again afterwards."""

    @register_oracle("broken")
    class BrokenOracle(BaseOracle):
        tolerance = 1e-3

        def run(self) -> OracleResult:
            raise RuntimeError("no reference available")

    yield "broken"
    _ORACLE_REGISTRY.pop("broken", None)


@pytest.mark.unit
class TestRegistry:
    """Oracle registration and lookup."""

    def test_builtin_oracles(self):
        assert list_oracles() == ORACLES

    def test_get_sets_name(self):
        oracle = get_oracle("entropy")
        assert oracle.name == "entropy"
        assert oracle.tolerance == 1e-9

    def test_unknown_oracle(self):
        with pytest.raises(ValueError, match="Unknown oracle"):
            get_oracle("nope")

    def test_brute_force_two_blocks(self, two_block):
        assert brute_force_modularity(two_block) == pytest.approx(0.5)


@pytest.mark.unit
class TestRunner:
    """run_selftest bookkeeping."""

    def test_single_oracle(self):
        summary = run_selftest(["entropy"])
        assert summary.passed
        assert summary.failed == []
        assert [r.name for r in summary.results] == ["entropy"]
        assert summary.results[0].max_error <= summary.results[0].tolerance

    def test_raising_oracle_is_a_failure(self, broken_oracle):
        summary = run_selftest(["entropy", broken_oracle])
        assert not summary.passed
        assert summary.failed == ["broken"]
        result = summary.results[1]
        assert np.isnan(result.max_error)
        assert result.tolerance == 1e-3
        assert result.error == "RuntimeError: no reference available"

    def test_unknown_name_runs_nothing(self):
        with pytest.raises(ValueError):
            run_selftest(["entropy", "nope"])

    def test_to_dict(self):
        data = run_selftest(["matrix_exp"]).to_dict()
        assert data["passed"] is True
        assert data["results"][0]["name"] == "matrix_exp"
        assert data["elapsed_s"] >= 0


@pytest.mark.integration
class TestOracles:
    """Every built-in oracle passes."""

    @pytest.mark.parametrize("name", ORACLES)
    def test_oracle_passes(self, name):
        result = get_oracle(name).run()
        assert result.passed, f"{name}: max_error={result.max_error:.3g} ({result.detail})"
