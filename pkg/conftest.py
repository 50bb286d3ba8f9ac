"""
Pytest configuration and shared fixtures for seRNN Lab tests.
"""
import os
import sys

import numpy as np
import pytest

# Add the repository root to path so `backend.app` and `cli` import
root_path = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, root_path)

# Tests never pick up a developer's personal lab.yaml
os.environ["SERNN_CONFIG"] = os.path.join(root_path, "config", "lab.yaml")

from backend.app.core.embedding import build_lattice  # noqa: E402
from backend.app.core.numerics import RandomSource  # noqa: E402
from backend.app.core.settings import LabSettings, get_settings  # noqa: E402


# ============================================================================
# FIXTURES - Shared test data and setup
# ============================================================================

@pytest.fixture(autouse=True)
def _fresh_settings():
    """Settings are cached per process; clear around every test."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    """A fixed-seed random source."""
    return RandomSource(1234)


@pytest.fixture
def lattice():
    """The default 5 x 5 x 4 neuron box."""
    return build_lattice((5, 5, 4))


@pytest.fixture
def small_lattice():
    """A 2 x 2 x 2 box, 8 neurons."""
    return build_lattice((2, 2, 2))


@pytest.fixture
def two_block():
    """Two disconnected reciprocal pairs: modularity 0.5 at {0,1} | {2,3}."""
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = w[2, 3] = w[3, 2] = 1.0
    return w


@pytest.fixture
def fast_settings():
    """
    Small, quick settings for training tests: 8 neurons, short epochs, a
    tiny synthetic spike task and few permutations.
    """
    return LabSettings.model_validate({
        "stats": {"permutations": 199, "permutation_seed": 0},
        "lattice": {"dims": [2, 2, 2]},
        "rate": {"epochs": 2, "batch_size": 16, "trials_per_epoch": 64, "eval_trials": 64},
        "spiking": {
            "epochs": 2,
            "batch_size": 8,
            "dt_ms": 1.0,
            "synthetic": {
                "classes": 3,
                "channels": 6,
                "template_size": 3,
                "duration_ms": 20.0,
                "train_samples_per_class": 4,
                "test_samples_per_class": 3,
            },
        },
        "harness": {"gamma_count": 2, "seeds": 2, "fig3b_bins": 5},
    })
