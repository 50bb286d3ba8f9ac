"""
Tests for network outcome measures, directed modularity and the metrics table.
"""
import numpy as np
import pandas as pd
import pytest

from backend.app.core.constraints import RegularizerKind
from backend.app.core.embedding import build_lattice
from backend.app.core.errors import DegenerateVarianceError, InvalidInputError, UndefinedEntropyError
from backend.app.core.numerics import ComplexSpectrum, RandomSource, eigenvalues
from backend.app.metrics import COLUMNS, MetricRecord, MetricsTable, analyze_checkpoint
from backend.app.metrics.measures import (
    distance_weight_correlation,
    imag_fraction,
    leading_eigenvalue,
    shannon_entropy,
    spectral_entropy,
    symmetry_index,
    total_weight,
)
from backend.app.metrics.modularity import _adjacency, directed_modularity, exact_modularity, modularity_q
from backend.app.selftest.oracles import planted_digraph
from backend.app.training import NetworkCheckpoint, TaskName

pytestmark = pytest.mark.unit


def _record(kind="sernn", gamma=0.001, seed=0, epoch=0, accuracy=0.5, q=0.25):
    return MetricRecord(
        kind=kind, gamma=gamma, seed=seed, epoch=epoch, accuracy=accuracy, Q=q,
        H_W=0.125, H_C=0.0625, H_lambda=2.5, lambda_max=1.5, total_weight=8.0,
        sym_index=0.25, imag_fraction=0.5, dist_corr_r=-0.5, dist_corr_p=float("nan"),
    )


class TestEntropy:
    """Weight and spectral entropy."""

    def test_uniform_two_by_two(self):
        assert shannon_entropy(np.ones((2, 2))) == pytest.approx(1.0)

    def test_single_entry(self):
        w = np.zeros((3, 3))
        w[0, 2] = -4.0
        assert shannon_entropy(w) == 0.0

    def test_uniform_hundred(self):
        assert shannon_entropy(np.ones((100, 100))) == pytest.approx(0.132877124, abs=1e-9)

    def test_uses_magnitudes(self):
        w = np.array([[1.0, -1.0], [-1.0, 1.0]])
        assert shannon_entropy(w) == pytest.approx(1.0)

    def test_all_zero(self):
        with pytest.raises(UndefinedEntropyError):
            shannon_entropy(np.zeros((2, 2)))

    def test_spectral_half_quarter_quarter(self):
        assert spectral_entropy(ComplexSpectrum(np.array([2.0, 1.0, 1.0]))) == pytest.approx(1.5)

    def test_spectral_identity(self):
        assert spectral_entropy(eigenvalues(np.eye(4))) == pytest.approx(2.0)

    def test_spectral_zero(self):
        assert spectral_entropy(ComplexSpectrum(np.zeros(3, dtype=complex))) == 0.0


class TestSpectrum:
    """Leading eigenvalue, imaginary fraction and symmetry."""

    def test_leading_of_diagonal(self):
        assert leading_eigenvalue(eigenvalues(np.diag([0.5, -2.0, 1.0]))) == pytest.approx(2.0)

    def test_leading_of_rotation(self):
        assert leading_eigenvalue(eigenvalues([[0.0, 3.0], [-3.0, 0.0]])) == pytest.approx(3.0)

    @pytest.mark.parametrize("values,expected", [
        ([1.0, 1.0], 0.0),
        ([1j, -1j], 1.0),
        ([1j, -1j, 2.0], 0.5),
        ([0.0, 0.0], 0.0),
    ])
    def test_imag_fraction(self, values, expected):
        assert imag_fraction(ComplexSpectrum(np.array(values, dtype=complex))) == pytest.approx(expected)

    def test_symmetric(self):
        assert symmetry_index([[1.0, 2.0], [2.0, 1.0]]) == 0.0

    def test_antisymmetric(self):
        assert symmetry_index([[0.0, 1.0], [-1.0, 0.0]]) == 1.0

    def test_one_way_edge(self):
        assert symmetry_index([[0.0, 1.0], [0.0, 0.0]]) == pytest.approx(0.5)

    def test_zero_matrix(self):
        with pytest.raises(InvalidInputError):
            symmetry_index(np.zeros((2, 2)))

    def test_total_weight(self):
        assert total_weight([[1.0, -2.0], [0.0, 0.5]]) == 3.5


class TestModularity:
    """Directed modularity Q."""

    def test_two_blocks(self, two_block):
        q, labels = modularity_q(two_block)
        assert q == pytest.approx(0.5)
        np.testing.assert_array_equal(labels, [0, 0, 1, 1])

    def test_given_partition(self, two_block):
        assert directed_modularity(two_block, [0, 0, 1, 1]) == pytest.approx(0.5)
        assert directed_modularity(two_block, [0, 0, 0, 0]) == pytest.approx(0.0)

    def test_complete_graph(self):
        q, labels = modularity_q(np.ones((4, 4)))
        assert q == pytest.approx(0.0, abs=1e-12)
        assert len(set(labels)) == 1

    def test_signs_ignored(self, two_block):
        q, _ = modularity_q(-two_block)
        assert q == pytest.approx(0.5)

    def test_self_loops_only(self):
        q, labels = modularity_q(np.eye(3))
        assert q == 0.0
        np.testing.assert_array_equal(labels, [0, 0, 0])

    def test_relabelling_invariance(self):
        w = RandomSource(6).generator.random((6, 6))
        perm = np.array([3, 0, 5, 1, 4, 2])
        q, _ = modularity_q(w)
        q_perm, _ = modularity_q(w[np.ix_(perm, perm)])
        assert q == pytest.approx(q_perm, abs=1e-12)

    def test_large_graph_uses_heuristic(self):
        w = np.zeros((10, 10))
        w[:5, :5] = 1.0
        w[5:, 5:] = 1.0
        q, labels = modularity_q(w)
        assert q == pytest.approx(0.5)
        assert len(set(labels[:5])) == 1 and len(set(labels[5:])) == 1
        assert labels[0] != labels[5]

    def test_zero_weight(self):
        with pytest.raises(InvalidInputError):
            modularity_q(np.zeros((3, 3)))


class TestHeuristicModularity:
    """The bct path taken by graphs above the exact-enumeration size."""

    @pytest.fixture
    def heuristic_only(self, monkeypatch):
        from backend.app.metrics import modularity

        monkeypatch.setattr(modularity, "EXACT_MAX_NODES", 0)

    @pytest.mark.parametrize("n", [6, 7, 8])
    def test_bounded_by_exact_and_self_consistent(self, heuristic_only, n):
        gen = RandomSource(40 + n).generator
        for _ in range(4):
            w = gen.random((n, n)) * (gen.random((n, n)) < 0.5)
            w[0, 1] = 1.0
            q, labels = modularity_q(w)
            q_exact, _ = exact_modularity(_adjacency(w))
            assert q <= q_exact + 1e-10
            assert q == pytest.approx(directed_modularity(w, labels), abs=1e-12)

    def test_planted_blocks_reach_the_maximum(self, heuristic_only):
        gen = RandomSource(9).generator
        for _ in range(5):
            w = planted_digraph(gen)
            q, labels = modularity_q(w)
            q_exact, _ = exact_modularity(_adjacency(w))
            assert q >= q_exact - 0.02
            assert labels[0] != labels[4]


class TestDistanceCorrelation:
    """Pearson r of connection probability against length."""

    def test_decaying_weights_correlate_negatively(self, small_lattice):
        w = np.exp(-small_lattice.distances)
        r, p = distance_weight_correlation(w, small_lattice, permutations=499)
        assert r < 0
        assert p < 0.05

    def test_equal_weights(self, small_lattice):
        with pytest.raises(DegenerateVarianceError):
            distance_weight_correlation(np.ones((8, 8)), small_lattice, permutations=99)

    def test_too_few_connections(self, small_lattice):
        w = np.zeros((8, 8))
        w[0, 1] = w[1, 2] = 1.0
        with pytest.raises(InvalidInputError):
            distance_weight_correlation(w, small_lattice, permutations=99)

    def test_lattice_mismatch(self, small_lattice):
        with pytest.raises(InvalidInputError):
            distance_weight_correlation(np.ones((4, 4)), small_lattice)


class TestAnalyzeCheckpoint:
    """analyze_checkpoint."""

    def _checkpoint(self, w, dims):
        return NetworkCheckpoint(
            kind=RegularizerKind.SE_SPACE_COMM, gamma=0.01, seed=2, epoch=3, task=TaskName.INFERENCE,
            accuracy=0.75, task_loss=0.5, constraint_loss=0.1, dims=dims, params={"w_rec": w},
        )

    def test_identity(self):
        rec = analyze_checkpoint(self._checkpoint(np.eye(2), (2, 1, 1)), permutations=99)
        assert (rec.kind, rec.gamma, rec.seed, rec.epoch, rec.accuracy) == ("sernn", 0.01, 2, 3, 0.75)
        assert rec.H_W == pytest.approx(0.5)
        assert rec.H_C == pytest.approx(0.5)
        assert rec.Q == 0.0
        assert rec.lambda_max == pytest.approx(1.0)
        assert rec.sym_index == 0.0
        assert rec.imag_fraction == 0.0
        assert np.isnan(rec.dist_corr_r) and np.isnan(rec.dist_corr_p)

    def test_deterministic(self, small_lattice):
        w = RandomSource(3).generator.normal(size=(8, 8))
        c = self._checkpoint(w, (2, 2, 2))
        a = analyze_checkpoint(c, small_lattice, permutations=199, permutation_seed=1)
        b = analyze_checkpoint(c, small_lattice, permutations=199, permutation_seed=1)
        assert a.to_dict() == b.to_dict()
        assert -1.0 <= a.dist_corr_r <= 1.0


class TestMetricsTable:
    """MetricsTable keys, ordering and CSV."""

    def test_columns(self):
        assert COLUMNS[:4] == ["kind", "gamma", "seed", "epoch"]
        assert len(MetricsTable()) == 0

    def test_upsert_replaces_same_key(self):
        table = MetricsTable().upsert([_record(accuracy=0.5)])
        table.upsert([_record(accuracy=0.75)])
        assert len(table) == 1
        assert table.records()[0].accuracy == 0.75

    def test_rows_sorted_by_key(self):
        table = MetricsTable().upsert([_record(seed=1), _record(kind="l1"), _record(seed=0, epoch=1)])
        keys = table.frame[["kind", "seed", "epoch"]].values.tolist()
        assert keys == [["l1", 0, 0], ["sernn", 0, 0], ["sernn", 0, 1], ["sernn", 1, 0]]

    def test_final_epoch(self):
        table = MetricsTable().upsert([_record(epoch=e, seed=s) for e in range(3) for s in range(2)])
        final = table.final_epoch()
        assert len(final) == 2
        assert set(final["epoch"]) == {2}

    def test_csv_reload(self, tmp_path):
        table = MetricsTable().upsert([_record(gamma=g, seed=s) for g in (0.001, 0.0031622776601683794) for s in (0, 1)])
        path = table.to_csv(tmp_path / "metrics.csv")
        back = MetricsTable.from_csv(path)
        pd.testing.assert_frame_equal(back.frame, table.frame)
        back.upsert([_record(gamma=0.0031622776601683794, seed=1, accuracy=0.25)])
        assert len(back) == 4

    def test_missing_columns(self):
        with pytest.raises(InvalidInputError):
            MetricsTable(pd.DataFrame({"kind": ["l1"]}))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidInputError):
            MetricsTable.from_csv(tmp_path / "nope.csv")


class TestProperties:
    """Invariants of the measures on random matrices."""

    def test_entropy_ignores_scale(self, rng):
        w = rng.generator.normal(size=(10, 10))
        assert shannon_entropy(7.5 * w) == pytest.approx(shannon_entropy(w), abs=1e-12)

    def test_spectral_entropy_bound(self, rng):
        spectrum = eigenvalues(rng.generator.normal(size=(12, 12)))
        assert spectral_entropy(spectrum) <= np.log2(12) + 1e-12

    def test_leading_eigenvalue_of_transpose(self, rng):
        w = rng.generator.normal(size=(9, 9))
        assert leading_eigenvalue(eigenvalues(w)) == pytest.approx(leading_eigenvalue(eigenvalues(w.T)), rel=1e-10)

    def test_symmetric_spectrum_is_real(self, rng):
        w = rng.generator.normal(size=(15, 15))
        assert imag_fraction(eigenvalues(w + w.T)) <= 1e-8

    def test_modularity_never_beats_brute_force(self, rng):
        from backend.app.selftest.oracles import brute_force_modularity

        for _ in range(3):
            w = rng.generator.random((5, 5)) * (rng.generator.random((5, 5)) < 0.6)
            w[0, 1] = 1.0
            q, _ = modularity_q(w)
            assert q <= brute_force_modularity(w) + 1e-10
