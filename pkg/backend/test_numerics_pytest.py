"""
Tests for the numerical core: matrix exponential, eigenvalues, seeded
randomness and the statistical primitives.

Run with:
    pytest backend/test_numerics_pytest.py -v
"""
import numpy as np
import pytest

from backend.app.core.errors import ConvergenceError, DegenerateVarianceError, InvalidInputError
from backend.app.core.numerics import (
    ComplexSpectrum,
    RandomSource,
    as_matrix,
    child_seed,
    eigenvalues,
    gamma_sample,
    mann_whitney,
    matrix_exp,
    pearson,
)

pytestmark = pytest.mark.unit


class TestMatrixExp:
    """e^M."""

    def test_zero_gives_identity(self):
        np.testing.assert_allclose(matrix_exp(np.zeros((3, 3))), np.eye(3), atol=1e-15)

    def test_diagonal(self):
        out = matrix_exp(np.diag([1.0, 2.0]))
        np.testing.assert_allclose(np.diag(out), [2.718281828, 7.389056099], atol=1e-9)
        assert out[0, 1] == 0.0 and out[1, 0] == 0.0

    def test_swap_matrix_is_cosh_sinh(self):
        out = matrix_exp([[0.0, 1.0], [1.0, 0.0]])
        expected = [[1.543080635, 1.175201194], [1.175201194, 1.543080635]]
        np.testing.assert_allclose(out, expected, atol=1e-9)

    def test_rejects_non_square(self):
        with pytest.raises(InvalidInputError):
            matrix_exp(np.zeros((2, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            matrix_exp([[0.0, np.inf], [0.0, 0.0]])


class TestEigenvalues:
    """Spectra of real square matrices."""

    def test_identity(self):
        np.testing.assert_allclose(eigenvalues(np.eye(3)).values, [1, 1, 1])

    def test_rotation_has_conjugate_pair(self):
        spectrum = eigenvalues([[0.0, 1.0], [-1.0, 0.0]])
        np.testing.assert_allclose(sorted(spectrum.imag), [-1.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(spectrum.real, [0.0, 0.0], atol=1e-12)
        assert spectrum.has_conjugate_pairs()

    def test_symmetric_input_is_exactly_real(self):
        a = RandomSource(3).generator.standard_normal((30, 30))
        spectrum = eigenvalues(a + a.T)
        assert np.all(spectrum.imag == 0.0)

    def test_random_real_matrix_has_conjugate_pairs(self):
        a = RandomSource(4).generator.standard_normal((25, 25))
        assert eigenvalues(a).has_conjugate_pairs()

    def test_pairs_and_length(self):
        spectrum = ComplexSpectrum(np.array([1 + 2j, 1 - 2j]))
        assert len(spectrum) == 2
        assert spectrum.pairs() == [(1.0, 2.0), (1.0, -2.0)]

    def test_convergence_error_is_a_lab_error(self):
        assert issubclass(ConvergenceError, Exception)

    def test_as_matrix_requires_two_dimensions(self):
        with pytest.raises(InvalidInputError):
            as_matrix(np.zeros(3))


class TestRandomness:
    """Seeded streams."""

    def test_same_seed_same_stream(self):
        a = RandomSource(42).generator.random(5)
        b = RandomSource(42).generator.random(5)
        np.testing.assert_array_equal(a, b)

    def test_children_are_independent_and_reproducible(self):
        parent = RandomSource(7)
        assert child_seed(7, 0) != child_seed(7, 1)
        np.testing.assert_array_equal(
            parent.child(3).generator.random(4),
            RandomSource(7).child(3).generator.random(4),
        )

    def test_negative_seed_rejected(self):
        with pytest.raises(InvalidInputError):
            RandomSource(-1)

    def test_gamma_empty(self):
        assert gamma_sample(RandomSource(0), 3.0, 20.0 / 3.0, 0).size == 0

    def test_gamma_moments(self):
        draws = gamma_sample(RandomSource(11), 3.0, 20.0 / 3.0, 100_000)
        assert abs(draws.mean() - 20.0) < 0.2
        expected_var = 3.0 * (20.0 / 3.0) ** 2
        assert abs(draws.var() - expected_var) / expected_var < 0.05

    def test_gamma_small_shape_boost(self):
        draws = gamma_sample(RandomSource(12), 0.5, 2.0, 100_000)
        assert abs(draws.mean() - 1.0) < 0.03
        assert np.all(draws >= 0)

    def test_gamma_repeatable(self):
        a = gamma_sample(RandomSource(5), 3.0, 1.0, 10)
        b = gamma_sample(RandomSource(5), 3.0, 1.0, 10)
        np.testing.assert_array_equal(a, b)

    def test_gamma_rejects_bad_shape(self):
        with pytest.raises(InvalidInputError):
            gamma_sample(RandomSource(0), 0.0, 1.0, 3)


class TestPearson:
    """Correlation with permutation p-values."""

    def test_perfect_positive(self):
        r, p = pearson([1, 2, 3], [1, 2, 3], permutations=999)
        assert r == pytest.approx(1.0)
        assert 0.0 < p <= 1.0

    def test_perfect_negative(self):
        r, _ = pearson([1, 2, 3], [3, 2, 1], permutations=999)
        assert r == pytest.approx(-1.0)

    def test_hand_computed(self):
        r, _ = pearson([1, 2, 3, 4], [1, 3, 2, 4], permutations=999)
        assert r == pytest.approx(0.8)

    def test_strong_correlation_is_significant(self):
        gen = RandomSource(9).generator
        x = gen.standard_normal(60)
        y = x + 0.3 * gen.standard_normal(60)
        _, p = pearson(x, y, permutations=2000)
        assert p < 0.01

    def test_p_value_is_deterministic(self):
        x, y = [1, 2, 3, 4, 5], [2, 1, 4, 3, 5]
        assert pearson(x, y, 500, seed=3) == pearson(x, y, 500, seed=3)

    def test_p_value_is_one_sided_in_the_direction_of_r(self):
        # 5! = 120 pairings are enumerated; r >= 0.9 only for identity and adjacent swaps
        r, p = pearson([1, 2, 3, 4, 5], [1, 2, 3, 5, 4], permutations=999)
        assert r == pytest.approx(0.9)
        assert p == pytest.approx(5 / 120)
        r, p = pearson([1, 2, 3, 4, 5], [5, 4, 3, 1, 2], permutations=999)
        assert r == pytest.approx(-0.9)
        assert p == pytest.approx(5 / 120)

    def test_constant_series(self):
        with pytest.raises(DegenerateVarianceError):
            pearson([1, 1, 1], [1, 2, 3])

    def test_too_short(self):
        with pytest.raises(InvalidInputError):
            pearson([1, 2], [1, 2])

    def test_unequal_lengths(self):
        with pytest.raises(InvalidInputError):
            pearson([1, 2, 3], [1, 2, 3, 4])


class TestMannWhitney:
    """Rank-sum test."""

    def test_all_of_b_larger(self):
        u, p = mann_whitney([1, 2], [3, 4])
        assert u == 0.0
        assert p < 0.5

    def test_identical_groups(self):
        _, p = mann_whitney([1, 2, 3], [1, 2, 3])
        assert p == pytest.approx(0.5)

    def test_midrank_ties(self):
        u, _ = mann_whitney([1, 2, 3], [2, 3, 4])
        assert u == pytest.approx(2.0)

    def test_disjoint_upper(self):
        u, _ = mann_whitney([10, 11, 12], [1, 2], alternative="greater")
        assert u == 6.0

    def test_shifted_normals_mostly_significant(self):
        hits = 0
        for seed in range(40):
            gen = RandomSource(seed).generator
            _, p = mann_whitney(gen.normal(0, 1, 30), gen.normal(1, 1, 30))
            hits += p < 0.01
        assert hits >= 28

    def test_empty_group(self):
        with pytest.raises(InvalidInputError):
            mann_whitney([], [1.0])

    def test_unknown_alternative(self):
        with pytest.raises(InvalidInputError):
            mann_whitney([1.0], [2.0], alternative="sideways")


class TestProperties:
    """Identities that must hold for any input."""

    def test_exp_of_symmetric_is_symmetric(self, rng):
        a = rng.generator.normal(size=(6, 6))
        out = matrix_exp(a + a.T)
        assert np.linalg.norm(out - out.T) <= 1e-12 * np.linalg.norm(out)

    def test_exp_inverse(self, rng):
        a = rng.generator.normal(size=(5, 5))
        a *= 5.0 / np.abs(a).sum(axis=0).max()
        np.testing.assert_allclose(matrix_exp(a) @ matrix_exp(-a), np.eye(5), atol=1e-8)

    def test_trace_and_determinant(self, rng):
        a = rng.generator.normal(size=(6, 6))
        values = eigenvalues(a).values
        assert abs(values.sum() - np.trace(a)) <= 1e-8 * 6
        assert abs(np.prod(values) - np.linalg.det(a)) <= 1e-8 * max(1.0, abs(np.linalg.det(a)))

    def test_integer_matrix_matches_characteristic_roots(self):
        m = np.array([[2.0, -1.0, 0.0], [1.0, 3.0, 4.0], [0.0, -2.0, 1.0]])
        got = np.sort_complex(eigenvalues(m).values)
        expected = np.sort_complex(np.roots(np.poly(m)))
        np.testing.assert_allclose(got, expected, atol=1e-8)

    def test_pearson_affine_invariance(self, rng):
        x = rng.generator.normal(size=20)
        y = x + rng.generator.normal(size=20)
        r, _ = pearson(x, y, permutations=99)
        r_scaled, _ = pearson(3.0 * x - 7.0, 0.5 * y + 2.0, permutations=99)
        assert r_scaled == pytest.approx(r, abs=1e-12)
