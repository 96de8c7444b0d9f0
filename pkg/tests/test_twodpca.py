"""
Tests for the bearing_spectra.twodpca module.
"""

import math
from unittest import TestCase

import numpy as np
import pytest
from scipy.linalg import hessenberg

from bearing_spectra.exceptions import DataError, UserInputValidationError
from bearing_spectra.structs import EigenBasis2D, SpectrumImage
from bearing_spectra.twodpca import eigen_sorted, fit_2dpca, mean_image, project, scatter_matrix
from tests.test_data import IF_CLASS, SCATTER_EXPECTED, SCATTER_IMAGES, TEST_SEED


def _naive_scatter(images: np.ndarray) -> np.ndarray:
    m, rows, cols = images.shape
    mean = images.sum(axis=0) / m
    scatter = np.zeros((cols, cols))
    for j in range(m):
        for a in range(cols):
            for b in range(cols):
                for r in range(rows):
                    scatter[a, b] += (images[j, r, a] - mean[r, a]) * (images[j, r, b] - mean[r, b])
    return scatter / m


def _count_below(diagonal: np.ndarray, off: np.ndarray, x: float) -> int:
    """Sturm count: eigenvalues of the tridiagonal matrix below x."""
    count, q = 0, 1.0
    for i, a in enumerate(diagonal):
        q = (a - x) - (off[i - 1] ** 2 / q if i else 0.0)
        if q == 0.0:
            q = -1e-300
        count += q < 0
    return count


def _bisection_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues from characteristic-polynomial sign counts, descending."""
    tridiagonal = hessenberg(matrix)
    diagonal, off = np.diag(tridiagonal).copy(), np.diag(tridiagonal, -1).copy()
    radius = np.abs(matrix).sum(axis=1).max()
    values = []
    for k in range(matrix.shape[0]):
        low, high = -radius - 1.0, radius + 1.0
        for _ in range(100):
            middle = (low + high) / 2
            if _count_below(diagonal, off, middle) > k:
                high = middle
            else:
                low = middle
        values.append((low + high) / 2)
    return np.array(values[::-1])


class TestMeanImage(TestCase):
    """
    Tests for the training mean image.
    """

    def test_identical_images(
        self,
    ):
        """
        Test that the mean of identical images is that image.
        """
        image = (np.random.default_rng(TEST_SEED).random((3, 4)) > 0.5).astype(np.float64)
        np.testing.assert_array_equal(mean_image([image, image, image]), image)

    def test_midpoint(
        self,
    ):
        """
        Test that the mean of an all-0 and an all-1 image is 0.5 everywhere.
        """
        np.testing.assert_array_equal(mean_image([np.zeros((2, 3)), np.ones((2, 3))]), np.full((2, 3), 0.5))

    def test_direct_sum(
        self,
    ):
        """
        Test three random 2x2 images against direct summation.
        """
        images = list(np.random.default_rng(TEST_SEED).random((3, 2, 2)))
        np.testing.assert_allclose(mean_image(images), (images[0] + images[1] + images[2]) / 3, atol=1e-15)

    def test_dimension_mismatch(
        self,
    ):
        """
        Test that images of different shapes are rejected.
        """
        with pytest.raises(DataError):
            mean_image([np.zeros((2, 3)), np.zeros((3, 2))])

    def test_spectrum_images(
        self,
    ):
        """
        Test that SpectrumImage objects are accepted.
        """
        images = [SpectrumImage(np.eye(3, dtype=np.uint8)), SpectrumImage.blank(3, 3)]
        np.testing.assert_array_equal(mean_image(images), np.eye(3) / 2)


class TestScatterMatrix(TestCase):
    """
    Tests for the image scatter matrix.
    """

    def test_identical_images(
        self,
    ):
        """
        Test that identical images give a zero scatter matrix.
        """
        image = (np.random.default_rng(TEST_SEED).random((4, 5)) > 0.5).astype(np.uint8)
        assert not scatter_matrix([image] * 3).any()

    def test_hand_example(
        self,
    ):
        """
        Test the two-image 2x2 example.
        """
        np.testing.assert_allclose(scatter_matrix(np.array(SCATTER_IMAGES)), SCATTER_EXPECTED, atol=1e-15)

    def test_random_against_naive(
        self,
    ):
        """
        Test a random 3-image 4x5 set against the brute-force sum.
        """
        images = np.random.default_rng(TEST_SEED).random((3, 4, 5))
        scatter = scatter_matrix(images)
        assert scatter.shape == (5, 5)
        np.testing.assert_allclose(scatter, _naive_scatter(images), atol=1e-12, rtol=0)

    def test_random_corpora(
        self,
    ):
        """
        Test 50 random corpora against the naive sum, plus the trace identity and symmetry.
        """
        rng = np.random.default_rng(TEST_SEED)
        for _ in range(50):
            m, rows, cols = int(rng.integers(1, 11)), int(rng.integers(1, 9)), int(rng.integers(1, 9))
            images = rng.random((m, rows, cols))
            scatter = scatter_matrix(images)
            np.testing.assert_allclose(scatter, _naive_scatter(images), atol=1e-12, rtol=0)
            assert np.abs(scatter - scatter.T).max() <= 1e-12
            deviations = images - images.mean(axis=0)
            energy = np.sum(deviations**2) / m
            assert abs(np.trace(scatter) - energy) <= 1e-8 * max(energy, 1e-300)

    def test_positive_semi_definite(
        self,
    ):
        """
        Test that the smallest eigenvalue is never below -1e-9 on 100 random corpora.
        """
        rng = np.random.default_rng(TEST_SEED)
        for _ in range(100):
            images = (rng.random((int(rng.integers(1, 6)), 6, 7)) > 0.5).astype(np.uint8)
            assert np.linalg.eigvalsh(scatter_matrix(images)).min() >= -1e-9


class TestEigenSorted(TestCase):
    """
    Tests for the sorted symmetric eigen-decomposition.
    """

    def _check_pairs(self, matrix, values, vectors):
        scale = max(1.0, float(values[0]))
        for k in range(matrix.shape[0]):
            residual = np.linalg.norm(matrix @ vectors[:, k] - values[k] * vectors[:, k])
            assert residual <= 1e-8 * scale
            assert abs(np.linalg.norm(vectors[:, k]) - 1.0) <= 1e-12
        assert np.all(np.diff(values) <= 0)

    def test_identity(
        self,
    ):
        """
        Test the 3x3 identity.
        """
        values, vectors = eigen_sorted(np.eye(3))
        np.testing.assert_allclose(values, [1.0, 1.0, 1.0])
        np.testing.assert_allclose(vectors.T @ vectors, np.eye(3), atol=1e-12)

    def test_two_by_two(
        self,
    ):
        """
        Test [[2, 1], [1, 2]] against its closed-form solution.
        """
        values, vectors = eigen_sorted(np.array([[2.0, 1.0], [1.0, 2.0]]))
        np.testing.assert_allclose(values, [3.0, 1.0], atol=1e-12)
        root = 1 / math.sqrt(2)
        np.testing.assert_allclose(vectors[:, 0], [root, root], atol=1e-12)
        np.testing.assert_allclose(vectors[:, 1], [root, -root], atol=1e-12)

    def test_diagonal(
        self,
    ):
        """
        Test diag(5, 2, 9) gives (9, 5, 2) with coordinate eigenvectors.
        """
        values, vectors = eigen_sorted(np.diag([5.0, 2.0, 9.0]))
        np.testing.assert_allclose(values, [9.0, 5.0, 2.0], atol=1e-14)
        np.testing.assert_allclose(vectors, np.eye(3)[:, [2, 0, 1]], atol=1e-15)

    def test_sign_convention(
        self,
    ):
        """
        Test that the first significant entry of every eigenvector is positive.
        """
        rng = np.random.default_rng(TEST_SEED)
        matrix = rng.normal(size=(6, 6))
        _, vectors = eigen_sorted(matrix + matrix.T)
        for k in range(6):
            assert vectors[np.flatnonzero(np.abs(vectors[:, k]) > 1e-12)[0], k] > 0

    def test_bisection_oracle(
        self,
    ):
        """
        Test 200 random symmetric matrices against sign-count bisection on the characteristic polynomial.
        """
        rng = np.random.default_rng(TEST_SEED)
        for _ in range(200):
            h = int(rng.integers(1, 13))
            matrix = rng.normal(size=(h, h))
            matrix = (matrix + matrix.T) / 2
            values, vectors = eigen_sorted(matrix)
            np.testing.assert_allclose(values, _bisection_eigenvalues(matrix), atol=1e-7, rtol=0)
            self._check_pairs(matrix, values, vectors)

    def test_rejects_bad_input(
        self,
    ):
        """
        Test that asymmetric, non-square and non-finite matrices are rejected.
        """
        with pytest.raises(UserInputValidationError):
            eigen_sorted(np.array([[1.0, 2.0], [0.0, 1.0]]))
        with pytest.raises(UserInputValidationError):
            eigen_sorted(np.zeros((2, 3)))
        with pytest.raises(DataError):
            eigen_sorted(np.array([[1.0, np.nan], [np.nan, 1.0]]))


class TestFit2dpca(TestCase):
    """
    Tests for fitting the 2DPCA basis.
    """

    def test_full_size_dimensions(
        self,
    ):
        """
        Test that d=10 on 560-column images gives a 560 x 10 orthonormal basis.
        """
        images = (np.random.default_rng(TEST_SEED).random((6, 8, 560)) > 0.7).astype(np.uint8)
        basis = fit_2dpca(images, 10)
        assert basis.basis.shape == (560, 10)
        assert basis.eigenvalues.shape == (560,)
        np.testing.assert_allclose(basis.basis.T @ basis.basis, np.eye(10), atol=1e-8)

    def test_hand_example(
        self,
    ):
        """
        Test that d=1 on the two-image example picks the first coordinate axis.
        """
        basis = fit_2dpca(np.array(SCATTER_IMAGES), 1)
        np.testing.assert_allclose(basis.basis[:, 0], [1.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(basis.eigenvalues, [0.25, 0.0], atol=1e-15)
        np.testing.assert_allclose(basis.mean_image, [[0.5, 0.0], [0.0, 0.0]])

    def test_zero_scatter(
        self,
    ):
        """
        Test that identical images give zero eigenvalues, an orthonormal basis and a warning.
        """
        image = (np.random.default_rng(TEST_SEED).random((3, 6)) > 0.5).astype(np.uint8)
        with self.assertLogs("bearing_spectra.twodpca", level="WARNING"):
            basis = fit_2dpca([image] * 4, 3)
        assert not basis.eigenvalues.any()
        np.testing.assert_allclose(basis.basis.T @ basis.basis, np.eye(3), atol=1e-8)

    def test_eigenvalue_mass(
        self,
    ):
        """
        Test that the leading eigenvalue sums grow with d and reach trace(G).
        """
        images = np.random.default_rng(TEST_SEED).random((5, 4, 7))
        basis = fit_2dpca(images, 2)
        sums = np.cumsum(basis.eigenvalues)
        assert np.all(np.diff(sums) >= -1e-12)
        trace = np.trace(scatter_matrix(images))
        assert abs(sums[-1] - trace) <= 1e-8 * trace

    def test_bad_d(
        self,
    ):
        """
        Test that d must satisfy 1 <= d < h.
        """
        images = np.random.default_rng(TEST_SEED).random((3, 4, 5))
        with pytest.raises(UserInputValidationError):
            fit_2dpca(images, 5)
        with pytest.raises(UserInputValidationError):
            fit_2dpca(images, 0)


class TestProject(TestCase):
    """
    Tests for eigen image extraction.
    """

    def setUp(self):
        self.identity = EigenBasis2D(np.zeros((4, 5)), np.array([5.0, 4.0, 3.0, 2.0, 1.0]), np.eye(5)[:, :2])

    def test_coordinate_projection(
        self,
    ):
        """
        Test that identity columns select the first d columns of the image.
        """
        image = np.random.default_rng(TEST_SEED).random((4, 5))
        np.testing.assert_array_equal(project(image, self.identity).matrix, image[:, :2])

    def test_zero_image(
        self,
    ):
        """
        Test that a zero image projects to zero.
        """
        basis = fit_2dpca(np.random.default_rng(TEST_SEED).random((3, 4, 5)), 2)
        assert not project(np.zeros((4, 5)), basis).matrix.any()

    def test_naive_products(
        self,
    ):
        """
        Test a random projection against explicit dot products, and the contraction bound.
        """
        rng = np.random.default_rng(TEST_SEED)
        basis = fit_2dpca(rng.random((3, 4, 5)), 2)
        image = rng.random((4, 5))
        eigen_image = project(image, basis)
        naive = [[sum(image[r, c] * basis.basis[c, k] for c in range(5)) for k in range(2)] for r in range(4)]
        np.testing.assert_allclose(eigen_image.matrix, naive, atol=1e-12, rtol=0)
        assert eigen_image.d == 2
        assert np.sum(eigen_image.matrix**2) <= np.sum(image**2) + 1e-12

    def test_raw_image_is_not_centered(
        self,
    ):
        """
        Test that the mean image is not subtracted before projecting.
        """
        rng = np.random.default_rng(TEST_SEED)
        images = rng.random((3, 4, 5))
        basis = fit_2dpca(images, 2)
        np.testing.assert_allclose(project(images[0], basis).matrix, images[0] @ basis.basis)

    def test_label_and_mismatch(
        self,
    ):
        """
        Test that the image label is kept and a width mismatch is rejected.
        """
        labeled = SpectrumImage(np.eye(4, 5, dtype=np.uint8), IF_CLASS)
        assert project(labeled, self.identity).label == IF_CLASS
        with pytest.raises(DataError):
            project(np.zeros((4, 6)), self.identity)
