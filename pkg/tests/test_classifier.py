"""
Tests for the bearing_spectra.classifier module.
"""

import math
from unittest import TestCase

import numpy as np
import pytest

from bearing_spectra.classifier import TrainedModel, classify, distance, distances, extract_features, train_model
from bearing_spectra.enums import FaultType, FeatureKind, LoadCondition
from bearing_spectra.exceptions import DataError, UserInputValidationError
from bearing_spectra.experiment import build_corpus
from bearing_spectra.structs import EigenImage, PcaBasis, VectorFeature
from tests.test_data import (
    BF_CLASS,
    COLUMN_SUM_FIRST,
    COLUMN_SUM_SECOND,
    IF_CLASS,
    NO_CLASS,
    OF_CLASS,
    TEST_SEED,
    small_config,
)

CLASSES = (IF_CLASS, BF_CLASS, OF_CLASS, NO_CLASS)


def _plane_point(values) -> VectorFeature:
    return VectorFeature(np.asarray(values, dtype=np.float64), FeatureKind.PCA_VECTOR)


def _plane_model(features, labels) -> TrainedModel:
    basis = PcaBasis(np.zeros(2), np.eye(2), np.array([1.0, 1.0]), 1.0)
    return TrainedModel(FeatureKind.PCA_VECTOR, basis, np.array(features, dtype=np.float64), tuple(labels))


class TestDistance(TestCase):
    """
    Tests for the column-sum Euclidean distance.
    """

    def test_identical(
        self,
    ):
        """
        Test that equal eigen images are at distance 0.
        """
        matrix = np.random.default_rng(TEST_SEED).random((5, 3))
        assert distance(EigenImage(matrix), EigenImage(matrix)) == 0.0

    def test_three_four_five(
        self,
    ):
        """
        Test a single column differing by (3, 4).
        """
        assert distance(EigenImage([[3.0], [4.0]]), EigenImage([[0.0], [0.0]])) == 5.0

    def test_column_sum_not_frobenius(
        self,
    ):
        """
        Test that column differences (1, 0) and (0, 2) give 3.0, not sqrt(5).
        """
        value = distance(EigenImage(COLUMN_SUM_FIRST), EigenImage(COLUMN_SUM_SECOND))
        assert value == 3.0
        assert value != pytest.approx(math.sqrt(5))

    def test_vectors_are_euclidean(
        self,
    ):
        """
        Test that feature vectors use the plain Euclidean norm.
        """
        assert distance(np.array([1.0, 2.0, 2.0]), np.zeros(3)) == 3.0

    def test_shape_mismatch(
        self,
    ):
        """
        Test that features of different shapes are rejected.
        """
        with pytest.raises(DataError):
            distance(EigenImage(np.zeros((4, 2))), EigenImage(np.zeros((4, 3))))

    def test_metric_properties(
        self,
    ):
        """
        Test non-negativity, symmetry and the triangle inequality on random triples.
        """
        rng = np.random.default_rng(TEST_SEED)
        for _ in range(200):
            a, b, c = (EigenImage(rng.normal(size=(6, 3))) for _ in range(3))
            assert distance(a, b) >= 0
            assert distance(a, b) == pytest.approx(distance(b, a), abs=1e-12)
            assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-12


class TestClassify(TestCase):
    """
    Tests for minimum-distance classification.
    """

    def setUp(self):
        rng = np.random.default_rng(TEST_SEED)
        self.images = (rng.random((12, 10, 16)) > 0.6).astype(np.uint8)
        self.spectra = rng.random((12, 512)) ** 2
        self.labels = [CLASSES[i % 4] for i in range(12)]

    def test_self_recall_every_kind(
        self,
    ):
        """
        Test that every training sample classifies to itself at distance 0 for all three kinds.
        """
        for kind in FeatureKind:
            model = train_model(kind, self.labels, images=self.images, spectra=self.spectra, d=4, contribution=0.9)
            for index, (image, spectrum) in enumerate(zip(self.images, self.spectra)):
                result = classify(extract_features(kind, model.basis, image=image, spectrum=spectrum), model)
                assert result.label == self.labels[index]
                assert result.index == index
                assert result.distance == pytest.approx(0.0, abs=1e-9)

    def test_tie_goes_to_lowest_index(
        self,
    ):
        """
        Test that equal distances pick the first training sample.
        """
        query = _plane_point(np.zeros(2))
        result = classify(query, _plane_model([[2.0, 0.0], [-2.0, 0.0]], [IF_CLASS, OF_CLASS]))
        assert (result.index, result.label, result.distance) == (0, IF_CLASS, 2.0)
        result = classify(query, _plane_model([[-2.0, 0.0], [2.0, 0.0]], [OF_CLASS, IF_CLASS]))
        assert result.label == OF_CLASS

    def test_permutation_invariance(
        self,
    ):
        """
        Test that reordering the training set does not change the decision.
        """
        rng = np.random.default_rng(TEST_SEED)
        features = rng.normal(size=(20, 2))
        labels = [CLASSES[i % 4] for i in range(20)]
        order = rng.permutation(20)
        model = _plane_model(features, labels)
        shuffled = _plane_model(features[order], [labels[i] for i in order])
        for query in rng.normal(size=(50, 2)):
            assert classify(_plane_point(query), model).label == classify(_plane_point(query), shuffled).label

    def test_scaling_invariance(
        self,
    ):
        """
        Test that scaling every feature by c > 0 keeps the argmin.
        """
        rng = np.random.default_rng(TEST_SEED)
        features = rng.normal(size=(20, 2))
        labels = [CLASSES[i % 4] for i in range(20)]
        model = _plane_model(features, labels)
        scaled = _plane_model(features * 3.7, labels)
        for query in rng.normal(size=(50, 2)):
            assert classify(_plane_point(query), model).index == classify(_plane_point(query * 3.7), scaled).index

    def test_kind_mismatch(
        self,
    ):
        """
        Test that an eigen image cannot be classified against a vector model.
        """
        model = _plane_model([[1.0, 0.0]], [IF_CLASS])
        with pytest.raises(UserInputValidationError):
            classify(EigenImage(np.zeros((2, 1))), model)
        with pytest.raises(UserInputValidationError):
            classify(np.zeros(2), model)

    def test_vector_kind_mismatch(
        self,
    ):
        """
        Test that a flattened-image feature is refused by an FFT-amplitude model with the same length.
        """
        basis = PcaBasis(np.zeros(2), np.eye(2), np.array([1.0, 1.0]), 1.0)
        model = TrainedModel(FeatureKind.FFT_AMPLITUDE, basis, np.array([[1.0, 0.0]]), (IF_CLASS,))
        with pytest.raises(UserInputValidationError, match="fft"):
            classify(_plane_point([1.0, 0.0]), model)
        assert classify(VectorFeature(np.array([1.0, 0.0]), FeatureKind.FFT_AMPLITUDE), model).label == IF_CLASS
        with pytest.raises(UserInputValidationError):
            distance(_plane_point([1.0, 0.0]), VectorFeature(np.array([1.0, 0.0]), FeatureKind.FFT_AMPLITUDE))

    def test_model_validation(
        self,
    ):
        """
        Test that label counts and basis types are checked.
        """
        with pytest.raises(UserInputValidationError):
            _plane_model([[1.0, 0.0], [0.0, 1.0]], [IF_CLASS])
        with pytest.raises(UserInputValidationError):
            _plane_model(np.zeros((0, 2)), [])
        basis = PcaBasis(np.zeros(2), np.eye(2), np.array([1.0, 1.0]), 1.0)
        with pytest.raises(UserInputValidationError):
            TrainedModel(FeatureKind.EIGEN_IMAGE, basis, np.zeros((1, 2, 1)), (IF_CLASS,))

    def test_label_set(
        self,
    ):
        """
        Test the distinct label set of a model.
        """
        model = train_model(FeatureKind.EIGEN_IMAGE, self.labels, images=self.images, d=2)
        assert model.label_set == set(CLASSES)
        assert len(model) == 12


def test_outer_race_windows_map_to_outer_race_samples():
    """
    Test on a synthetic corpus that every OF test window's nearest training sample is OF,
    checked against the full distance table.
    """
    config = small_config(images_per_class=10, image_rows=420, image_cols=560, d=10)
    corpus = build_corpus(config, [LoadCondition.LOAD0])
    train_images, train_labels, tests = [], [], []
    for fault_type in config.classes:
        stack = corpus.images[(fault_type, LoadCondition.LOAD0)]
        train_images.extend(stack[:5])
        train_labels.extend([corpus.labels[fault_type]] * 5)
        tests.extend((image, fault_type) for image in stack[5:])
    model = train_model(FeatureKind.EIGEN_IMAGE, train_labels, images=np.array(train_images), d=10)
    training_features = [
        extract_features(FeatureKind.EIGEN_IMAGE, model.basis, image=image) for image in train_images
    ]
    for image, fault_type in tests:
        feature = extract_features(FeatureKind.EIGEN_IMAGE, model.basis, image=image)
        table = np.array([distance(feature, other) for other in training_features])
        result = classify(feature, model)
        assert result.index == int(np.argmin(table))
        np.testing.assert_allclose(distances(feature, model), table, rtol=1e-12, atol=1e-12)
        if fault_type is FaultType.OF:
            assert result.label.fault_type is FaultType.OF
