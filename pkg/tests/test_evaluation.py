import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from sklearn.metrics import cohen_kappa_score

from s3fse.evaluation import (
    ConfusionMatrix,
    chance_agreement,
    class_accuracies,
    confusion_matrix,
    kappa,
    knn_classify,
    overall_accuracy,
    pca_fit,
)
from s3fse.exceptions import InvalidInputError, UndefinedMetricError

confusions = arrays(np.int64, st.integers(1, 6).map(lambda c: (c, c)), elements=st.integers(0, 60))


class TestKNN:
    def test_nearest_wins(self):
        pred = knn_classify([[0.0], [10.0]], [1, 2], [[1.0], [9.0]], k_cls=1)
        np.testing.assert_array_equal(pred, [1, 2])

    def test_vote_tie_smallest_class(self):
        pred = knn_classify([[-1.0], [1.0]], [3, 2], [[0.0]], k_cls=2)
        assert pred[0] == 2

    def test_distance_tie_includes_all(self):
        # k=1 but three training points tie at distance 1; class 2 holds two of them
        pred = knn_classify([[1.0], [-1.0], [1.0]], [1, 2, 2], [[0.0]], k_cls=1)
        assert pred[0] == 2

    def test_majority(self):
        X = [[0.0], [0.1], [0.2], [5.0]]
        assert knn_classify(X, [1, 2, 2, 1], [[0.05]], k_cls=3)[0] == 2

    def test_permutation_invariant(self, rng):
        X = rng.integers(0, 4, size=(40, 2)).astype(float)
        y = rng.integers(1, 4, size=40)
        T = rng.integers(0, 4, size=(25, 2)).astype(float)
        base = knn_classify(X, y, T, 5)
        for _ in range(5):
            p = rng.permutation(40)
            np.testing.assert_array_equal(knn_classify(X[p], y[p], T, 5), base)

    def test_invalid(self):
        with pytest.raises(InvalidInputError):
            knn_classify([[0.0]], [1], [[0.0]], k_cls=2)
        with pytest.raises(InvalidInputError):
            knn_classify(np.zeros((0, 1)), [], [[0.0]], k_cls=1)
        with pytest.raises(InvalidInputError):
            knn_classify([[0.0]], [1], [[0.0, 1.0]], k_cls=1)


class TestMetrics:
    def test_worked_example(self):
        cm = ConfusionMatrix(np.array([[40, 10], [5, 45]]))
        assert overall_accuracy(cm) == 0.85
        assert chance_agreement(cm, exact=True) == Fraction(1, 2)
        assert kappa(cm, exact=True) == Fraction(7, 10)
        np.testing.assert_allclose(class_accuracies(cm), [0.8, 0.9])

    def test_perfect_diagonal(self):
        cm = ConfusionMatrix(np.diag([3, 4, 5]))
        assert overall_accuracy(cm) == 1.0 and kappa(cm) == 1.0

    def test_kappa_undefined(self):
        with pytest.raises(UndefinedMetricError):
            kappa(ConfusionMatrix(np.array([[5, 0], [0, 0]])))

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            overall_accuracy(ConfusionMatrix(np.zeros((2, 2), int)))

    def test_confusion_from_labels(self):
        cm = confusion_matrix([1, 1, 2, 3], [1, 2, 2, 1], 3)
        np.testing.assert_array_equal(cm.counts, [[1, 1, 0], [0, 1, 0], [1, 0, 0]])
        with pytest.raises(InvalidInputError):
            confusion_matrix([0], [1], 2)

    def test_empty_class_row_is_nan(self):
        acc = class_accuracies(ConfusionMatrix(np.array([[2, 0], [0, 0]])))
        assert acc[0] == 1.0 and np.isnan(acc[1])

    def test_matches_sklearn(self, rng):
        for _ in range(20):
            y = rng.integers(1, 5, 80)
            p = np.where(rng.random(80) < 0.6, y, rng.integers(1, 5, 80))
            cm = confusion_matrix(y, p, 4)
            assert abs(kappa(cm) - cohen_kappa_score(y, p)) < 1e-12

    @settings(max_examples=100, deadline=None)
    @given(confusions)
    def test_identities_exact(self, counts):
        cm = ConfusionMatrix(counts)
        if cm.total == 0:
            return
        po = overall_accuracy(cm, exact=True)
        pe = chance_agreement(cm, exact=True)
        rows = counts.sum(axis=1)
        weighted = sum(Fraction(int(r), cm.total) * Fraction(int(counts[i, i]), int(r))
                       for i, r in enumerate(rows) if r)
        assert weighted == po
        if pe != 1:
            assert kappa(cm, exact=True) * (1 - pe) == po - pe
            assert -1 <= kappa(cm) <= 1


class TestPCA:
    def test_matches_dense_eig(self, rng):
        X = rng.standard_normal((30, 6)) @ rng.standard_normal((6, 6))
        model = pca_fit(X, 3)
        vals, vecs = np.linalg.eig(np.cov(X.T, bias=True))
        order = np.argsort(-vals.real)[:3]
        np.testing.assert_allclose(model.explained_variance, vals.real[order], rtol=1e-10)
        for j in range(3):
            assert abs(abs(vecs[:, order[j]].real @ model.loadings[:, j]) - 1) < 1e-10
        np.testing.assert_allclose(model.transform(X).mean(0), 0, atol=1e-12)

    def test_sign_convention(self, rng):
        L = pca_fit(rng.standard_normal((20, 5)), 3).loadings
        idx = np.argmax(np.abs(L), axis=0)
        assert np.all(L[idx, np.arange(3)] > 0)

    def test_rank_truncation(self, rng):
        X = np.outer(rng.standard_normal(10), rng.standard_normal(4))
        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter("always")
            model = pca_fit(X, 3)
        assert model.loadings.shape[1] == 1
        assert w

    def test_bad_d(self, rng):
        with pytest.raises(InvalidInputError):
            pca_fit(rng.standard_normal((5, 3)), 4)
