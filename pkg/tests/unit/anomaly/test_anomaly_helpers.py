"""
ROC and AUC Tests
=================

Unit tests for roc_curve, auc and midranks.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from src.services.anomaly import ScoredSet, SingleClassLabelsError, auc, midranks, roc_curve


def _pairwise_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
    return wins / (len(pos) * len(neg))


class TestScoredSet:
    """Tests for ScoredSet validation."""

    def test_non_binary_labels(self):
        """Test labels other than 0 and 1 are rejected."""
        with pytest.raises(ValidationError):
            ScoredSet(scores=[0.1, 0.2], labels=[0, 2])

    def test_nan_scores(self):
        """Test NaN scores are rejected."""
        with pytest.raises(ValidationError):
            ScoredSet(scores=[0.1, float("nan")], labels=[0, 1])

    def test_counts(self):
        """Test normal and anomaly counts."""
        s = ScoredSet(scores=[1, 2, 3], labels=[0, 1, 1])
        assert (s.n_normal, s.n_anomalies) == (1, 2)


class TestRocCurve:
    """Tests for roc_curve."""

    def test_perfect_separation(self):
        """Test the worked example with two normals below two anomalies."""
        s = ScoredSet(scores=[1, 2, 3, 4], labels=[0, 0, 1, 1])
        assert roc_curve(s) == [(0.0, 0.0), (0.0, 0.5), (0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]

    def test_ties_share_one_point(self):
        """Test tied scores move both rates in one step."""
        s = ScoredSet(scores=[1.0, 1.0], labels=[0, 1])
        assert roc_curve(s) == [(0.0, 0.0), (1.0, 1.0)]

    def test_monotone_endpoints(self, rng):
        """Test the curve runs from (0,0) to (1,1) with nondecreasing coordinates."""
        labels = np.r_[np.zeros(30), np.ones(20)].astype(int)
        s = ScoredSet(scores=rng.integers(0, 10, size=50), labels=labels)
        points = roc_curve(s)
        assert points[0] == (0.0, 0.0)
        assert points[-1] == (1.0, 1.0)
        fpr, tpr = np.array(points).T
        assert np.all(np.diff(fpr) >= 0) and np.all(np.diff(tpr) >= 0)

    def test_single_class(self):
        """Test a labeling with one class is rejected."""
        with pytest.raises(SingleClassLabelsError):
            roc_curve(ScoredSet(scores=[1, 2], labels=[0, 0]))


class TestAuc:
    """Tests for auc."""

    def test_perfect(self):
        """Test perfectly ranked anomalies give 1."""
        assert auc(ScoredSet(scores=[0.1, 0.2, 0.9], labels=[0, 0, 1])) == 1.0

    def test_inverted(self):
        """Test perfectly inverted scores give 0."""
        assert auc(ScoredSet(scores=[0.9, 0.1], labels=[0, 1])) == 0.0

    def test_all_tied(self):
        """Test constant scores give 0.5."""
        assert auc(ScoredSet(scores=[3, 3, 3, 3], labels=[0, 1, 0, 1])) == 0.5

    def test_matches_pairwise_oracle(self, rng):
        """Test the rank statistic equals the pairwise win rate with ties counted half."""
        for _ in range(20):
            n = int(rng.integers(2, 40))
            labels = rng.integers(0, 2, size=n)
            labels[0], labels[1] = 0, 1
            scores = rng.integers(0, 6, size=n).astype(float)
            s = ScoredSet(scores=scores, labels=labels)
            assert auc(s) == pytest.approx(_pairwise_auc(scores, labels))

    def test_matches_trapezoid_of_roc(self, rng):
        """Test the AUC equals the trapezoidal area under roc_curve."""
        labels = np.r_[np.zeros(25), np.ones(15)].astype(int)
        s = ScoredSet(scores=rng.integers(0, 8, size=40), labels=labels)
        fpr, tpr = np.array(roc_curve(s)).T
        area = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))
        assert auc(s) == pytest.approx(area)

    def test_single_class(self):
        """Test a labeling with one class is rejected."""
        with pytest.raises(SingleClassLabelsError):
            auc(ScoredSet(scores=[1, 2], labels=[1, 1]))

    def test_monotone_transform_invariant(self, rng):
        """Test a strictly increasing transform of the scores leaves the AUC unchanged."""
        labels = np.r_[np.zeros(40), np.ones(30)].astype(int)
        for scores in (rng.normal(size=70), rng.integers(0, 5, size=70).astype(float)):
            plain = auc(ScoredSet(scores=scores, labels=labels))
            transformed = auc(ScoredSet(scores=np.exp(2.0 * scores) + 5.0, labels=labels))
            assert transformed == pytest.approx(plain, abs=1e-12)

    def test_label_swap(self, rng):
        """Test swapping labels gives 1 - AUC, and also negating scores restores it."""
        labels = np.r_[np.zeros(25), np.ones(35)].astype(int)
        for scores in (rng.normal(size=60), rng.integers(0, 4, size=60).astype(float)):
            value = auc(ScoredSet(scores=scores, labels=labels))
            assert auc(ScoredSet(scores=scores, labels=1 - labels)) == pytest.approx(
                1.0 - value, abs=1e-12
            )
            assert auc(ScoredSet(scores=-scores, labels=1 - labels)) == pytest.approx(
                value, abs=1e-12
            )


class TestMidranks:
    """Tests for midranks."""

    def test_ties_average(self):
        """Test tied values share the mean of their ranks."""
        assert midranks(np.array([10.0, 20.0, 10.0, 30.0])).tolist() == [1.5, 3.0, 1.5, 4.0]
