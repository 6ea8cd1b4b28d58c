"""scikit-learn style wrappers over the drift and monitoring primitives.

These let the engine's statistics be dropped into existing pipelines; the
core modules do not depend on them.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .checks import psi_from_counts
from .evidence import DatasetSummary, FeatureKind, FeatureSummary, Split
from .monitor import BaselineReference, OperationalWindow, TriggerConfig, evaluate_triggers


class HistogramDriftDetector(BaseEstimator):
    """Per-feature population stability index against a reference sample.

    ``fit`` fixes equal-width bin edges per column from the reference data;
    later batches are histogrammed into the same bins (values outside the
    reference range land in the end bins).
    """

    def __init__(self, n_bins=10, psi_max=0.25, epsilon=1e-4):
        self.n_bins = n_bins
        self.psi_max = psi_max
        self.epsilon = epsilon

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if self.n_bins < 1:
            raise ValueError("n_bins must be at least 1")
        self.n_features_in_ = X.shape[1]
        self.bin_edges_ = []
        self.reference_counts_ = []
        for j in range(X.shape[1]):
            lo, hi = float(X[:, j].min()), float(X[:, j].max())
            if hi <= lo:
                hi = lo + 1.0
            edges = np.linspace(lo, hi, self.n_bins + 1)
            self.bin_edges_.append(edges)
            self.reference_counts_.append(self._counts(X[:, j], edges))
        return self

    @staticmethod
    def _counts(col, edges):
        clipped = np.clip(col, edges[0], edges[-1])
        counts, _ = np.histogram(clipped, bins=edges)
        return counts.astype(int)

    def _check(self, X):
        check_is_fitted(self, "bin_edges_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X

    def psi_scores(self, X):
        """PSI of each column of ``X`` against the reference, shape (n_features,)."""
        X = self._check(X)
        return np.array([
            psi_from_counts(ref.tolist(), self._counts(X[:, j], edges).tolist(), self.epsilon)
            for j, (edges, ref) in enumerate(zip(self.bin_edges_, self.reference_counts_))
        ])

    def predict(self, X):
        """True for each feature whose PSI exceeds ``psi_max``."""
        return self.psi_scores(X) > self.psi_max

    def summarize(self, X, split=Split.TEST, feature_names=None):
        """Histogram ``X`` into the fitted bins as a DatasetSummary."""
        X = self._check(X)
        names = list(feature_names) if feature_names is not None else [f"x{j}" for j in range(X.shape[1])]
        feats = [
            FeatureSummary(name, FeatureKind.NUMERIC, [float(e) for e in edges],
                           self._counts(X[:, j], edges).tolist())
            for j, (name, edges) in enumerate(zip(names, self.bin_edges_))
        ]
        return DatasetSummary(Split(split), int(X.shape[0]), feature_summaries=feats)


class RecertificationMonitor(BaseEstimator):
    """Flags operational windows that require recertification.

    ``fit`` takes an AssuranceProfile (or a BaselineReference);
    ``predict`` maps a sequence of OperationalWindow to booleans.
    """

    def __init__(self, drift_threshold=0.30, min_accuracy_metrics=None):
        self.drift_threshold = drift_threshold
        self.min_accuracy_metrics = min_accuracy_metrics

    def fit(self, baseline, y=None):
        ref = getattr(baseline, "reference", baseline)
        if not isinstance(ref, BaselineReference):
            raise TypeError("fit expects an AssuranceProfile or BaselineReference")
        self.reference_ = ref
        self.trigger_config_ = TriggerConfig(dict(self.min_accuracy_metrics or {}), self.drift_threshold)
        return self

    def reports(self, windows):
        check_is_fitted(self, "reference_")
        return [evaluate_triggers(self.reference_, w, self.trigger_config_) for w in windows]

    def predict(self, windows: list[OperationalWindow]):
        return np.array([r.recertification_required for r in self.reports(windows)], dtype=bool)
