import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import FIXTURES
from mlcert.checks import psi
from mlcert.estimators import HistogramDriftDetector, RecertificationMonitor
from mlcert.evidence import Split
from mlcert.monitor import evaluate_triggers, load_windows
from mlcert.report import load_profile
from oracles import oracle_psi


@pytest.fixture
def ref():
    return np.random.default_rng(0).normal(size=(2000, 3))


def test_same_distribution_is_stable(ref):
    det = HistogramDriftDetector(n_bins=8).fit(ref)
    cur = np.random.default_rng(1).normal(size=(2000, 3))
    assert not det.predict(cur).any()
    assert det.psi_scores(cur).shape == (3,)


def test_shift_detected_on_one_column(ref):
    det = HistogramDriftDetector(n_bins=8).fit(ref)
    cur = np.random.default_rng(1).normal(size=(2000, 3))
    cur[:, 1] += 1.5
    assert det.predict(cur).tolist() == [False, True, False]


def test_psi_matches_oracle(ref):
    det = HistogramDriftDetector(n_bins=6, epsilon=1e-4).fit(ref)
    cur = ref[:500] * 1.3
    for j, score in enumerate(det.psi_scores(cur)):
        expected = oracle_psi(det.reference_counts_[j].tolist(),
                              det._counts(cur[:, j], det.bin_edges_[j]).tolist(), 1e-4)
        assert score == pytest.approx(expected, abs=1e-12)


def test_summarize_agrees_with_psi(ref):
    det = HistogramDriftDetector(n_bins=5).fit(ref)
    cur = ref[:300] + 0.4
    a = det.summarize(ref, Split.TRAIN, ["p", "q", "r"])
    b = det.summarize(cur)
    assert a.split is Split.TRAIN and a.sample_count == 2000
    assert [f.name for f in a.feature_summaries] == ["p", "q", "r"]
    for fa, fb, score in zip(a.feature_summaries, b.feature_summaries, det.psi_scores(cur)):
        assert psi(fa, fb, 1e-4) == pytest.approx(score, abs=1e-12)


def test_not_fitted_and_shape_errors(ref):
    with pytest.raises(NotFittedError):
        HistogramDriftDetector().predict(ref)
    det = HistogramDriftDetector().fit(ref)
    with pytest.raises(ValueError):
        det.predict(ref[:, :2])
    with pytest.raises(ValueError):
        HistogramDriftDetector(n_bins=0).fit(ref)


def test_constant_column_and_clone(ref):
    X = np.c_[ref[:, 0], np.ones(len(ref))]
    det = HistogramDriftDetector(n_bins=4).fit(X)
    assert det.psi_scores(X).tolist() == pytest.approx([0.0, 0.0])
    assert clone(det).get_params() == det.get_params()


def test_monitor_matches_evaluate_triggers():
    profile = load_profile(FIXTURES / "baseline_profile.json")
    windows = load_windows([FIXTURES / "windows" / n for n in ("healthy.json", "drifted.json", "night_ops.json")])
    mon = RecertificationMonitor().fit(profile)
    assert mon.predict(windows).tolist() == [False, True, True]
    assert mon.reports(windows) == [evaluate_triggers(profile.reference, w, mon.trigger_config_) for w in windows]
    assert RecertificationMonitor(drift_threshold=0.5).fit(profile.reference).predict(windows[:2]).tolist() == [False, False]


def test_monitor_rejects_bad_baseline():
    with pytest.raises(TypeError):
        RecertificationMonitor().fit({"a": 1})
    with pytest.raises(NotFittedError):
        RecertificationMonitor().predict([])
