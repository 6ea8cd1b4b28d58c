"""Acceptance criteria.  Each test carries an ``acceptance`` marker; the
session summary prints one PASS/FAIL line per criterion."""

import json
import random
import subprocess
import sys
import time
from fractions import Fraction

import pytest

from conftest import FIXED_CLOCK, FIXTURES
from mlcert.checks import check_model_performance, psi_from_counts, total_variation
from mlcert.core import CATEGORY_ORDER, Criticality, load_registry, parse_classification, resolve_weight_profile
from mlcert.evidence import Detection, GroundTruthBox, PredictionSet, load_evidence_bundle
from mlcert.ledger import (
    LEDGER_FILE,
    Significance,
    audit_ledger,
    audit_ledger_dir,
    load_ledger,
    record_change,
    register_baseline,
)
from mlcert.metrics import average_precision, evaluate_performance, match_detections
from mlcert.monitor import BaselineReference, OperationalWindow, Period, TriggerKind, evaluate_triggers, load_windows
from mlcert.report import build_assurance_profile, load_profile, render_profile
from mlcert.scoring import ConfidenceBand, Verdict, certification_verdict, confidence_level
from mlcert.serde import from_jsonable, loads
from oracles import oracle_ap, oracle_match, oracle_psi, oracle_tv

WORKED_EXAMPLE = [
    "32.0", "28.7", "17.5", "78.2",
    "23.8", "23.0", "17.0", "13.2", "13.0", "90.0",
    "19.3", "18.2", "15.0", "52.5",
    "26.0", "21.0", "14.5", "61.5",
    "23.5", "31.5", "10.5", "9.2",
    "74.7",
]


@pytest.mark.acceptance(1, "worked example reproduced exactly; Moderate Assurance; CertifiedModerate at Level D; < 1 s")
def test_criterion_1_worked_example():
    t0 = time.perf_counter()
    b = load_evidence_bundle(FIXTURES / "worked_example_bundle.json")
    c = parse_classification("D/2A/3")
    p = build_assurance_profile(b, c, resolve_weight_profile(c, load_registry()), clock=FIXED_CLOCK)
    md = render_profile(p, "markdown")
    elapsed = time.perf_counter() - t0

    got = []
    for ps in p.process_scores:
        got += [f"{r.contribution:.1f}" for r in ps.rows] + [f"{ps.total:.1f}"]
    got += [f"{r.contribution:.1f}" for r in p.final.process_rows] + [f"{p.final.value:.1f}"]
    assert got == WORKED_EXAMPLE
    assert p.final.band is ConfidenceBand.MODERATE and p.final.band.label == "Moderate Assurance"
    assert p.final.verdict.verdict is Verdict.CERTIFIED_MODERATE
    assert p.classification.crit is Criticality.D
    assert b"**74.7**" in md and b"Moderate Assurance" in md
    assert elapsed < 1.0


@pytest.mark.acceptance(2, "confidence band boundaries")
def test_criterion_2_bands():
    cases = {
        59.9: ConfidenceBand.INSUFFICIENT, 60.0: ConfidenceBand.LIMITED, 69.9: ConfidenceBand.LIMITED,
        70.0: ConfidenceBand.MODERATE, 79.9: ConfidenceBand.MODERATE, 80.0: ConfidenceBand.STRONG,
        89.9: ConfidenceBand.STRONG, 90.0: ConfidenceBand.OPTIMAL, 100.0: ConfidenceBand.OPTIMAL,
    }
    assert {s: confidence_level(s) for s in cases} == cases


@pytest.mark.acceptance(3, "verdict thresholds, strict at the high boundary")
def test_criterion_3_verdicts():
    D, A = Criticality.D, Criticality.A
    assert certification_verdict(75.0, D).verdict is Verdict.CERTIFIED_MODERATE
    assert certification_verdict(75.1, D).verdict is Verdict.CERTIFIED_HIGH
    assert certification_verdict(85.0, A).verdict is Verdict.CERTIFIED_MODERATE
    assert certification_verdict(85.1, A).verdict is Verdict.CERTIFIED_HIGH
    assert certification_verdict(59.9, D).verdict is Verdict.NOT_CERTIFIED


@pytest.mark.acceptance(4, "perturbed-set P/R/mAP 0.79/0.75/0.81 +-0.005 passes; TV 0.29 quiet, 0.31 DatasetShift")
def test_criterion_4_scenario():
    p = from_jsonable(PredictionSet, loads((FIXTURES / "noise_predictions.json").read_bytes()))
    m = evaluate_performance(p)
    assert abs(m.precision - 0.79) <= 0.005
    assert abs(m.recall - 0.75) <= 0.005
    assert abs(m.map_50 - 0.81) <= 0.005
    assert check_model_performance(p).passed

    ref = BaselineReference(prediction_label_dist={"a": 0.6, "b": 0.3, "c": 0.1})
    period = Period("2025-02-01T00:00:00Z", "2025-02-02T00:00:00Z")
    quiet = OperationalWindow("w29", period, {"a": 0.31, "b": 0.59, "c": 0.1})
    loud = OperationalWindow("w31", period, {"a": 0.29, "b": 0.61, "c": 0.1})
    assert total_variation(ref.prediction_label_dist, quiet.prediction_label_dist) == pytest.approx(0.29)
    assert evaluate_triggers(ref, quiet).fired == []
    fired = evaluate_triggers(ref, loud).fired
    assert [f.kind for f in fired] == [TriggerKind.DATASET_SHIFT]

    # the same two magnitudes against the shipped certified baseline
    base = load_profile(FIXTURES / "baseline_profile.json")
    healthy, drifted = load_windows([FIXTURES / "windows" / "healthy.json", FIXTURES / "windows" / "drifted.json"])
    assert total_variation(base.reference.prediction_label_dist, healthy.prediction_label_dist) == pytest.approx(0.29)
    assert evaluate_triggers(base, healthy).fired == []
    assert [f.kind for f in evaluate_triggers(base, drifted).fired] == [TriggerKind.DATASET_SHIFT]


def _rand_box(rng):
    x, y = rng.randint(0, 5), rng.randint(0, 5)
    return (x, y, x + rng.randint(1, 4), y + rng.randint(1, 4))


@pytest.mark.acceptance(5, "1000+ random instances: TP/FP/FN and AP exact vs oracle; PSI and TV to 1e-12")
def test_criterion_5_oracles():
    rng = random.Random(20250115)
    compared = 0
    for _ in range(1200):
        gts = [GroundTruthBox(rng.choice("xy"), rng.choice("ab"), _rand_box(rng)) for _ in range(rng.randint(0, 4))]
        dets = [Detection(rng.choice("xy"), rng.choice("ab"), rng.choice([0.15, 0.35, 0.55, 0.75, 0.95]),
                          _rand_box(rng)) for _ in range(rng.randint(0, 6))]
        m = match_detections(dets, gts, 0.5)
        expected = oracle_match(
            [{"image_id": d.image_id, "label": d.label, "confidence": d.confidence, "box": d.box} for d in dets],
            [{"image_id": g.image_id, "label": g.label, "box": g.box} for g in gts],
            Fraction(1, 2),
        )
        for label, (tp, fp, fn, hits) in expected.items():
            cm = m.per_class[label]
            assert (cm.tp, cm.fp, cm.fn) == (tp, fp, fn)
            if tp + fn:
                assert average_precision(cm.scored_detections, tp + fn) == float(oracle_ap(hits, tp + fn))
        compared += 1
    assert compared >= 1000

    for _ in range(1000):
        k = rng.randint(2, 12)
        ref = [rng.randint(0, 50) for _ in range(k)]
        cur = [rng.randint(0, 50) for _ in range(k)]
        ref[0] += 1
        cur[-1] += 1
        assert abs(psi_from_counts(ref, cur, 1e-4) - float(oracle_psi(ref, cur, 1e-4))) <= 1e-12
        assert abs(total_variation(ref, cur) - oracle_tv(dict(enumerate(ref)), dict(enumerate(cur)))) <= 1e-12


@pytest.mark.acceptance(6, "A/B category row normalizes to unit sum (1e-9) with ratios preserved (1e-12)")
def test_criterion_6_normalization():
    registry = load_registry()
    for key in ("A/1A/1", "B/3B/3"):
        prof = resolve_weight_profile(parse_classification(key), registry)
        raw = [prof.raw_category_weights[cat] for cat in CATEGORY_ORDER]
        assert raw == [0.35, 0.30, 0.40, 0.10]
        norm = [prof.category_weights[cat] for cat in CATEGORY_ORDER]
        assert abs(sum(norm) - 1.0) <= 1e-9
        for i in range(4):
            for j in range(4):
                assert abs(norm[i] / norm[j] - raw[i] / raw[j]) <= 1e-12


@pytest.mark.acceptance(7, "every single-byte flip in a 50-record ledger breaks the audit; TV 0.35 major, 0.10 minor")
def test_criterion_7_ledger(tmp_path):
    src = FIXTURES / "ledger"
    pristine = audit_ledger_dir(src)
    assert pristine.chain_valid and pristine.record_count == 50
    assert audit_ledger(load_ledger(src)).chain_valid

    d = tmp_path / "ledger"
    d.mkdir()
    (d / "baseline.json").write_bytes((src / "baseline.json").read_bytes())
    log = (src / LEDGER_FILE).read_bytes()
    path = d / LEDGER_FILE
    undetected = []
    for pos in range(len(log)):
        flipped = bytearray(log)
        flipped[pos] ^= 0x01
        path.write_bytes(bytes(flipped))
        if audit_ledger_dir(d).chain_valid:
            undetected.append(pos)
    assert undetected == []
    path.write_bytes(log)
    assert audit_ledger_dir(d) == pristine

    manifest = load_ledger(src).baseline
    led = register_baseline(manifest)
    assert audit_ledger(led).chain_valid
    _, major = record_change(led, "train-set", "ab" * 32, None, {"aircraft": 0.83, "bird": 0.02, "drone": 0.15},
                             "", FIXED_CLOCK)
    assert major.drift_magnitude == pytest.approx(0.35)
    assert major.significance is Significance.MAJOR and major.recertification_flag
    _, minor = record_change(led, "train-set", "cd" * 32, None, {"aircraft": 0.58, "bird": 0.18, "drone": 0.24},
                             "", FIXED_CLOCK)
    assert minor.drift_magnitude == pytest.approx(0.10)
    assert minor.significance is Significance.MINOR and not minor.recertification_flag


def _certify(out, parallelism):
    cmd = [sys.executable, "-m", "mlcert", "certify", str(FIXTURES / "airsight_bundle.json"), "--format", "both",
           "--out", str(out), "--fixed-clock", FIXED_CLOCK, "--parallelism", str(parallelism)]
    p = subprocess.run(cmd, capture_output=True)
    assert p.returncode == 0, p.stderr
    return {f.name: f.read_bytes() for f in sorted(out.iterdir())}


@pytest.mark.acceptance(8, "certify --fixed-clock output is byte-identical across runs and parallelism")
def test_criterion_8_determinism(tmp_path):
    report = subprocess.run([sys.executable, "-m", "mlcert", "check", str(FIXTURES / "airsight_bundle.json")],
                            capture_output=True, check=True).stdout
    n_checks = sum(len(c["check_results"]) for c in json.loads(report)["category_scores"])
    assert n_checks > 1

    serial = [_certify(tmp_path / f"s{i}", 1) for i in range(2)]
    wide = [_certify(tmp_path / f"w{i}", n_checks) for i in range(2)]
    assert set(serial[0]) == {"assurance_profile.json", "assurance_profile.md"}
    assert serial[0] == serial[1] == wide[0] == wide[1]
