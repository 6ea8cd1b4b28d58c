#!/usr/bin/env python3
"""Regenerate everything under fixtures/ deterministically.

The noise-perturbed prediction set is laid out rank by rank so that the
brute-force oracle in tests/oracles.py gives precision 75/95, recall 0.75 and
mAP exactly 0.81; the script asserts that before writing anything.

    python scripts/make_fixtures.py [--out fixtures]
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from oracles import oracle_map  # noqa: E402

from mlcert.core import Layer, ProcessKind, load_registry, parse_classification, resolve_weight_profile  # noqa: E402
from mlcert.evidence import (  # noqa: E402
    ArtifactKind,
    ArtifactManifest,
    Condition,
    DatasetSummary,
    Detection,
    EvidenceBundle,
    FeatureKind,
    FeatureSummary,
    GroundTruthBox,
    ManifestEntry,
    ManualReviewRecord,
    PredictionSet,
    ResourceSamples,
    Split,
    UncertaintyConfig,
    dumps_bundle,
    seal,
)
from mlcert.ledger import mark_recertified, record_change, register_baseline, save_ledger  # noqa: E402
from mlcert.monitor import OperationalWindow, Period  # noqa: E402
from mlcert.report import build_assurance_profile, render_profile  # noqa: E402
from mlcert.serde import canonical_json  # noqa: E402

FIXED_CLOCK = "2025-01-15T12:00:00Z"
CLASSIFICATION = "D/2A/3"
LABELS = ("aircraft", "drone", "bird")
GT_PER_CLASS = {"aircraft": 60, "drone": 20, "bird": 20}

WORKED_EXAMPLE_SCORES = {
    ProcessKind.DEV: [("dataset_quality", 80.0), ("model_documentation", 82.0), ("integration_documentation", 70.0)],
    ProcessKind.VANDV: [("model_performance", 95.0), ("robustness_testing", 92.0), ("dataset_certification", 84.8),
                        ("system_integration", 88.0), ("human_factors", 87.0)],
    ProcessKind.QA: [("post_certification_monitoring", 55.0), ("usability_assessment", 52.0),
                     ("audits_and_reviews", 50.0)],
    ProcessKind.CM: [("version_control", 65.0), ("configuration_identification", 60.0), ("change_management", 58.0)],
}
LAYERS = {"system_integration": Layer.BASE, "human_factors": Layer.HUMAN_FACTORS,
          "usability_assessment": Layer.HUMAN_FACTORS}


def sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


# --- prediction sets -----------------------------------------------------------


def ground_truth() -> tuple[list[str], list[GroundTruthBox]]:
    """One object per image; aircraft on images 0-59, drones 60-79, birds 80-99."""
    images, gts, k = [], [], 0
    for label in LABELS:
        for _ in range(GT_PER_CLASS[label]):
            image = f"img_{k:03d}"
            images.append(image)
            x = 40.0 + (k % 7) * 30.0
            gts.append(GroundTruthBox(image, label, (x, 60.0, x + 100.0, 160.0)))
            k += 1
    return images, gts


def ranked(tp: int, fp: int, early_fp: int = 0, at: int = 0) -> list[bool]:
    """Hit pattern in rank order: ``early_fp`` false positives after the first ``at`` hits, the rest last."""
    seq = [True] * tp
    seq[at:at] = [False] * early_fp
    return seq + [False] * (fp - early_fp)


def build_predictions(run_id, condition, patterns, images, gts, jitter=8.0) -> PredictionSet:
    """Turn per-class hit patterns into detections.

    The i-th hit of a class is a jittered copy of that class's i-th ground
    truth (IoU well above 0.5); misses are boxes in an empty image corner.
    """
    dets = []
    for label in LABELS:
        class_gts = [g for g in gts if g.label == label]
        hits = 0
        for rank, hit in enumerate(patterns[label]):
            conf = round(0.99 - 0.004 * rank, 3)
            if hit:
                g = class_gts[hits]
                hits += 1
                x0, y0, x1, y1 = g.box
                dets.append(Detection(g.image_id, label, conf, (x0 + jitter, y0 - jitter / 2, x1 + jitter, y1)))
            else:
                g = class_gts[(rank * 3) % len(class_gts)]
                dets.append(Detection(g.image_id, label, conf, (500.0, 500.0, 560.0, 540.0)))
    return PredictionSet(run_id, condition, list(images), dets, list(gts))


def oracle_metrics(p: PredictionSet):
    dets = [{"image_id": d.image_id, "label": d.label, "confidence": d.confidence, "box": d.box}
            for d in p.detections]
    gts = [{"image_id": g.image_id, "label": g.label, "box": g.box} for g in p.ground_truth]
    return oracle_map(dets, gts, Fraction(1, 2))


PATTERNS = {
    "baseline": {"aircraft": ranked(52, 4), "drone": ranked(18, 2), "bird": ranked(17, 2)},
    # 75 TP, 20 FP over 100 objects; six aircraft misses ranked mid-list pull mAP to 0.81
    "noise": {"aircraft": ranked(39, 12, early_fp=6, at=30), "drone": ranked(20, 2), "bird": ranked(16, 6)},
    "occlusion": {"aircraft": ranked(47, 8), "drone": ranked(18, 3), "bird": ranked(16, 4)},
    "motion_blur": {"aircraft": ranked(48, 7), "drone": ranked(17, 4), "bird": ranked(17, 3)},
}
CONDITIONS = {"baseline": Condition.BASELINE, "noise": Condition.NOISE,
              "occlusion": Condition.OCCLUSION, "motion_blur": Condition.MOTION_BLUR}


def prediction_sets() -> dict[str, PredictionSet]:
    images, gts = ground_truth()
    return {name: build_predictions(f"airsight-{name}", CONDITIONS[name], pat, images, gts)
            for name, pat in PATTERNS.items()}


# --- datasets ------------------------------------------------------------------

BRIGHTNESS = [3, 22, 70, 150, 240, 230, 160, 85, 35, 5]
AREA = [5, 60, 180, 250, 220, 150, 80, 40, 12, 3]
WEATHER = {"clear": 520, "overcast": 300, "rain": 120, "haze": 60}


def split_by_label(counts: list[int], shares: dict[str, int]) -> dict[str, list[int]]:
    """Apportion each bin across labels in proportion to ``shares`` (largest remainder)."""
    total = sum(shares.values())
    out = {k: [] for k in shares}
    for c in counts:
        exact = {k: Fraction(c * v, total) for k, v in shares.items()}
        base = {k: int(x) for k, x in exact.items()}
        left = c - sum(base.values())
        for k in sorted(exact, key=lambda k: (-(exact[k] - base[k]), k))[:left]:
            base[k] += 1
        for k in shares:
            out[k].append(base[k])
    return out


def scaled(counts, factor):
    return [round(c * factor) for c in counts]


def dataset(split: Split, factor: float, class_counts: dict[str, int], tags: str) -> DatasetSummary:
    brightness = scaled(BRIGHTNESS, factor)
    area = scaled(AREA, factor)
    weather = {k: round(v * factor) for k, v in WEATHER.items()}
    n = sum(brightness)
    feats = [
        FeatureSummary("brightness", FeatureKind.NUMERIC, [i / 10 for i in range(11)], brightness, {},
                       split_by_label(brightness, class_counts)),
        FeatureSummary("object_area_px", FeatureKind.NUMERIC, [float(i * 400) for i in range(11)], area, {},
                       split_by_label(area, class_counts)),
        FeatureSummary("weather", FeatureKind.CATEGORICAL, [], [], weather),
    ]
    return DatasetSummary(split, n, dict(class_counts), feats, 0,
                          {"environment_tags": tags, "source": "Air Sight flight-test imagery"})


def datasets() -> list[DatasetSummary]:
    return [
        dataset(Split.TRAIN, 1.0, {"aircraft": 480, "drone": 290, "bird": 230}, "clear,daylight,overcast,rain"),
        dataset(Split.TEST, 0.25, {"aircraft": 118, "drone": 75, "bird": 57}, "clear,daylight,overcast"),
    ]


# --- bundles -------------------------------------------------------------------


def worked_example_reviews(as_given: bool) -> list[ManualReviewRecord]:
    out = []
    for process, rows in WORKED_EXAMPLE_SCORES.items():
        for activity, score in rows:
            out.append(ManualReviewRecord(process, activity, LAYERS.get(activity, Layer.ML), score,
                                          "certification board", "Assurance Profile review", as_given))
    return out


UNCERTAINTY = UncertaintyConfig(0.5, (0.35, 0.6), "hand over to pilot")


def manifest(train: DatasetSummary) -> ArtifactManifest:
    total = sum(train.class_counts.values())
    return ArtifactManifest([
        ManifestEntry("detector", ArtifactKind.MODEL, sha("yolov8s airsight r1"),
                      {"architecture": "yolov8s", "input": "640x640"}),
        ManifestEntry("train-set", ArtifactKind.DATASET, sha("airsight train v1"), {"version": "1"},
                      {k: v / total for k, v in sorted(train.class_counts.items())}),
        ManifestEntry("cockpit-display", ArtifactKind.INTERFACE, sha("cockpit display v3"), {"version": "3"}),
        ManifestEntry("engine-config", ArtifactKind.CONFIG, sha("engine config v1"), {}),
        ManifestEntry("uncertainty-policy", ArtifactKind.UNCERTAINTY, sha("uncertainty v1"),
                      {"confidence_threshold": "0.5", "ambiguous_band": "0.35-0.6"}),
    ])


def full_bundle() -> EvidenceBundle:
    ds = datasets()
    preds = prediction_sets()
    latency = [18.0 + (i * 7919 % 23) * 0.9 for i in range(200)]
    return seal(EvidenceBundle(
        classification=CLASSIFICATION,
        datasets=ds,
        predictions=list(preds.values()),
        manual_reviews=worked_example_reviews(as_given=False),
        resources=ResourceSamples(latency, 812.0, "Jetson AGX Orin"),
        uncertainty=UNCERTAINTY,
        manifest=manifest(ds[0]),
    ))


def worked_example_bundle() -> EvidenceBundle:
    return seal(EvidenceBundle(classification=CLASSIFICATION, manual_reviews=worked_example_reviews(as_given=True)))


# --- windows -------------------------------------------------------------------


def shifted(ref: dict[str, float], amount: float) -> dict[str, float]:
    """Move ``amount`` of probability mass from the most to the least frequent label."""
    hi = max(ref, key=lambda k: (ref[k], k))
    lo = min(ref, key=lambda k: (ref[k], k))
    out = dict(ref)
    out[hi] -= amount
    out[lo] += amount
    return out


def window(wid: str, day: int, dist, tags=("clear", "daylight")) -> OperationalWindow:
    return OperationalWindow(wid, Period(f"2025-02-{day:02d}T00:00:00Z", f"2025-02-{day:02d}T23:59:59Z"),
                             dist, environment_tags=list(tags))


# --- ledger --------------------------------------------------------------------


def fifty_record_ledger(m: ArtifactManifest):
    led = register_baseline(m)
    train_dist = m.get("train-set").label_distribution
    clock = iter(f"2025-03-{1 + i // 24:02d}T{i % 24:02d}:00:00Z" for i in range(200))
    for i in range(50):
        step = i % 10
        ts = next(clock)
        if step == 0:
            led, _ = record_change(led, "detector", sha(f"yolov8s airsight r{i + 2}"), None, None,
                                   f"retrain {i}", ts)
        elif step == 1:
            led, _ = mark_recertified(led, "detector", f"board sign-off {i}", ts)
        elif step in (2, 5):
            dist = shifted(train_dist, 0.10 if step == 2 else 0.02)
            led, _ = record_change(led, "train-set", sha(f"train v{i}"), {"version": str(i)}, dist,
                                   "incremental labelling", ts)
        elif step == 3:
            led, _ = record_change(led, "cockpit-display", sha(f"display {i}"), {"version": str(i)}, None,
                                   "symbology tweak", ts)
        elif step == 4:
            led, _ = record_change(led, "engine-config", sha(f"config {i}"), {"rev": str(i)}, None, "", ts)
        elif step == 6:
            led, _ = record_change(led, "uncertainty-policy", None,
                                   {"confidence_threshold": f"0.{50 + i}", "ambiguous_band": "0.35-0.6"},
                                   None, "revised confidence threshold", ts)
        elif step == 7:
            led, _ = mark_recertified(led, "uncertainty-policy", f"re-reviewed {i}", ts)
        elif step == 8:
            led, _ = record_change(led, "train-set", sha(f"train v{i}"), {"version": str(i)},
                                   shifted(train_dist, 0.0), "revert to baseline mix", ts)
        else:
            led, _ = record_change(led, "cockpit-display", None, {"version": str(i), "note": "ünïcode ✓"},
                                   None, "descriptor only", ts)
    return led


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(ROOT / "fixtures"))
    args = ap.parse_args(argv)
    out = Path(args.out)

    preds = prediction_sets()
    p, r, _, m = oracle_metrics(preds["noise"])
    assert (p, r, m) == (Fraction(75, 95), Fraction(3, 4), Fraction(81, 100)), (p, r, m)

    full = full_bundle()
    write(out / "worked_example_bundle.json", dumps_bundle(worked_example_bundle()))
    write(out / "airsight_bundle.json", dumps_bundle(full))
    write(out / "noise_predictions.json", canonical_json(preds["noise"]))
    write(out / "airsight_manifest.json", canonical_json(full.manifest))

    malformed = dumps_bundle(full).replace('"box":[48.0,56.0,148.0,160.0]', '"box":[148.0,56.0,48.0,160.0]', 1)
    assert malformed != dumps_bundle(full)
    write(out / "malformed_bundle.json", malformed)

    c = parse_classification(CLASSIFICATION)
    profile = build_assurance_profile(full, c, resolve_weight_profile(c, load_registry()), clock=FIXED_CLOCK)
    write(out / "baseline_profile.json", render_profile(profile, "json").decode("utf-8"))

    ref = profile.reference.prediction_label_dist
    write(out / "windows" / "healthy.json", canonical_json(window("w-healthy", 1, shifted(ref, 0.29))))
    write(out / "windows" / "drifted.json", canonical_json(window("w-drifted", 2, shifted(ref, 0.31))))
    write(out / "windows" / "night_ops.json",
          canonical_json(window("w-night", 3, dict(ref), ("clear", "daylight", "night-ops"))))
    stream = [window("w-1", 4, shifted(ref, 0.05)), window("w-2", 5, shifted(ref, 0.31)),
              window("w-3", 6, shifted(ref, 0.10))]
    write(out / "windows" / "stream.ndjson", "\n".join(canonical_json(w) for w in stream))

    led = fifty_record_ledger(full.manifest)
    assert len(led.records) == 50
    save_ledger(led, out / "ledger")
    print(f"fixtures written to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
