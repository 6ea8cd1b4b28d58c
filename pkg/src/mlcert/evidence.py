"""Evidence bundle types, loading and coverage.

A bundle is one JSON document with the sections ``classification``,
``datasets``, ``predictions``, ``manual_reviews``, ``resources``,
``uncertainty``, ``manifest`` and ``checksum``.  The checksum is the SHA-256 of
the canonical serialization of every other section.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from os import PathLike
from typing import Any

from .core import CheckCategory, Layer, ProcessKind, ValidationLevel
from .errors import ChecksumMismatch, MLCertError, ParseError, SchemaViolation
from .serde import canonical_json, digest, from_jsonable, loads, to_jsonable

Box = tuple[float, float, float, float]


class Split(str, enum.Enum):
    TRAIN = "train"
    TEST = "test"
    OPERATIONAL = "operational"


class FeatureKind(str, enum.Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


class Condition(str, enum.Enum):
    BASELINE = "baseline"
    NOISE = "perturbed:noise"
    OCCLUSION = "perturbed:occlusion"
    MOTION_BLUR = "perturbed:motion_blur"
    OTHER = "perturbed:other"

    @property
    def perturbed(self) -> bool:
        return self is not Condition.BASELINE


class ArtifactKind(str, enum.Enum):
    MODEL = "model"
    DATASET = "dataset"
    INTERFACE = "interface"
    CONFIG = "config"
    UNCERTAINTY = "uncertainty"


@dataclass(frozen=True)
class FeatureSummary:
    """Histogram of one image/label property.

    ``label_bin_counts`` optionally splits the histogram by label (same bins as
    ``bin_counts`` or keys of ``category_counts``); the label-association check
    needs it.
    """

    name: str
    kind: FeatureKind
    bin_edges: list[float] = field(default_factory=list)
    bin_counts: list[int] = field(default_factory=list)
    category_counts: dict[str, int] = field(default_factory=dict)
    label_bin_counts: dict[str, list[int]] = field(default_factory=dict)

    def proportions(self) -> list[float] | dict[str, float]:
        if self.kind is FeatureKind.NUMERIC:
            total = sum(self.bin_counts)
            return [c / total if total else 0.0 for c in self.bin_counts]
        total = sum(self.category_counts.values())
        return {k: (v / total if total else 0.0) for k, v in self.category_counts.items()}


@dataclass(frozen=True)
class DatasetSummary:
    split: Split
    sample_count: int
    class_counts: dict[str, int] = field(default_factory=dict)
    feature_summaries: list[FeatureSummary] = field(default_factory=list)
    missing_label_count: int = 0
    metadata: dict[str, str] = field(default_factory=dict)

    def feature(self, name: str) -> FeatureSummary | None:
        for f in self.feature_summaries:
            if f.name == name:
                return f
        return None

    @property
    def environment_tags(self) -> frozenset[str]:
        raw = self.metadata.get("environment_tags", "")
        return frozenset(t.strip() for t in raw.split(",") if t.strip())


@dataclass(frozen=True)
class Detection:
    image_id: str
    label: str
    confidence: float
    box: Box


@dataclass(frozen=True)
class GroundTruthBox:
    image_id: str
    label: str
    box: Box


@dataclass(frozen=True)
class PredictionSet:
    """Detections for one run.  ``ground_truth`` is None when no annotations exist."""

    run_id: str
    condition: Condition
    image_ids: list[str]
    detections: list[Detection] = field(default_factory=list)
    ground_truth: list[GroundTruthBox] | None = None
    condition_tag: str = ""

    def label_distribution(self) -> dict[str, float]:
        counts: dict[str, int] = {}
        for d in self.detections:
            counts[d.label] = counts.get(d.label, 0) + 1
        total = sum(counts.values())
        return {k: v / total for k, v in sorted(counts.items())} if total else {}

    @property
    def condition_name(self) -> str:
        if self.condition is Condition.OTHER and self.condition_tag:
            return f"{self.condition.value}:{self.condition_tag}"
        return self.condition.value


@dataclass(frozen=True)
class ManualReviewRecord:
    process: ProcessKind
    activity_id: str
    layer: Layer = Layer.ML
    score: float | None = None
    reviewer: str = ""
    rationale: str = ""
    as_given: bool = False


@dataclass(frozen=True)
class ResourceSamples:
    latency_ms: list[float]
    peak_memory_mb: float
    platform: str = ""


@dataclass(frozen=True)
class UncertaintyConfig:
    confidence_threshold: float
    ambiguous_band: tuple[float, float]
    failsafe_policy: str = ""


@dataclass(frozen=True)
class ManifestEntry:
    artifact_id: str
    kind: ArtifactKind
    content_hash: str
    descriptor: dict[str, str] = field(default_factory=dict)
    label_distribution: dict[str, float] | None = None


@dataclass(frozen=True)
class ArtifactManifest:
    entries: list[ManifestEntry] = field(default_factory=list)

    def get(self, artifact_id: str) -> ManifestEntry | None:
        for e in self.entries:
            if e.artifact_id == artifact_id:
                return e
        return None


@dataclass(frozen=True)
class EvidenceBundle:
    classification: str
    datasets: list[DatasetSummary] = field(default_factory=list)
    predictions: list[PredictionSet] = field(default_factory=list)
    manual_reviews: list[ManualReviewRecord] = field(default_factory=list)
    resources: ResourceSamples | None = None
    uncertainty: UncertaintyConfig | None = None
    manifest: ArtifactManifest = field(default_factory=ArtifactManifest)
    checksum: str | None = None

    def dataset(self, split: Split) -> DatasetSummary | None:
        for d in self.datasets:
            if d.split is split:
                return d
        return None

    @property
    def baseline(self) -> PredictionSet | None:
        for p in self.predictions:
            if p.condition is Condition.BASELINE:
                return p
        return None

    @property
    def perturbed(self) -> list[PredictionSet]:
        return [p for p in self.predictions if p.condition.perturbed]


# --- serialization -------------------------------------------------------------


def bundle_to_dict(bundle: EvidenceBundle, *, with_checksum: bool = True) -> dict[str, Any]:
    doc = to_jsonable(bundle)
    if not with_checksum:
        doc.pop("checksum")
    return doc


def compute_checksum(bundle: EvidenceBundle) -> str:
    return digest(bundle_to_dict(bundle, with_checksum=False))


def seal(bundle: EvidenceBundle) -> EvidenceBundle:
    """Return a copy carrying its own checksum."""
    return replace(bundle, checksum=compute_checksum(bundle))


def dumps_bundle(bundle: EvidenceBundle) -> str:
    return canonical_json(bundle_to_dict(bundle))


def parse_bundle(data: bytes | str | dict) -> EvidenceBundle:
    """Parse and validate a bundle document.  Total: only engine errors escape."""
    doc = data if isinstance(data, dict) else loads(data)
    if not isinstance(doc, dict):
        raise ParseError("bundle must be a JSON object", path="$")
    bundle = from_jsonable(EvidenceBundle, doc)
    validate_bundle(bundle)
    if bundle.checksum is not None:
        expected = compute_checksum(bundle)
        if bundle.checksum != expected:
            raise ChecksumMismatch(f"stored checksum {bundle.checksum} != recomputed {expected}")
    return bundle


def load_evidence_bundle(path: str | PathLike) -> EvidenceBundle:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read bundle: {exc.strerror}", path=str(path)) from None
    return parse_bundle(raw)


# --- invariants ----------------------------------------------------------------


def _valid_box(box: Box) -> bool:
    x0, y0, x1, y1 = box
    return x0 < x1 and y0 < y1


def _fraction(x: float) -> bool:
    return 0.0 <= x <= 1.0


def validate_bundle(b: EvidenceBundle) -> None:
    from .core import parse_classification

    try:
        parse_classification(b.classification)
    except MLCertError as exc:
        raise SchemaViolation("classification token", "classification", str(exc)) from None

    for i, d in enumerate(b.datasets):
        _validate_dataset(d, f"datasets[{i}]")

    baselines = [i for i, p in enumerate(b.predictions) if p.condition is Condition.BASELINE]
    if len(baselines) > 1:
        raise SchemaViolation("at most one baseline prediction set", f"predictions{baselines}")
    for i, p in enumerate(b.predictions):
        _validate_predictions(p, f"predictions[{i}]")

    seen: set[tuple[ProcessKind, str]] = set()
    for i, r in enumerate(b.manual_reviews):
        loc = f"manual_reviews[{i}]"
        key = (r.process, r.activity_id)
        if key in seen:
            raise SchemaViolation("activity ids unique per process", loc, f"{r.process.value}/{r.activity_id}")
        seen.add(key)
        if r.score is not None and not 0.0 <= r.score <= 100.0:
            raise SchemaViolation("review score in [0, 100]", loc)
        if r.as_given and r.score is None:
            raise SchemaViolation("as_given review carries a score", loc)

    if b.resources is not None:
        if any(x < 0 for x in b.resources.latency_ms):
            raise SchemaViolation("latency samples non-negative", "resources.latency_ms")
        if b.resources.peak_memory_mb < 0:
            raise SchemaViolation("peak memory non-negative", "resources.peak_memory_mb")

    if b.uncertainty is not None:
        _validate_uncertainty(b.uncertainty, "uncertainty")

    validate_manifest(b.manifest, "manifest")


def _validate_uncertainty(u: UncertaintyConfig, loc: str) -> None:
    low, high = u.ambiguous_band
    if not (_fraction(u.confidence_threshold) and _fraction(low) and _fraction(high)):
        raise SchemaViolation("uncertainty fractions in [0, 1]", loc)
    if low > high:
        raise SchemaViolation("ambiguous band low <= high", f"{loc}.ambiguous_band")


def _validate_dataset(d: DatasetSummary, loc: str) -> None:
    if d.sample_count < 0:
        raise SchemaViolation("sample_count non-negative", loc)
    if not 0 <= d.missing_label_count <= d.sample_count:
        raise SchemaViolation("0 <= missing_label_count <= sample_count", loc)
    if any(v < 0 for v in d.class_counts.values()):
        raise SchemaViolation("class counts non-negative", f"{loc}.class_counts")
    names = set()
    for j, f in enumerate(d.feature_summaries):
        floc = f"{loc}.feature_summaries[{j}]"
        if f.name in names:
            raise SchemaViolation("feature names unique", floc, f.name)
        names.add(f.name)
        _validate_feature(f, floc, d.sample_count)


def _validate_feature(f: FeatureSummary, loc: str, sample_count: int) -> None:
    if f.kind is FeatureKind.NUMERIC:
        edges = f.bin_edges
        if len(edges) < 2 or len(f.bin_counts) != len(edges) - 1:
            raise SchemaViolation("numeric histogram has len(bin_counts) == len(bin_edges) - 1", loc)
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise SchemaViolation("bin edges strictly increasing", loc)
        if any(c < 0 for c in f.bin_counts):
            raise SchemaViolation("bin counts non-negative", loc)
        if sum(f.bin_counts) > sample_count:
            raise SchemaViolation("bin counts sum to at most sample_count", loc)
        nbins = len(f.bin_counts)
        for label, counts in f.label_bin_counts.items():
            if len(counts) != nbins or any(c < 0 for c in counts):
                raise SchemaViolation("label histograms match the feature bins", f"{loc}.label_bin_counts.{label}")
    else:
        if not f.category_counts:
            raise SchemaViolation("categorical summary has nonempty category_counts", loc)
        if any(c < 0 for c in f.category_counts.values()):
            raise SchemaViolation("category counts non-negative", loc)
        if sum(f.category_counts.values()) > sample_count:
            raise SchemaViolation("category counts sum to at most sample_count", loc)
        if f.label_bin_counts:
            nbins = len(f.category_counts)
            for label, counts in f.label_bin_counts.items():
                if len(counts) != nbins or any(c < 0 for c in counts):
                    raise SchemaViolation("label histograms match the feature categories", f"{loc}.label_bin_counts.{label}")


def _validate_predictions(p: PredictionSet, loc: str) -> None:
    images = set(p.image_ids)
    for k, d in enumerate(p.detections):
        dloc = f"{loc}.detections[{k}]"
        if not _valid_box(d.box):
            raise SchemaViolation("box validity", dloc, f"box {list(d.box)}")
        if not _fraction(d.confidence):
            raise SchemaViolation("confidence in [0, 1]", dloc)
        if d.image_id not in images:
            raise SchemaViolation("detection references a listed image", dloc, d.image_id)
    for k, g in enumerate(p.ground_truth or ()):
        gloc = f"{loc}.ground_truth[{k}]"
        if not _valid_box(g.box):
            raise SchemaViolation("box validity", gloc, f"box {list(g.box)}")
        if g.image_id not in images:
            raise SchemaViolation("ground truth references a listed image", gloc, g.image_id)


def validate_manifest(m: ArtifactManifest, loc: str = "manifest") -> None:
    from .errors import DuplicateArtifactId

    ids = set()
    for i, e in enumerate(m.entries):
        eloc = f"{loc}.entries[{i}]"
        if e.artifact_id in ids:
            raise DuplicateArtifactId(f"duplicate artifact id {e.artifact_id!r} at {eloc}")
        ids.add(e.artifact_id)
        h = e.content_hash
        if len(h) != 64 or any(ch not in "0123456789abcdef" for ch in h):
            raise SchemaViolation("content hash is 64 lowercase hex digits", eloc)
        if e.label_distribution is not None:
            _validate_distribution(e.label_distribution, f"{eloc}.label_distribution")


def _validate_distribution(dist: dict[str, float], loc: str) -> None:
    if any(v < 0 for v in dist.values()) or abs(math.fsum(dist.values()) - 1.0) > 1e-9:
        raise SchemaViolation("distribution sums to 1", loc)


# --- coverage ------------------------------------------------------------------


@dataclass(frozen=True)
class CoverageItem:
    category: CheckCategory
    assessable: bool
    reason: str


def validate_evidence_coverage(b: EvidenceBundle, level: ValidationLevel) -> list[CoverageItem]:
    """Which check categories have the evidence they need at ``level``."""
    train, test = b.dataset(Split.TRAIN), b.dataset(Split.TEST)
    items = []

    if train is None and test is None:
        items.append(CoverageItem(CheckCategory.DATA_INTEGRITY, False, "no train or test dataset summary"))
    else:
        splits = [d.split.value for d in (train, test) if d is not None]
        items.append(CoverageItem(CheckCategory.DATA_INTEGRITY, True, "dataset summaries: " + ", ".join(splits)))

    if train is None or test is None:
        items.append(CoverageItem(CheckCategory.TRAIN_TEST, False, "needs both train and test summaries"))
    else:
        items.append(CoverageItem(CheckCategory.TRAIN_TEST, True, "train and test summaries present"))

    base = b.baseline
    if base is None:
        items.append(CoverageItem(CheckCategory.MODEL_PERFORMANCE, False, "no baseline prediction set"))
    elif base.ground_truth is None:
        items.append(CoverageItem(CheckCategory.MODEL_PERFORMANCE, False, "baseline prediction set has no ground truth"))
    else:
        reason = "baseline with ground truth"
        if level is ValidationLevel.V1:
            if b.perturbed:
                reason += f"; {len(b.perturbed)} perturbed set(s) ignored at V1"
        elif b.perturbed:
            reason += f"; {len(b.perturbed)} perturbed set(s)"
        items.append(CoverageItem(CheckCategory.MODEL_PERFORMANCE, True, reason))

    r = b.resources
    if r is None:
        items.append(CoverageItem(CheckCategory.RESOURCE, False, "no resource samples"))
    elif not r.latency_ms:
        items.append(CoverageItem(CheckCategory.RESOURCE, False, "empty latency samples"))
    else:
        items.append(CoverageItem(CheckCategory.RESOURCE, True, f"{len(r.latency_ms)} latency samples"))
    return items
