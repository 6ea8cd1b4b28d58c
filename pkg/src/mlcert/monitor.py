"""Post-certification monitoring: operational windows against recertification triggers."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields
from datetime import datetime
from os import PathLike
from typing import Any, Mapping, Sequence

from .checks import total_variation
from .errors import MissingBaseline, ParseError, SchemaViolation, UnorderedWindows
from .evidence import DatasetSummary, FeatureKind, UncertaintyConfig, _validate_dataset, _validate_uncertainty
from .metrics import PerformanceMetrics
from .serde import from_jsonable, loads

DEFAULT_DRIFT_THRESHOLD = 0.30


def parse_timestamp(text: str) -> datetime:
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    return datetime.fromisoformat(text)


class TriggerKind(str, enum.Enum):
    PERFORMANCE_DEGRADATION = "PerformanceDegradation"
    DATASET_SHIFT = "DatasetShift"
    ENVIRONMENTAL_CHANGE = "EnvironmentalChange"
    UNCERTAINTY_UPDATE = "UncertaintyUpdate"


@dataclass(frozen=True)
class BaselineReference:
    """What a certified baseline looked like, for later comparison."""

    prediction_label_dist: dict[str, float] | None = None
    label_dist: dict[str, float] | None = None
    dataset_summary: DatasetSummary | None = None
    uncertainty: UncertaintyConfig | None = None
    environment_tags: list[str] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return self.prediction_label_dist is None and self.label_dist is None and self.dataset_summary is None


@dataclass(frozen=True)
class Period:
    start: str
    end: str


@dataclass(frozen=True)
class OperationalWindow:
    window_id: str
    period: Period
    prediction_label_dist: dict[str, float] | None = None
    metrics: PerformanceMetrics | None = None
    dataset_summary: DatasetSummary | None = None
    environment_tags: list[str] = field(default_factory=list)
    uncertainty: UncertaintyConfig | None = None

    @property
    def start(self) -> datetime:
        return parse_timestamp(self.period.start)

    @property
    def end(self) -> datetime:
        return parse_timestamp(self.period.end)


@dataclass(frozen=True)
class TriggerConfig:
    min_accuracy_metrics: dict[str, float] = field(default_factory=dict)
    drift_threshold: float = DEFAULT_DRIFT_THRESHOLD
    baseline_env_tags: list[str] | None = None
    baseline_uncertainty: UncertaintyConfig | None = None

    def __post_init__(self):
        if not 0.0 < self.drift_threshold < 1.0:
            raise ValueError(f"drift_threshold must be in (0, 1), got {self.drift_threshold}")
        for k in self.min_accuracy_metrics:
            if k not in ("precision", "recall", "f1", "map_50"):
                raise ValueError(f"unknown metric {k!r} in min_accuracy_metrics")


@dataclass(frozen=True)
class FiredTrigger:
    kind: TriggerKind
    magnitude: float
    detail: str


@dataclass(frozen=True)
class TriggerReport:
    window_id: str
    fired: list[FiredTrigger]
    recertification_required: bool


def _reference(baseline: Any) -> BaselineReference:
    ref = getattr(baseline, "reference", baseline)
    if not isinstance(ref, BaselineReference) or ref.empty:
        raise MissingBaseline("baseline carries no reference distributions")
    return ref


def _summary_drift(ref: DatasetSummary, cur: DatasetSummary) -> tuple[float, str]:
    """Largest total-variation shift over class proportions and shared feature histograms."""
    worst, what = 0.0, ""
    if sum(ref.class_counts.values()) and sum(cur.class_counts.values()):
        worst, what = total_variation(ref.class_counts, cur.class_counts), "class distribution"
    for f in ref.feature_summaries:
        g = cur.feature(f.name)
        if g is None or g.kind is not f.kind:
            continue
        if f.kind is FeatureKind.NUMERIC:
            if f.bin_edges != g.bin_edges or not sum(f.bin_counts) or not sum(g.bin_counts):
                continue
            tv = total_variation(f.bin_counts, g.bin_counts)
        else:
            tv = total_variation(f.category_counts, g.category_counts)
        if tv > worst:
            worst, what = tv, f"feature {f.name}"
    return worst, what


def evaluate_triggers(baseline: Any, window: OperationalWindow, cfg: TriggerConfig | None = None) -> TriggerReport:
    """Check one window against the four recertification triggers.

    ``baseline`` is an AssuranceProfile or a bare BaselineReference.  Drift
    fires only when strictly above the threshold.
    """
    cfg = cfg or TriggerConfig()
    ref = _reference(baseline)
    fired: list[FiredTrigger] = []

    if window.metrics is not None:
        for name, minimum in cfg.min_accuracy_metrics.items():
            value = window.metrics.get(name)
            if value < minimum:
                fired.append(FiredTrigger(TriggerKind.PERFORMANCE_DEGRADATION, minimum - value,
                                          f"{name} {value:.3f} below minimum {minimum:.3f}"))

    shifts = []
    reference_dist = ref.prediction_label_dist or ref.label_dist
    if window.prediction_label_dist and reference_dist:
        tv = total_variation(reference_dist, window.prediction_label_dist)
        shifts.append((tv, "prediction label distribution"))
    if window.dataset_summary is not None and ref.dataset_summary is not None:
        shifts.append(_summary_drift(ref.dataset_summary, window.dataset_summary))
    for tv, what in shifts:
        if tv > cfg.drift_threshold:
            fired.append(FiredTrigger(TriggerKind.DATASET_SHIFT, tv,
                                      f"{what} moved {tv:.1%} (threshold {cfg.drift_threshold:.0%})"))

    base_tags = set(cfg.baseline_env_tags if cfg.baseline_env_tags is not None else ref.environment_tags)
    new_tags = sorted(set(window.environment_tags) - base_tags)
    if new_tags:
        fired.append(FiredTrigger(TriggerKind.ENVIRONMENTAL_CHANGE, float(len(new_tags)),
                                  f"new operating conditions: {', '.join(new_tags)}"))

    base_unc = cfg.baseline_uncertainty or ref.uncertainty
    if window.uncertainty is not None and base_unc is not None:
        changed = [f.name for f in fields(UncertaintyConfig)
                   if getattr(window.uncertainty, f.name) != getattr(base_unc, f.name)]
        if changed:
            fired.append(FiredTrigger(TriggerKind.UNCERTAINTY_UPDATE, float(len(changed)),
                                      f"uncertainty handling changed: {', '.join(changed)}"))

    return TriggerReport(window.window_id, fired, bool(fired))


def monitor_stream(
    baseline: Any, windows: Sequence[OperationalWindow], cfg: TriggerConfig | None = None
) -> list[TriggerReport]:
    """Evaluate windows independently, in input order.  Windows must be ordered by start time."""
    for prev, cur in zip(windows, windows[1:]):
        try:
            out_of_order = cur.start < prev.start
        except TypeError:
            raise UnorderedWindows("windows mix timezone-aware and naive timestamps") from None
        if out_of_order:
            raise UnorderedWindows(f"window {cur.window_id!r} starts before {prev.window_id!r}")
    return [evaluate_triggers(baseline, w, cfg) for w in windows]


# --- files ---------------------------------------------------------------------


def validate_window(w: OperationalWindow, loc: str = "window") -> None:
    try:
        start, end = w.start, w.end
    except ValueError as exc:
        raise SchemaViolation("ISO-8601 period", f"{loc}.period", str(exc)) from None
    if (start.tzinfo is None) != (end.tzinfo is None):
        raise SchemaViolation("period timestamps agree on timezone awareness", f"{loc}.period")
    if not start < end:
        raise SchemaViolation("period start < end", f"{loc}.period")
    if w.prediction_label_dist is not None:
        d = w.prediction_label_dist
        if any(v < 0 for v in d.values()) or abs(math.fsum(d.values()) - 1.0) > 1e-9:
            raise SchemaViolation("distribution sums to 1", f"{loc}.prediction_label_dist")
    if w.dataset_summary is not None:
        _validate_dataset(w.dataset_summary, f"{loc}.dataset_summary")
    if w.uncertainty is not None:
        _validate_uncertainty(w.uncertainty, f"{loc}.uncertainty")


def parse_windows(data: bytes | str) -> list[OperationalWindow]:
    """One window document, or newline-delimited window documents."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        docs = [loads(text)]
    except ParseError:
        docs = [loads(line) for line in text.splitlines() if line.strip()]
    out = []
    for i, doc in enumerate(docs):
        w = from_jsonable(OperationalWindow, doc, f"$[{i}]")
        validate_window(w, f"windows[{i}]")
        out.append(w)
    return out


def load_windows(paths: Sequence[str | PathLike]) -> list[OperationalWindow]:
    windows = []
    for p in paths:
        try:
            with open(p, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read window file: {exc.strerror}", path=str(p)) from None
        try:
            windows.extend(parse_windows(raw))
        except UnicodeDecodeError:
            raise ParseError("window file is not valid UTF-8", path=str(p)) from None
    return windows


def trigger_config_from_dict(doc: Mapping[str, Any] | None) -> TriggerConfig:
    if not doc:
        return TriggerConfig()
    return from_jsonable(TriggerConfig, dict(doc), "$trigger_config")
