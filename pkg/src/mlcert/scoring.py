"""Activity blending, weighted process scores, final score, band and verdict."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

from .checks import CheckSuiteReport
from .core import PROCESS_ORDER, WEIGHT_SUM_TOL, Classification, Criticality, Layer, ProcessKind
from .errors import BadWeightSum, MissingProcess, NoInputs, NoThresholds, OutOfRange, WeightMismatch
from .evidence import ManualReviewRecord

_TENTH = Decimal("0.1")


def round1(x: float) -> float:
    """Round to one decimal, half away from zero, on the exact binary value of ``x``.

    ``87 * 0.15`` is stored as 13.0499999... and so rounds to 13.0, while
    ``55 * 0.35`` is exactly 19.25 and rounds to 19.3.
    """
    return float(Decimal(x).quantize(_TENTH, rounding=ROUND_HALF_UP))


def sum1(values: Sequence[float]) -> float:
    """Exact decimal sum of one-decimal values, returned as the nearest double."""
    return float(sum((Decimal(repr(v)) for v in values), Decimal(0)))


class Provenance(str, enum.Enum):
    AS_GIVEN = "as_given"
    MANUAL_ONLY = "manual_only"
    AUTO_ONLY = "auto_only"
    BLENDED = "blended"


class ConfidenceBand(str, enum.Enum):
    OPTIMAL = "Optimal"
    STRONG = "Strong"
    MODERATE = "Moderate"
    LIMITED = "Limited"
    INSUFFICIENT = "Insufficient"

    @property
    def label(self) -> str:
        return f"{self.value} Assurance"


class Verdict(str, enum.Enum):
    NOT_CERTIFIED = "NotCertified"
    CERTIFIED_MODERATE = "CertifiedModerate"
    CERTIFIED_HIGH = "CertifiedHigh"

    @property
    def rank(self) -> int:
        return _VERDICT_RANK[self]

    @property
    def label(self) -> str:
        return _VERDICT_LABEL[self]


_VERDICT_RANK = {Verdict.NOT_CERTIFIED: 0, Verdict.CERTIFIED_MODERATE: 1, Verdict.CERTIFIED_HIGH: 2}
_VERDICT_LABEL = {
    Verdict.NOT_CERTIFIED: "Low Confidence / Not Certified",
    Verdict.CERTIFIED_MODERATE: "Certified with Moderate Confidence",
    Verdict.CERTIFIED_HIGH: "Certified with High Confidence",
}

# (high, moderate) per criticality level
DEFAULT_VERDICT_THRESHOLDS: dict[Criticality, tuple[float, float]] = {
    Criticality.A: (85.0, 70.0),
    Criticality.B: (85.0, 70.0),
    Criticality.C: (75.0, 60.0),
    Criticality.D: (75.0, 60.0),
    Criticality.E: (75.0, 60.0),
}


@dataclass(frozen=True)
class ActivityScore:
    process: ProcessKind
    activity_id: str
    layer: Layer
    manual_score: float | None
    auto_component: float | None
    blend_alpha: float
    value: float
    provenance: Provenance


@dataclass(frozen=True)
class ProcessRow:
    activity_id: str
    title: str
    score: float
    weight: float
    contribution: float
    provenance: Provenance


@dataclass(frozen=True)
class ProcessScore:
    process: ProcessKind
    rows: list[ProcessRow]
    total: float


@dataclass(frozen=True)
class FinalRow:
    process: ProcessKind
    total: float
    weight: float
    contribution: float


@dataclass(frozen=True)
class VerdictResult:
    verdict: Verdict
    thresholds_used: tuple[float, float]


@dataclass(frozen=True)
class FinalScore:
    process_rows: list[FinalRow]
    value: float
    band: ConfidenceBand
    verdict: VerdictResult


def activity_score(
    review: ManualReviewRecord | None,
    suite: CheckSuiteReport | None,
    alpha: float = 0.5,
    *,
    process: ProcessKind | None = None,
    activity_id: str | None = None,
    auto_fraction: float | None = None,
) -> ActivityScore:
    """Blend a manual review with the automated pass rate.

    The automated component is ``100 * pass fraction`` of the suite (or of
    ``auto_fraction`` when the caller has already restricted it to some
    categories).  As-given reviews are taken verbatim.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"blend alpha must be in [0, 1], got {alpha}")
    if review is not None:
        process = review.process
        activity_id = review.activity_id
        layer = review.layer
    else:
        layer = Layer.ML
    if process is None or activity_id is None:
        if review is None and suite is None:
            raise NoInputs("activity has neither a manual review nor automated results")
        raise ValueError("process and activity_id are required without a review")

    if review is not None and review.as_given:
        return ActivityScore(process, activity_id, layer, review.score, None, alpha, review.score, Provenance.AS_GIVEN)

    auto = None
    if auto_fraction is not None:
        auto = 100.0 * auto_fraction
    elif suite is not None:
        auto = 100.0 * suite.auto_pass_fraction
    manual = review.score if review is not None else None

    if manual is not None and auto is not None:
        value = alpha * manual + (1.0 - alpha) * auto
        prov = Provenance.BLENDED
    elif manual is not None:
        value, prov = manual, Provenance.MANUAL_ONLY
    elif auto is not None:
        value, prov = auto, Provenance.AUTO_ONLY
    else:
        raise NoInputs(f"{process.value}/{activity_id}: neither a manual score nor automated results")
    return ActivityScore(process, activity_id, layer, manual, auto, alpha, min(100.0, max(0.0, value)), prov)


def _check_weight_sum(weights: Mapping, what: str) -> None:
    total = math.fsum(weights.values())
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise BadWeightSum(f"{what} weights sum to {total!r}, expected 1")


def process_score(
    activities: Sequence[ActivityScore],
    weights: Mapping[str, float],
    titles: Mapping[str, str] | None = None,
) -> ProcessScore:
    """Weighted sum of activity scores; each contribution rounded to 0.1 first.

    Rows follow the order of ``weights``.
    """
    if not activities:
        raise WeightMismatch("no activities to score")
    processes = {a.process for a in activities}
    if len(processes) != 1:
        raise WeightMismatch("activities span more than one process")
    by_id = {a.activity_id: a for a in activities}
    if len(by_id) != len(activities):
        raise WeightMismatch("duplicate activity ids")
    missing = [k for k in weights if k not in by_id]
    extra = [k for k in by_id if k not in weights]
    if missing or extra:
        raise WeightMismatch(f"weights/activities differ: missing scores {missing}, unweighted {extra}")
    _check_weight_sum(weights, "activity")

    titles = titles or {}
    rows = []
    for act_id, w in weights.items():
        a = by_id[act_id]
        rows.append(ProcessRow(act_id, titles.get(act_id, act_id), a.value, w, round1(w * a.value), a.provenance))
    return ProcessScore(processes.pop(), rows, sum1([r.contribution for r in rows]))


def confidence_level(s: float) -> ConfidenceBand:
    if not (isinstance(s, (int, float)) and 0.0 <= s <= 100.0):
        raise OutOfRange(f"score {s!r} outside [0, 100]")
    if s >= 90.0:
        return ConfidenceBand.OPTIMAL
    if s >= 80.0:
        return ConfidenceBand.STRONG
    if s >= 70.0:
        return ConfidenceBand.MODERATE
    if s >= 60.0:
        return ConfidenceBand.LIMITED
    return ConfidenceBand.INSUFFICIENT


def certification_verdict(
    s: float,
    c: Classification | Criticality,
    thresholds: Mapping[Criticality, tuple[float, float]] | tuple[float, float] | None = None,
) -> VerdictResult:
    """Strictly above ``high`` certifies with high confidence; at or above ``moderate`` with moderate."""
    crit = c.crit if isinstance(c, Classification) else Criticality(c)
    if thresholds is None:
        thresholds = DEFAULT_VERDICT_THRESHOLDS
    if isinstance(thresholds, tuple):
        pair = thresholds
    else:
        if crit not in thresholds:
            raise NoThresholds(f"no verdict thresholds for criticality {crit.value}")
        pair = thresholds[crit]
    high, moderate = pair
    if s > high:
        v = Verdict.CERTIFIED_HIGH
    elif s >= moderate:
        v = Verdict.CERTIFIED_MODERATE
    else:
        v = Verdict.NOT_CERTIFIED
    return VerdictResult(v, (float(high), float(moderate)))


def final_score(
    processes: Sequence[ProcessScore],
    weights: Mapping[ProcessKind, float],
    verdict_thresholds: tuple[float, float] | None = None,
    classification: Classification | None = None,
) -> FinalScore:
    """Weighted sum of the four process totals, contributions rounded to 0.1."""
    by_kind = {p.process: p for p in processes}
    absent = [k.value for k in PROCESS_ORDER if k not in by_kind]
    if absent or len(processes) != 4:
        raise MissingProcess(f"final score needs exactly the four processes; missing {absent}")
    if set(weights) != set(PROCESS_ORDER):
        raise MissingProcess("process weights must name all four processes")
    _check_weight_sum(weights, "process")

    rows = [FinalRow(k, by_kind[k].total, weights[k], round1(weights[k] * by_kind[k].total)) for k in PROCESS_ORDER]
    value = min(100.0, max(0.0, sum1([r.contribution for r in rows])))
    band = confidence_level(value)
    if verdict_thresholds is None:
        if classification is None:
            raise NoThresholds("verdict needs thresholds or a classification")
        verdict = certification_verdict(value, classification)
    else:
        verdict = certification_verdict(value, classification.crit if classification else Criticality.D, verdict_thresholds)
    return FinalScore(rows, value, band, verdict)
