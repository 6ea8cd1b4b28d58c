"""Classification triple, validation levels and the weight registry."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Mapping

from .errors import (
    ClassificationError,
    InvalidWeights,
    NoMatchingProfile,
    RegistryError,
    UnknownAutonomy,
    UnknownComplexity,
    UnknownCriticality,
)

WEIGHT_SUM_TOL = 1e-9


class Criticality(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"


class Autonomy(str, enum.Enum):
    L1A = "1A"
    L1B = "1B"
    L2A = "2A"
    L2B = "2B"
    L3A = "3A"
    L3B = "3B"


class ProcessKind(str, enum.Enum):
    """The four scored processes, in report order."""

    DEV = "Dev"
    VANDV = "VandV"
    QA = "QA"
    CM = "CM"


PROCESS_ORDER = (ProcessKind.DEV, ProcessKind.VANDV, ProcessKind.QA, ProcessKind.CM)


class CheckCategory(str, enum.Enum):
    DATA_INTEGRITY = "DataIntegrity"
    TRAIN_TEST = "TrainTest"
    MODEL_PERFORMANCE = "ModelPerformance"
    RESOURCE = "Resource"


CATEGORY_ORDER = tuple(CheckCategory)


class Layer(str, enum.Enum):
    BASE = "Base"
    ML = "ML"
    HUMAN_FACTORS = "HumanFactors"


class ValidationLevel(str, enum.Enum):
    V1 = "V1"
    V2 = "V2"
    V3 = "V3"

    @property
    def description(self) -> str:
        return _LEVEL_DESCRIPTIONS[self]

    @property
    def rank(self) -> int:
        return int(self.value[1])


_LEVEL_DESCRIPTIONS = {
    ValidationLevel.V1: "minimal validation: integrity, drift, baseline performance, resources",
    ValidationLevel.V2: "additional validation: V1 plus prediction-drift checks",
    ValidationLevel.V3: "extensive validation: V2 plus perturbation-robustness checks",
}


@dataclass(frozen=True)
class Classification:
    crit: Criticality
    autonomy: Autonomy
    model_complexity: int

    def __post_init__(self):
        object.__setattr__(self, "crit", _enum_token(Criticality, self.crit, UnknownCriticality))
        object.__setattr__(self, "autonomy", _enum_token(Autonomy, self.autonomy, UnknownAutonomy))
        mc = self.model_complexity
        if isinstance(mc, str) and mc.strip().isdigit():
            mc = int(mc.strip())
        if isinstance(mc, bool) or mc not in (1, 2, 3):
            raise UnknownComplexity(f"unknown ML complexity token {self.model_complexity!r}")
        object.__setattr__(self, "model_complexity", mc)

    @property
    def key(self) -> str:
        return f"{self.crit.value}/{self.autonomy.value}/{self.model_complexity}"

    def __str__(self) -> str:
        return self.key


def _enum_token(enum_cls, token, error):
    if isinstance(token, enum_cls):
        return token
    if isinstance(token, str):
        try:
            return enum_cls(token.strip().upper())
        except ValueError:
            pass
    raise error(f"unknown {enum_cls.__name__.lower()} token {token!r}")


def parse_classification(text: str) -> Classification:
    """Parse ``"D/2A/3"`` style tokens (case-insensitive)."""
    if not isinstance(text, str):
        raise ClassificationError(f"classification must be text, got {type(text).__name__}")
    parts = text.split("/")
    if len(parts) != 3:
        raise ClassificationError(f"expected three '/'-separated tokens, got {text!r}")
    crit, aut, model = parts
    return Classification(crit, aut, model.strip())


def required_validation_level(c: Classification) -> ValidationLevel:
    return (ValidationLevel.V1, ValidationLevel.V2, ValidationLevel.V3)[c.model_complexity - 1]


@dataclass(frozen=True)
class WeightProfile:
    """Resolved weights for one classification.

    ``activity_weights`` keeps registry order, which is also report row order.
    ``raw_category_weights`` holds the row as written, before normalization.
    """

    process_weights: dict[ProcessKind, float]
    activity_weights: dict[ProcessKind, dict[str, float]]
    category_weights: dict[CheckCategory, float]
    source_key: str
    raw_category_weights: dict[CheckCategory, float] = field(default_factory=dict)
    verdict_thresholds: tuple[float, float] | None = None
    activity_titles: dict[str, str] = field(default_factory=dict)

    def title(self, activity_id: str) -> str:
        return self.activity_titles.get(activity_id) or activity_id.replace("_", " ").title()


# --- registry -----------------------------------------------------------------


def load_registry(path=None) -> dict:
    """Load a weight-registry document; the shipped default when ``path`` is None."""
    if path is None:
        text = resources.files("mlcert").joinpath("data/weights.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RegistryError(f"weight registry is not valid JSON: {exc}") from None
    validate_registry(doc)
    return doc


def validate_registry(doc: Any) -> None:
    if not isinstance(doc, dict) or not isinstance(doc.get("profiles"), list):
        raise RegistryError("weight registry needs a top-level 'profiles' list")
    for i, prof in enumerate(doc["profiles"]):
        if not isinstance(prof, dict) or not isinstance(prof.get("key"), str):
            raise RegistryError(f"profiles[{i}] needs a string 'key'")
        _pattern_tokens(prof["key"])
        for section in ("process_weights", "activity_weights", "category_weights"):
            if not isinstance(prof.get(section), dict):
                raise RegistryError(f"profiles[{i}] ({prof['key']}) is missing '{section}'")
        thr = prof.get("verdict_thresholds")
        if thr is not None:
            if not (isinstance(thr, dict) and _is_num(thr.get("high")) and _is_num(thr.get("moderate"))):
                raise RegistryError(f"profiles[{i}] verdict_thresholds needs numeric 'high' and 'moderate'")


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _pattern_tokens(key: str) -> tuple[str, str, str]:
    parts = [p.strip() for p in key.split("/")]
    if len(parts) != 3:
        raise RegistryError(f"registry key {key!r} must have three '/'-separated tokens")
    crit, aut, model = parts
    if crit != "*":
        _enum_token(Criticality, crit, UnknownCriticality)
    if aut != "*":
        _enum_token(Autonomy, aut, UnknownAutonomy)
    if model != "*" and model not in ("1", "2", "3"):
        raise UnknownComplexity(f"unknown ML complexity token {model!r} in registry key {key!r}")
    return crit.upper(), aut.upper(), model


def _match_specificity(key: str, c: Classification) -> int | None:
    tokens = _pattern_tokens(key)
    actual = (c.crit.value, c.autonomy.value, str(c.model_complexity))
    score = 0
    for pat, val in zip(tokens, actual):
        if pat == "*":
            continue
        if pat != val:
            return None
        score += 1
    return score


def resolve_weight_profile(c: Classification, registry: Mapping[str, Any]) -> WeightProfile:
    """Pick the most specific matching registry entry and validate its weights.

    Specificity is the number of concrete (non-``*``) tokens in the key; ties go
    to the entry listed first.
    """
    validate_registry(registry)
    best, best_score = None, -1
    for prof in registry["profiles"]:
        s = _match_specificity(prof["key"], c)
        if s is not None and s > best_score:
            best, best_score = prof, s
    if best is None:
        raise NoMatchingProfile(f"no weight profile matches {c.key}")
    titles = {**(registry.get("activity_titles") or {}), **(best.get("activity_titles") or {})}
    return _build_profile(best, titles)


def _weight(value, where: str) -> float:
    if not _is_num(value):
        raise InvalidWeights(f"{where}: weight {value!r} is not a number")
    if value < 0 or value > 1:
        raise InvalidWeights(f"{where}: weight {value} outside [0, 1]")
    return float(value)


def _check_sum(weights: Mapping, where: str) -> None:
    total = math.fsum(weights.values())
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise InvalidWeights(f"{where}: weights sum to {total!r}, expected 1")


def _build_profile(prof: Mapping[str, Any], titles: Mapping[str, str]) -> WeightProfile:
    key = prof["key"]
    try:
        pw = {ProcessKind(k): _weight(v, f"{key} process_weights.{k}") for k, v in prof["process_weights"].items()}
        aw: dict[ProcessKind, dict[str, float]] = {}
        for k, acts in prof["activity_weights"].items():
            if not isinstance(acts, dict) or not acts:
                raise InvalidWeights(f"{key} activity_weights.{k} must be a nonempty object")
            aw[ProcessKind(k)] = {a: _weight(v, f"{key} activity_weights.{k}.{a}") for a, v in acts.items()}
        raw_cw = {CheckCategory(k): _weight(v, f"{key} category_weights.{k}") for k, v in prof["category_weights"].items()}
    except ValueError as exc:
        if isinstance(exc, InvalidWeights):
            raise
        raise InvalidWeights(f"{key}: {exc}") from None

    if set(pw) != set(PROCESS_ORDER):
        raise InvalidWeights(f"{key}: process_weights must name exactly {[p.value for p in PROCESS_ORDER]}")
    if set(aw) != set(PROCESS_ORDER):
        raise InvalidWeights(f"{key}: activity_weights must cover all four processes")
    if set(raw_cw) != set(CATEGORY_ORDER):
        raise InvalidWeights(f"{key}: category_weights must name all four check categories")
    _check_sum(pw, f"{key} process_weights")
    for p, acts in aw.items():
        _check_sum(acts, f"{key} activity_weights.{p.value}")

    total = math.fsum(raw_cw.values())
    if total <= 0:
        raise InvalidWeights(f"{key}: category weights sum to zero")
    cw = dict(raw_cw) if abs(total - 1.0) <= WEIGHT_SUM_TOL else {k: v / total for k, v in raw_cw.items()}

    thr = prof.get("verdict_thresholds")
    thresholds = (float(thr["high"]), float(thr["moderate"])) if thr else None
    return WeightProfile(
        process_weights={p: pw[p] for p in PROCESS_ORDER},
        activity_weights={p: aw[p] for p in PROCESS_ORDER},
        category_weights={c: cw[c] for c in CATEGORY_ORDER},
        source_key=key,
        raw_category_weights={c: raw_cw[c] for c in CATEGORY_ORDER},
        verdict_thresholds=thresholds,
        activity_titles=dict(titles),
    )
