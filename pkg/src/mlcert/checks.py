"""Automated checks over an evidence bundle, scored 0..1 and grouped by category."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .config import EngineConfig
from .core import (
    CATEGORY_ORDER,
    CheckCategory,
    Classification,
    ValidationLevel,
    WeightProfile,
    required_validation_level,
)
from .errors import (
    BinMismatch,
    EmptyDataset,
    EmptySamples,
    NoGroundTruth,
    NoPerturbedRuns,
    NoSharedFeatures,
    NothingAssessable,
    ZeroBaseline,
)
from .evidence import (
    CoverageItem,
    DatasetSummary,
    EvidenceBundle,
    FeatureKind,
    FeatureSummary,
    PredictionSet,
    ResourceSamples,
    Split,
    validate_evidence_coverage,
)
from .metrics import PerformanceMetrics, evaluate_performance

_BELOW_ONE = math.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    category: CheckCategory
    score: float
    passed: bool
    findings: list[str] = field(default_factory=list)
    measurements: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class CategoryScore:
    category: CheckCategory
    assessed: bool
    score: float | None
    check_results: list[CheckResult] = field(default_factory=list)
    reason: str = ""


@dataclass(frozen=True)
class CheckSuiteReport:
    classification: str
    validation_level: ValidationLevel
    category_scores: list[CategoryScore]
    effective_weights: dict[CheckCategory, float]
    suite_score: float
    auto_pass_fraction: float
    coverage: list[CoverageItem] = field(default_factory=list)

    @property
    def results(self) -> list[CheckResult]:
        return [r for cs in self.category_scores for r in cs.check_results]

    def pass_fraction(self, categories: Sequence[CheckCategory] | None = None) -> float | None:
        """Fraction of executed checks that passed, optionally within some categories."""
        wanted = set(categories) if categories is not None else set(CATEGORY_ORDER)
        rs = [r for r in self.results if r.category in wanted]
        if not rs:
            return None
        return sum(r.passed for r in rs) / len(rs)


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def linear_score(value: float, pass_at: float, zero_at: float) -> float:
    """1 at or below ``pass_at``, 0 at or above ``zero_at``, linear between."""
    if value <= pass_at:
        return 1.0
    if value >= zero_at:
        return 0.0
    return min((zero_at - value) / (zero_at - pass_at), _BELOW_ONE)


def _result(check_id, category, score, passed, pass_threshold, findings=(), measurements=None):
    """Build a CheckResult whose score sits on the right side of its pass threshold.

    The adjustment only ever moves a score by float rounding distance.
    """
    score = _clamp01(score)
    if passed and score < pass_threshold:
        score = pass_threshold
    elif not passed and score >= pass_threshold:
        score = math.nextafter(pass_threshold, 0.0)
    m = dict(measurements or {})
    m["pass_threshold"] = float(pass_threshold)
    return CheckResult(check_id, category, score, bool(passed), list(findings), m)


# --- distribution statistics ---------------------------------------------------


def _floored(props: Sequence[float], eps: float) -> list[float]:
    fl = [p if p > eps else eps for p in props]
    s = math.fsum(fl)
    return [p / s for p in fl]


def _props(counts: Sequence[float]) -> list[float]:
    total = math.fsum(counts)
    return [c / total if total else 0.0 for c in counts]


def psi_from_counts(ref: Sequence[float], cur: Sequence[float], epsilon: float = 1e-4) -> float:
    if len(ref) != len(cur):
        raise BinMismatch(f"histograms have {len(ref)} and {len(cur)} bins")
    p = _floored(_props(ref), epsilon)
    q = _floored(_props(cur), epsilon)
    return max(0.0, math.fsum((a - b) * math.log(a / b) for a, b in zip(p, q)))


def psi(ref: FeatureSummary, cur: FeatureSummary, epsilon: float = 1e-4) -> float:
    """Population stability index between two histograms of the same feature."""
    if ref.kind is not cur.kind:
        raise BinMismatch(f"feature {ref.name!r}: kinds differ ({ref.kind.value} vs {cur.kind.value})")
    if ref.kind is FeatureKind.NUMERIC:
        if list(ref.bin_edges) != list(cur.bin_edges):
            raise BinMismatch(f"feature {ref.name!r}: bin edges differ")
        return psi_from_counts(ref.bin_counts, cur.bin_counts, epsilon)
    if set(ref.category_counts) != set(cur.category_counts):
        raise BinMismatch(f"feature {ref.name!r}: categories differ")
    keys = sorted(ref.category_counts)
    return psi_from_counts([ref.category_counts[k] for k in keys], [cur.category_counts[k] for k in keys], epsilon)


def total_variation(ref: Mapping[str, float] | Sequence[float], cur: Mapping[str, float] | Sequence[float]) -> float:
    """Half the L1 distance between two distributions (weights are normalized first).

    Mappings are united over their keys, missing keys counting 0.
    """
    if isinstance(ref, Mapping) or isinstance(cur, Mapping):
        if not (isinstance(ref, Mapping) and isinstance(cur, Mapping)):
            raise TypeError("total_variation needs two mappings or two sequences")
        keys = sorted(set(ref) | set(cur))
        p = [ref.get(k, 0.0) for k in keys]
        q = [cur.get(k, 0.0) for k in keys]
    else:
        p, q = list(ref), list(cur)
        if len(p) != len(q):
            raise BinMismatch(f"distributions have {len(p)} and {len(q)} entries")
    sp, sq = math.fsum(p), math.fsum(q)
    if sp <= 0 or sq <= 0 or any(x < 0 for x in p) or any(x < 0 for x in q):
        raise ValueError("distributions need non-negative weights with positive mass")
    tv = 0.5 * math.fsum(abs(a / sp - b / sq) for a, b in zip(p, q))
    return min(tv, 1.0)


def histogram_quantile(edges: Sequence[float], counts: Sequence[float], q: float) -> float:
    """Quantile of a histogram, assuming mass is uniform within each bin."""
    total = math.fsum(counts)
    if total <= 0:
        return edges[0]
    target = q * total
    cum = 0.0
    for i, c in enumerate(counts):
        if c > 0 and cum + c >= target:
            frac = (target - cum) / c
            return edges[i] + frac * (edges[i + 1] - edges[i])
        cum += c
    return edges[-1]


def histogram_outlier_fraction(edges: Sequence[float], counts: Sequence[float], k: float = 1.5) -> float:
    """Share of histogram mass outside the Tukey fences [Q1 - k IQR, Q3 + k IQR]."""
    total = math.fsum(counts)
    if total <= 0:
        return 0.0
    q1 = histogram_quantile(edges, counts, 0.25)
    q3 = histogram_quantile(edges, counts, 0.75)
    lo, hi = q1 - k * (q3 - q1), q3 + k * (q3 - q1)
    outside = 0.0
    for (a, b), c in zip(zip(edges, edges[1:]), counts):
        if c == 0:
            continue
        width = b - a
        below = _clamp01((lo - a) / width)
        above = _clamp01((b - hi) / width)
        outside += c * min(1.0, below + above)
    return outside / total


def cramers_v(table: Sequence[Sequence[float]]) -> float:
    """Cramér's V of a contingency table; empty rows and columns are dropped."""
    rows = [list(r) for r in table if math.fsum(r) > 0]
    if not rows:
        return 0.0
    keep = [j for j in range(len(rows[0])) if math.fsum(r[j] for r in rows) > 0]
    rows = [[r[j] for j in keep] for r in rows]
    k = min(len(rows), len(keep))
    if k < 2:
        return 0.0
    n = math.fsum(math.fsum(r) for r in rows)
    row_tot = [math.fsum(r) for r in rows]
    col_tot = [math.fsum(r[j] for r in rows) for j in range(len(keep))]
    chi2 = 0.0
    for i, r in enumerate(rows):
        for j, obs in enumerate(r):
            exp = row_tot[i] * col_tot[j] / n
            chi2 += (obs - exp) ** 2 / exp
    return min(1.0, math.sqrt(chi2 / (n * (k - 1))))


def _label_table(f: FeatureSummary) -> list[list[float]]:
    return [list(f.label_bin_counts[label]) for label in sorted(f.label_bin_counts)]


# --- data integrity ------------------------------------------------------------


def check_dataset_integrity(d: DatasetSummary, cfg: EngineConfig | None = None) -> list[CheckResult]:
    """Class balance, missing labels, property outliers and label-property association."""
    cfg = cfg or EngineConfig()
    if d.sample_count == 0:
        raise EmptyDataset(f"{d.split.value} summary has no samples")
    cat = CheckCategory.DATA_INTEGRITY
    prefix = d.split.value
    out = []

    pass_at, zero_at = cfg.threshold("class_balance")
    counts = list(d.class_counts.values())
    if not counts:
        out.append(_result(f"{prefix}.class_balance", cat, 0.0, False, 1.0, ["no class counts reported"]))
    else:
        lo, hi = min(counts), max(counts)
        m = {"min_class_count": float(lo), "max_class_count": float(hi)}
        if lo == 0:
            empty = sorted(k for k, v in d.class_counts.items() if v == 0)
            out.append(_result(f"{prefix}.class_balance", cat, 0.0, False, 1.0, [f"classes with no samples: {empty}"], m))
        else:
            ratio = hi / lo
            m["imbalance_ratio"] = ratio
            score = linear_score(ratio, pass_at, zero_at)
            findings = [] if ratio <= pass_at else [f"imbalance ratio {ratio:.2f} exceeds {pass_at:g}"]
            out.append(_result(f"{prefix}.class_balance", cat, score, ratio <= pass_at, 1.0, findings, m))

    pass_at, zero_at = cfg.threshold("missing_labels")
    frac = d.missing_label_count / d.sample_count
    findings = [] if frac <= pass_at else [f"{d.missing_label_count} of {d.sample_count} samples lack labels"]
    out.append(
        _result(f"{prefix}.missing_labels", cat, linear_score(frac, pass_at, zero_at), frac <= pass_at, 1.0,
                findings, {"missing_fraction": frac})
    )

    pass_at, zero_at = cfg.threshold("property_outliers")
    numeric = [f for f in d.feature_summaries if f.kind is FeatureKind.NUMERIC]
    if not numeric:
        out.append(_result(f"{prefix}.property_outliers", cat, 1.0, True, 1.0, ["no numeric properties summarized"]))
    else:
        fracs = {f.name: histogram_outlier_fraction(f.bin_edges, f.bin_counts) for f in numeric}
        worst = max(fracs, key=lambda k: (fracs[k], k))
        w = fracs[worst]
        findings = [f"{name}: {v:.1%} of mass outside 1.5 IQR fences" for name, v in fracs.items() if v > pass_at]
        m = {f"outlier_fraction.{k}": v for k, v in fracs.items()}
        m["worst_outlier_fraction"] = w
        out.append(_result(f"{prefix}.property_outliers", cat, linear_score(w, pass_at, zero_at), w <= pass_at, 1.0,
                           findings, m))

    pass_at, zero_at = cfg.threshold("label_property_correlation")
    joint = [f for f in d.feature_summaries if f.label_bin_counts]
    findings = ["association measured with Cramér's V as a predictive-power stand-in"]
    if not joint:
        findings.append("no label-conditioned histograms; association not assessed")
        out.append(_result(f"{prefix}.label_property_correlation", cat, 1.0, True, 1.0, findings,
                           {"features_assessed": 0.0}))
    else:
        vs = {f.name: cramers_v(_label_table(f)) for f in joint}
        worst = max(vs, key=lambda k: (vs[k], k))
        v = vs[worst]
        findings += [f"{name}: Cramér's V {x:.3f} above {pass_at:g}" for name, x in vs.items() if x > pass_at]
        m = {f"cramers_v.{k}": x for k, x in vs.items()}
        m["max_cramers_v"] = v
        m["features_assessed"] = float(len(vs))
        out.append(_result(f"{prefix}.label_property_correlation", cat, linear_score(v, pass_at, zero_at),
                           v <= pass_at, 1.0, findings, m))
    return out


# --- train/test ----------------------------------------------------------------


def _label_drift(train: DatasetSummary, test: DatasetSummary, cfg: EngineConfig) -> CheckResult | None:
    if not (sum(train.class_counts.values()) and sum(test.class_counts.values())):
        return None
    tv = total_variation(train.class_counts, test.class_counts)
    score = _clamp01(1.0 - tv / cfg.tv_max)
    thr = cfg.raw["thresholds"]["drift_pass_score"]
    findings = [f"label distribution moved {tv:.1%} between train and test"] if score < thr else []
    return _result("train_test.label_drift", CheckCategory.TRAIN_TEST, score, score >= thr, thr, findings,
                   {"total_variation": tv, "tv_max": cfg.tv_max})


def check_train_test_drift(train: DatasetSummary, test: DatasetSummary, cfg: EngineConfig | None = None) -> list[CheckResult]:
    """Feature drift (PSI / total variation) plus label-distribution drift."""
    cfg = cfg or EngineConfig()
    names_train = [f.name for f in train.feature_summaries]
    names_test = {f.name for f in test.feature_summaries}
    shared = [n for n in names_train if n in names_test]
    if not shared:
        raise NoSharedFeatures("train and test summaries share no features")

    thr = cfg.raw["thresholds"]["drift_pass_score"]
    stats, scores, findings = {}, [], []
    for name in shared:
        a, b = train.feature(name), test.feature(name)
        if a.kind is not b.kind:
            raise BinMismatch(f"feature {name!r}: kinds differ between train and test")
        if a.kind is FeatureKind.NUMERIC:
            stat, cap, label = psi(a, b, cfg.epsilon), cfg.psi_max, "psi"
        else:
            stat, cap, label = total_variation(a.category_counts, b.category_counts), cfg.tv_max, "tv"
        stats[f"{label}.{name}"] = stat
        s = _clamp01(1.0 - stat / cap)
        scores.append(s)
        if s < thr:
            findings.append(f"{name}: {label.upper()} {stat:.4f} (max {cap:g})")
    only = sorted(set(names_train) ^ names_test)
    if only:
        findings.append(f"features not summarized in both splits: {only}")
    score = sum(scores) / len(scores)
    out = [_result("train_test.feature_drift", CheckCategory.TRAIN_TEST, score, score >= thr, thr, findings, stats)]
    lab = _label_drift(train, test, cfg)
    if lab is not None:
        out.append(lab)
    return out


# --- model performance ---------------------------------------------------------


def check_model_performance(
    p: PredictionSet,
    thresholds: Mapping[str, float] | None = None,
    iou_threshold: float = 0.5,
    metrics: PerformanceMetrics | None = None,
) -> CheckResult:
    thresholds = dict(EngineConfig().performance_thresholds if thresholds is None else thresholds)
    if p.ground_truth is None:
        raise NoGroundTruth(f"prediction set {p.run_id!r} has no ground truth")
    m = metrics or evaluate_performance(p, iou_threshold)
    terms, findings, passed = [], [], True
    for name, minimum in thresholds.items():
        value = m.get(name)
        if value >= minimum:
            terms.append(1.0)
        else:
            passed = False
            terms.append(min(value / minimum, _BELOW_ONE))
            findings.append(f"{name} {value:.3f} below required {minimum:.3f}")
    score = sum(terms) / len(terms) if terms else 1.0
    meas = {"precision": m.precision, "recall": m.recall, "f1": m.f1, "map_50": m.map_50}
    meas.update({f"ap.{k}": v for k, v in m.per_class_ap.items()})
    meas.update({f"min.{k}": float(v) for k, v in thresholds.items()})
    return _result("model_performance", CheckCategory.MODEL_PERFORMANCE, score, passed, 1.0, findings, meas)


def check_robustness(
    baseline: PerformanceMetrics,
    perturbed_sets: Sequence[tuple[str, PerformanceMetrics]],
    tolerance: float = 0.10,
) -> CheckResult:
    """Worst relative mAP loss across perturbed runs against ``tolerance``."""
    if not perturbed_sets:
        raise NoPerturbedRuns("robustness check needs at least one perturbed run")
    if baseline.map_50 == 0:
        raise ZeroBaseline("baseline mAP is zero; relative degradation undefined")
    meas, worst, worst_cond = {}, -math.inf, ""
    for cond, pm in perturbed_sets:
        d = (baseline.map_50 - pm.map_50) / baseline.map_50
        meas[f"degradation.{cond}"] = d
        if d > worst:
            worst, worst_cond = d, cond
    score = _clamp01(1.0 - worst / (2 * tolerance))
    passed = worst <= tolerance
    meas.update({"worst_degradation": worst, "tolerance": tolerance, "baseline_map_50": baseline.map_50})
    findings = [] if passed else [f"mAP drops {worst:.1%} under {worst_cond} (tolerance {tolerance:.0%})"]
    return _result("robustness", CheckCategory.MODEL_PERFORMANCE, score, passed, 0.5, findings, meas)


def check_prediction_drift(
    baseline: PredictionSet, perturbed: Sequence[PredictionSet], tv_max: float = 0.30
) -> CheckResult | None:
    """Shift of the predicted-label distribution between baseline and perturbed runs.

    Scored like robustness: 1 at no shift, 0.5 at ``tv_max``, 0 at twice that.
    Returns None when no pair of runs has detections to compare.
    """
    ref = baseline.label_distribution()
    if not ref:
        return None
    meas, worst, worst_cond = {}, -1.0, ""
    for p in perturbed:
        cur = p.label_distribution()
        if not cur:
            continue
        tv = total_variation(ref, cur)
        meas[f"tv.{p.condition_name}"] = tv
        if tv > worst:
            worst, worst_cond = tv, p.condition_name
    if worst < 0:
        return None
    score = _clamp01(1.0 - worst / (2 * tv_max))
    passed = worst <= tv_max
    meas.update({"worst_total_variation": worst, "tv_max": tv_max})
    findings = [] if passed else [f"predicted labels shift {worst:.1%} under {worst_cond}"]
    return _result("prediction_drift", CheckCategory.MODEL_PERFORMANCE, score, passed, 0.5, findings, meas)


# --- resources -----------------------------------------------------------------


def p95_nearest_rank(samples: Sequence[float]) -> float:
    ordered = sorted(samples)
    return ordered[max(0, math.ceil(0.95 * len(ordered)) - 1)]


def check_resource_utilization(r: ResourceSamples, limits: Mapping[str, float] | None = None) -> CheckResult:
    limits = dict(EngineConfig().resource_limits if limits is None else limits)
    if not r.latency_ms:
        raise EmptySamples("no latency samples")
    p95 = p95_nearest_rank(r.latency_ms)
    lat_lim, mem_lim = limits["latency_p95_ms"], limits["memory_mb"]
    terms, findings = [], []
    for actual, limit, what in ((p95, lat_lim, "p95 latency"), (r.peak_memory_mb, mem_lim, "peak memory")):
        if actual <= limit:
            terms.append(1.0)
        else:
            terms.append(min(limit / actual, _BELOW_ONE))
            findings.append(f"{what} {actual:g} exceeds limit {limit:g}")
    passed = p95 <= lat_lim and r.peak_memory_mb <= mem_lim
    meas = {"latency_p95_ms": p95, "peak_memory_mb": r.peak_memory_mb,
            "limit.latency_p95_ms": lat_lim, "limit.memory_mb": mem_lim}
    return _result("resource_utilization", CheckCategory.RESOURCE, sum(terms) / 2, passed, 1.0, findings, meas)


# --- suite ---------------------------------------------------------------------


def _integrity_tasks(b: EvidenceBundle, cfg: EngineConfig) -> list[Callable[[], list[CheckResult]]]:
    tasks = []
    for split in (Split.TRAIN, Split.TEST):
        d = b.dataset(split)
        if d is not None and d.sample_count > 0:
            tasks.append(lambda d=d: check_dataset_integrity(d, cfg))
    return tasks


def _train_test_tasks(b: EvidenceBundle, cfg: EngineConfig) -> list[Callable[[], list[CheckResult]]]:
    train, test = b.dataset(Split.TRAIN), b.dataset(Split.TEST)
    shared = {f.name for f in train.feature_summaries} & {f.name for f in test.feature_summaries}
    if shared:
        return [lambda: check_train_test_drift(train, test, cfg)]
    return [lambda: [r for r in (_label_drift(train, test, cfg),) if r is not None]]


def _performance_tasks(b: EvidenceBundle, level: ValidationLevel, cfg: EngineConfig):
    base = b.baseline
    iou_thr = cfg.iou_threshold

    def performance():
        return [check_model_performance(base, cfg.performance_thresholds, iou_thr)]

    tasks = [performance]
    perturbed = b.perturbed
    if level.rank >= 2 and perturbed:
        def drift():
            r = check_prediction_drift(base, perturbed, cfg.tv_max)
            return [r] if r is not None else []
        tasks.append(drift)
    with_gt = [p for p in perturbed if p.ground_truth is not None]
    if level.rank >= 3 and with_gt:
        def robustness():
            bm = evaluate_performance(base, iou_thr)
            runs = [(p.condition_name, evaluate_performance(p, iou_thr)) for p in with_gt]
            try:
                return [check_robustness(bm, runs, cfg.robustness_tolerance)]
            except ZeroBaseline as exc:
                return [_result("robustness", CheckCategory.MODEL_PERFORMANCE, 0.0, False, 0.5, [str(exc)])]
        tasks.append(robustness)
    return tasks


def _coverage_for_suite(b: EvidenceBundle, level: ValidationLevel) -> list[CoverageItem]:
    """Coverage, tightened with what the suite itself can actually run."""
    items = []
    for item in validate_evidence_coverage(b, level):
        if item.assessable and item.category is CheckCategory.DATA_INTEGRITY:
            if not any(d is not None and d.sample_count > 0 for d in (b.dataset(Split.TRAIN), b.dataset(Split.TEST))):
                item = CoverageItem(item.category, False, "dataset summaries have no samples")
        if item.assessable and item.category is CheckCategory.TRAIN_TEST:
            train, test = b.dataset(Split.TRAIN), b.dataset(Split.TEST)
            shared = {f.name for f in train.feature_summaries} & {f.name for f in test.feature_summaries}
            labels = sum(train.class_counts.values()) and sum(test.class_counts.values())
            if not shared and not labels:
                item = CoverageItem(item.category, False, "no shared features or label counts")
        items.append(item)
    return items


def run_check_suite(
    b: EvidenceBundle,
    c: Classification,
    profile: WeightProfile,
    cfg: EngineConfig | None = None,
) -> CheckSuiteReport:
    """Run every check the evidence and validation level allow.

    Categories without evidence are left out and the remaining category
    weights are renormalized.  Checks may run on a thread pool
    (``cfg.parallelism``); results are always assembled in fixed order.
    """
    cfg = cfg or EngineConfig()
    level = required_validation_level(c)
    coverage = _coverage_for_suite(b, level)
    assessable = {item.category: item for item in coverage}

    plan: list[tuple[CheckCategory, list[Callable[[], list[CheckResult]]]]] = []
    for cat in CATEGORY_ORDER:
        if not assessable[cat].assessable:
            plan.append((cat, []))
        elif cat is CheckCategory.DATA_INTEGRITY:
            plan.append((cat, _integrity_tasks(b, cfg)))
        elif cat is CheckCategory.TRAIN_TEST:
            plan.append((cat, _train_test_tasks(b, cfg)))
        elif cat is CheckCategory.MODEL_PERFORMANCE:
            plan.append((cat, _performance_tasks(b, level, cfg)))
        else:
            plan.append((cat, [lambda: [check_resource_utilization(b.resources, cfg.resource_limits)]]))

    flat = [t for _, tasks in plan for t in tasks]
    if cfg.parallelism > 1 and len(flat) > 1:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            outputs = list(pool.map(lambda t: t(), flat))
    else:
        outputs = [t() for t in flat]

    category_scores, pos = [], 0
    for cat, tasks in plan:
        results = [r for out in outputs[pos:pos + len(tasks)] for r in out]
        pos += len(tasks)
        if results:
            score = sum(r.score for r in results) / len(results)
            category_scores.append(CategoryScore(cat, True, score, results, assessable[cat].reason))
        else:
            category_scores.append(CategoryScore(cat, False, None, [], assessable[cat].reason))

    assessed = [cs for cs in category_scores if cs.assessed]
    if not assessed:
        raise NothingAssessable("no check category has the evidence it needs")
    total_w = math.fsum(profile.category_weights[cs.category] for cs in assessed)
    if total_w <= 0:
        raise NothingAssessable("assessed categories all carry zero weight")
    eff = {cs.category: profile.category_weights[cs.category] / total_w for cs in assessed}
    suite = 100.0 * math.fsum(eff[cs.category] * cs.score for cs in assessed)
    executed = [r for cs in assessed for r in cs.check_results]
    return CheckSuiteReport(
        classification=c.key,
        validation_level=level,
        category_scores=category_scores,
        effective_weights=eff,
        suite_score=min(100.0, max(0.0, suite)),
        auto_pass_fraction=sum(r.passed for r in executed) / len(executed),
        coverage=coverage,
    )
