"""Assurance Profile assembly and rendering (canonical JSON, Markdown)."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import __version__
from .clock import now_iso
from .checks import CheckSuiteReport, run_check_suite
from .config import EngineConfig
from .core import (
    PROCESS_ORDER,
    CheckCategory,
    Classification,
    ProcessKind,
    ValidationLevel,
    WeightProfile,
    load_registry,
    parse_classification,
    required_validation_level,
    resolve_weight_profile,
)
from .errors import NothingAssessable, UnscoredActivities, WeightMismatch
from .evidence import EvidenceBundle, Split, compute_checksum
from .monitor import BaselineReference
from .scoring import (
    DEFAULT_VERDICT_THRESHOLDS,
    ActivityScore,
    FinalScore,
    ProcessScore,
    activity_score,
    final_score,
    process_score,
)
from .serde import canonical_json, digest, from_jsonable, loads

_SECTION_TITLES = {
    ProcessKind.DEV: "1. Development (Dev)",
    ProcessKind.VANDV: "2. Verification & Validation (V&V)",
    ProcessKind.QA: "3. Quality Assurance (QA)",
    ProcessKind.CM: "4. Configuration Management (CM)",
}
_TOTAL_TITLES = {
    ProcessKind.DEV: "Total Development Score",
    ProcessKind.VANDV: "Total V&V Score",
    ProcessKind.QA: "Total QA Score",
    ProcessKind.CM: "Total SCM Score",
}
_SUMMARY_TITLES = {
    ProcessKind.DEV: "Development",
    ProcessKind.VANDV: "V&V",
    ProcessKind.QA: "QA",
    ProcessKind.CM: "SCM",
}


@dataclass(frozen=True)
class AssuranceProfile:
    classification: Classification
    validation_level: ValidationLevel
    weight_profile: WeightProfile
    activity_scores: list[ActivityScore]
    process_scores: list[ProcessScore]
    final: FinalScore
    suite_report: CheckSuiteReport | None
    reference: BaselineReference
    provenance: dict[str, str]
    generated_at: str
    engine_version: str
    input_checksums: dict[str, str] = field(default_factory=dict)


def baseline_reference(b: EvidenceBundle) -> BaselineReference:
    base = b.baseline
    pred = base.label_distribution() if base is not None else {}
    labels = None
    if base is not None and base.ground_truth:
        counts: dict[str, int] = {}
        for g in base.ground_truth:
            counts[g.label] = counts.get(g.label, 0) + 1
        total = sum(counts.values())
        labels = {k: v / total for k, v in sorted(counts.items())}
    train = b.dataset(Split.TRAIN)
    if labels is None and train is not None and sum(train.class_counts.values()):
        total = sum(train.class_counts.values())
        labels = {k: v / total for k, v in sorted(train.class_counts.items())}
    tags = sorted({t for d in b.datasets for t in d.environment_tags})
    return BaselineReference(
        prediction_label_dist=pred or None,
        label_dist=labels,
        dataset_summary=train,
        uncertainty=b.uncertainty,
        environment_tags=tags,
    )


def build_assurance_profile(
    b: EvidenceBundle,
    c: Classification | None = None,
    profile: WeightProfile | None = None,
    cfg: EngineConfig | None = None,
    *,
    clock: str | None = None,
) -> AssuranceProfile:
    """Run the suite where evidence allows, score every activity and process, attach provenance."""
    cfg = cfg or EngineConfig()
    c = c or parse_classification(b.classification)
    profile = profile or resolve_weight_profile(c, load_registry())

    try:
        suite = run_check_suite(b, c, profile, cfg)
    except NothingAssessable:
        suite = None

    reviews = {(r.process, r.activity_id): r for r in b.manual_reviews}
    unknown = [f"{p.value}/{a}" for p, a in reviews if a not in profile.activity_weights[p]]
    if unknown:
        raise WeightMismatch(f"reviews name activities the weight profile does not: {unknown}")

    activities: list[ActivityScore] = []
    missing: list[str] = []
    for p in PROCESS_ORDER:
        for act in profile.activity_weights[p]:
            key = f"{p.value}/{act}"
            review = reviews.get((p, act))
            frac = None
            if suite is not None and key in cfg.auto_activities:
                frac = suite.pass_fraction([CheckCategory(x) for x in cfg.auto_activities[key]])
            if review is None and frac is None:
                missing.append(key)
                continue
            alpha = float(cfg.activity_alpha.get(key, cfg.blend_alpha))
            activities.append(activity_score(review, None, alpha, process=p, activity_id=act, auto_fraction=frac))
    if missing:
        raise UnscoredActivities(missing)

    titles = {a: profile.title(a) for acts in profile.activity_weights.values() for a in acts}
    processes = [
        process_score([a for a in activities if a.process is p], profile.activity_weights[p], titles)
        for p in PROCESS_ORDER
    ]
    thresholds = profile.verdict_thresholds or DEFAULT_VERDICT_THRESHOLDS.get(c.crit)
    final = final_score(processes, profile.process_weights, thresholds, c)

    return AssuranceProfile(
        classification=c,
        validation_level=required_validation_level(c),
        weight_profile=profile,
        activity_scores=activities,
        process_scores=processes,
        final=final,
        suite_report=suite,
        reference=baseline_reference(b),
        provenance={f"{a.process.value}/{a.activity_id}": a.provenance.value for a in activities},
        generated_at=now_iso(clock),
        engine_version=__version__,
        input_checksums={
            "bundle": b.checksum or compute_checksum(b),
            "weights": digest(profile),
            "config": digest(cfg.result_settings()),
        },
    )


# --- rendering -----------------------------------------------------------------


def _cell(text: str) -> str:
    return text.replace("|", "\\|")


def render_markdown(p: AssuranceProfile) -> str:
    c = p.classification
    lines = [
        "# Assurance Profile",
        "",
        f"- Classification: `{c.key}` (criticality {c.crit.value}, autonomy {c.autonomy.value}, "
        f"ML complexity {c.model_complexity})",
        f"- Validation level: {p.validation_level.value} ({p.validation_level.description})",
        f"- Weight profile: `{p.weight_profile.source_key}`",
        f"- Generated: {p.generated_at}",
        f"- Engine: mlcert `{p.engine_version}`",
        "",
        f"## Certification Summary (DO-178C Level {c.crit.value})",
        "",
        "| Process | Score (100) | Weight | Weighted Score |",
        "|:--|--:|--:|--:|",
    ]
    for ps in p.process_scores:
        lines.append(f"| **{_SECTION_TITLES[ps.process]}** | | | |")
        for r in ps.rows:
            lines.append(f"| {_cell(r.title)} | {r.score:.1f} | {r.weight:.2f} | {r.contribution:.1f} |")
        lines.append(f"| **{_TOTAL_TITLES[ps.process]}** | | | **{ps.total:.1f}** |")
    lines.append("| **Final Certification Summary** | | | |")
    for fr in p.final.process_rows:
        lines.append(f"| {_SUMMARY_TITLES[fr.process]} | {fr.total:.1f} | {fr.weight:.2f} | {fr.contribution:.1f} |")
    lines.append(f"| **Final Certification Score** | | | **{p.final.value:.1f}** |")

    high, moderate = p.final.verdict.thresholds_used
    lines += [
        "",
        "## Outcome",
        "",
        f"- Final certification score: {p.final.value:.1f}",
        f"- Confidence level: {p.final.band.label}",
        f"- Verdict: {p.final.verdict.verdict.label} (high above {high:.1f}, moderate from {moderate:.1f})",
        "",
        "## Score Provenance",
        "",
        "| Activity | Provenance | Manual | Automated | Blend Weight |",
        "|:--|:--|--:|--:|--:|",
    ]
    for a in p.activity_scores:
        manual = "" if a.manual_score is None else f"{a.manual_score:.1f}"
        auto = "" if a.auto_component is None else f"{a.auto_component:.1f}"
        alpha = f"{a.blend_alpha:.2f}" if a.provenance.value == "blended" else ""
        lines.append(f"| {a.process.value}/{_cell(a.activity_id)} | {a.provenance.value} | {manual} | {auto} | {alpha} |")

    if p.suite_report is not None:
        s = p.suite_report
        lines += [
            "",
            "## Automated Checks",
            "",
            f"- Suite score: {s.suite_score:.1f}",
            f"- Automated checks passed: {100 * s.auto_pass_fraction:.1f}%",
            "",
            "| Category | Weight | Score | Status |",
            "|:--|--:|--:|:--|",
        ]
        for cs in s.category_scores:
            if cs.assessed:
                w = s.effective_weights[cs.category]
                lines.append(f"| {cs.category.value} | {w:.2f} | {100 * cs.score:.1f} | assessed |")
            else:
                lines.append(f"| {cs.category.value} | | | not assessed: {_cell(cs.reason)} |")
        lines += ["", "| Check | Category | Score | Result | Findings |", "|:--|:--|--:|:--|:--|"]
        for r in s.results:
            result = "pass" if r.passed else "FAIL"
            lines.append(
                f"| {r.check_id} | {r.category.value} | {100 * r.score:.1f} | {result} | {_cell('; '.join(r.findings))} |"
            )

    lines += ["", "## Input Checksums", ""]
    for name in sorted(p.input_checksums):
        lines.append(f"- {name}: `{p.input_checksums[name]}`")
    return "\n".join(lines) + "\n"


def render_profile(p: AssuranceProfile, format: str = "markdown") -> bytes:
    if format == "json":
        return canonical_json(p).encode("utf-8")
    if format == "markdown":
        return render_markdown(p).encode("utf-8")
    raise ValueError(f"unknown format {format!r}")


def profile_from_json(data: bytes | str) -> AssuranceProfile:
    return from_jsonable(AssuranceProfile, loads(data))


def load_profile(path) -> AssuranceProfile:
    with open(path, "rb") as fh:
        return profile_from_json(fh.read())
