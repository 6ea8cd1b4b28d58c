"""mlcert: certification assurance scoring for ML components in airborne systems."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Classification,
    ValidationLevel,
    WeightProfile,
    load_registry,
    parse_classification,
    required_validation_level,
    resolve_weight_profile,
)
from .config import EngineConfig, load_config  # noqa: E402
from .evidence import EvidenceBundle, load_evidence_bundle, parse_bundle  # noqa: E402
from .checks import run_check_suite  # noqa: E402
from .scoring import certification_verdict, confidence_level, final_score, process_score  # noqa: E402
from .report import AssuranceProfile, build_assurance_profile, render_profile  # noqa: E402
from .monitor import evaluate_triggers, monitor_stream  # noqa: E402
from .ledger import audit_ledger, record_change, register_baseline  # noqa: E402

__all__ = [
    "__version__",
    "AssuranceProfile",
    "Classification",
    "EngineConfig",
    "EvidenceBundle",
    "ValidationLevel",
    "WeightProfile",
    "audit_ledger",
    "build_assurance_profile",
    "certification_verdict",
    "confidence_level",
    "evaluate_triggers",
    "final_score",
    "load_config",
    "load_evidence_bundle",
    "load_registry",
    "monitor_stream",
    "parse_bundle",
    "parse_classification",
    "process_score",
    "record_change",
    "register_baseline",
    "render_profile",
    "required_validation_level",
    "resolve_weight_profile",
    "run_check_suite",
]
