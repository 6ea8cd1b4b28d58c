"""Command-line front end.

Exit status: 0 certified (high or moderate) / success, 2 not certified (or a
ledger that fails audit), 3 input or validation error, 4 internal error,
5 monitoring triggers fired.  Errors are one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .checks import run_check_suite
from .clock import now_iso
from .config import EngineConfig, load_config
from .core import load_registry, parse_classification, required_validation_level, resolve_weight_profile
from .errors import ConfigError, MLCertError, ParseError
from .evidence import ArtifactManifest, load_evidence_bundle
from .ledger import (
    append_record,
    audit_ledger_dir,
    load_ledger,
    mark_recertified,
    record_change,
    register_baseline,
    save_ledger,
)
from .monitor import load_windows, monitor_stream, trigger_config_from_dict
from .report import build_assurance_profile, load_profile, render_profile
from .scoring import Verdict
from .serde import canonical_json, from_jsonable, loads

EXIT_OK = 0
EXIT_NOT_CERTIFIED = 2
EXIT_INPUT = 3
EXIT_INTERNAL = 4
EXIT_TRIGGERED = 5

PROFILE_JSON = "assurance_profile.json"
PROFILE_MD = "assurance_profile.md"


def _emit(data: bytes, out: str | None = None) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()


def _json_bytes(obj) -> bytes:
    return (canonical_json(obj) + "\n").encode("utf-8")


def _read_json(path: str):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path=path) from None
    return loads(raw)


def _engine_config(args) -> EngineConfig:
    cfg = load_config(args.config)
    if getattr(args, "parallelism", None) is not None:
        cfg = cfg.with_overrides(parallelism=args.parallelism)
    return cfg


# --- subcommands ---------------------------------------------------------------


def cmd_classify(args) -> int:
    c = parse_classification(args.triple)
    level = required_validation_level(c)
    profile = resolve_weight_profile(c, load_registry(args.weights))
    _emit(_json_bytes({
        "classification": c.key,
        "validation_level": level.value,
        "validation_description": level.description,
        "weight_profile": profile.source_key,
    }))
    return EXIT_OK


def cmd_check(args) -> int:
    b = load_evidence_bundle(args.bundle)
    c = parse_classification(b.classification)
    profile = resolve_weight_profile(c, load_registry(args.weights))
    report = run_check_suite(b, c, profile, _engine_config(args))
    _emit(_json_bytes(report), args.out)
    return EXIT_OK


def cmd_certify(args) -> int:
    b = load_evidence_bundle(args.bundle)
    c = parse_classification(b.classification)
    profile = resolve_weight_profile(c, load_registry(args.weights))
    p = build_assurance_profile(b, c, profile, _engine_config(args), clock=args.fixed_clock)

    outputs = []
    if args.format in ("json", "both"):
        outputs.append((PROFILE_JSON, render_profile(p, "json") + b"\n"))
    if args.format in ("markdown", "both"):
        outputs.append((PROFILE_MD, render_profile(p, "markdown")))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, data in outputs:
            (out / name).write_bytes(data)
    else:
        for _, data in outputs:
            _emit(data)
    return EXIT_NOT_CERTIFIED if p.final.verdict.verdict is Verdict.NOT_CERTIFIED else EXIT_OK


def cmd_monitor(args) -> int:
    baseline = load_profile(args.baseline)
    cfg = trigger_config_from_dict(_read_json(args.config) if args.config else None)
    reports = monitor_stream(baseline, load_windows(args.windows), cfg)
    _emit(_json_bytes(reports), args.out)
    return EXIT_TRIGGERED if any(r.recertification_required for r in reports) else EXIT_OK


def _descriptor(pairs):
    if pairs is None:
        return None
    out = {}
    for item in pairs:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"descriptor entries must be key=value, got {item!r}")
        out[key] = value
    return out


def cmd_cm_init(args) -> int:
    manifest = from_jsonable(ArtifactManifest, _read_json(args.manifest), "$manifest")
    ledger = register_baseline(manifest)
    save_ledger(ledger, args.dir)
    _emit(_json_bytes({"baseline_hash": ledger.baseline_hash, "records": 0}))
    return EXIT_OK


def cmd_cm_change(args) -> int:
    ledger = load_ledger(args.dir)
    dist = None
    if args.label_distribution:
        dist = from_jsonable(dict[str, float], _read_json(args.label_distribution), "$label_distribution")
    _, rec = record_change(ledger, args.artifact, args.hash, _descriptor(args.descriptor), dist,
                           args.rationale, args.fixed_clock)
    append_record(args.dir, rec)
    _emit(_json_bytes(rec))
    return EXIT_OK


def cmd_cm_recertify(args) -> int:
    ledger = load_ledger(args.dir)
    _, rec = mark_recertified(ledger, args.artifact, args.rationale, args.fixed_clock)
    append_record(args.dir, rec)
    _emit(_json_bytes(rec))
    return EXIT_OK


def cmd_cm_audit(args) -> int:
    report = audit_ledger_dir(args.dir)
    _emit(_json_bytes(report))
    return EXIT_OK if report.chain_valid else EXIT_NOT_CERTIFIED


# --- parser --------------------------------------------------------------------


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors exit 3 like any other input error, not argparse's 2
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--fixed-clock", metavar="ISO8601", default=argparse.SUPPRESS,
                        help="timestamp to stamp on outputs instead of the current time")

    parser = _Parser(prog="mlcert", parents=[common],
                     description="Certification assurance scoring for ML components.")
    parser.add_argument("--version", action="version", version=f"mlcert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="resolve a classification triple")
    p.add_argument("triple", help="criticality/autonomy/complexity, e.g. D/2A/3")
    p.add_argument("--weights", help="weight registry JSON (default: shipped registry)")
    p.set_defaults(func=cmd_classify)

    for name, func, helptext in (
        ("check", cmd_check, "run the automated check suite on an evidence bundle"),
        ("certify", cmd_certify, "produce an Assurance Profile for an evidence bundle"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("bundle")
        p.add_argument("--weights", help="weight registry JSON")
        p.add_argument("--config", help="engine config JSON (default: $MLCERT_CONFIG)")
        p.add_argument("--parallelism", type=int, help="worker threads for the check suite")
        if name == "certify":
            p.add_argument("--out", help="output directory (default: stdout)")
            p.add_argument("--format", choices=("json", "markdown", "both"), default="markdown")
        else:
            p.add_argument("--out", help="output file (default: stdout)")
        p.set_defaults(func=func)

    p = sub.add_parser("monitor", parents=[common], help="evaluate operational windows for recertification")
    p.add_argument("baseline", help="Assurance Profile JSON of the certified baseline")
    p.add_argument("windows", nargs="+", help="window JSON or NDJSON files")
    p.add_argument("--config", help="trigger config JSON (min_accuracy_metrics, drift_threshold, ...)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_monitor)

    cm = sub.add_parser("cm", parents=[common], help="configuration-management ledger")
    cms = cm.add_subparsers(dest="cm_command", required=True)

    p = cms.add_parser("init", parents=[common], help="register a baseline manifest")
    p.add_argument("manifest")
    p.add_argument("--dir", required=True, help="ledger directory")
    p.set_defaults(func=cmd_cm_init)

    p = cms.add_parser("change", parents=[common], help="record an artifact change")
    p.add_argument("--dir", required=True)
    p.add_argument("--artifact", required=True)
    p.add_argument("--hash", help="new content hash")
    p.add_argument("--descriptor", nargs="*", metavar="KEY=VALUE", help="replacement descriptor")
    p.add_argument("--label-distribution", help="JSON file with the new label distribution")
    p.add_argument("--rationale", default="")
    p.set_defaults(func=cmd_cm_change)

    p = cms.add_parser("recertify", parents=[common], help="close an outstanding recertification")
    p.add_argument("--dir", required=True)
    p.add_argument("--artifact", required=True)
    p.add_argument("--rationale", default="")
    p.set_defaults(func=cmd_cm_recertify)

    p = cms.add_parser("audit", parents=[common], help="verify the ledger hash chain")
    p.add_argument("--dir", required=True)
    p.set_defaults(func=cmd_cm_audit)
    return parser


def _error(kind: str, exc: BaseException, code: int) -> int:
    doc = {"error": kind, "message": str(exc), "exit_code": code}
    for attr in ("path", "line", "invariant", "location"):
        value = getattr(exc, attr, None)
        if value is not None:
            doc[attr] = value
    sys.stderr.write(json.dumps(doc, sort_keys=True, ensure_ascii=False, default=str) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _error("UsageError", exc, EXIT_INPUT)
    if not hasattr(args, "fixed_clock"):
        args.fixed_clock = None
    try:
        if args.fixed_clock is not None:
            now_iso(args.fixed_clock)
        return args.func(args)
    except MLCertError as exc:
        return _error(type(exc).__name__, exc, EXIT_INPUT)
    except (OSError, ValueError) as exc:
        return _error(type(exc).__name__, exc, EXIT_INPUT)
    except Exception as exc:  # noqa: BLE001
        return _error(type(exc).__name__, exc, EXIT_INTERNAL)


if __name__ == "__main__":
    sys.exit(main())
