import json
import os
import shutil
import subprocess
import sys
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from conftest import FIXED_CLOCK, FIXTURES, ROOT
from mlcert.cli import EXIT_INPUT, EXIT_NOT_CERTIFIED, EXIT_OK, EXIT_TRIGGERED, main

SCHEMAS = ROOT / "docs" / "schemas"
_docs = {p.name: json.loads(p.read_text()) for p in SCHEMAS.glob("*.schema.json")}
_registry = Registry().with_resources((name, Resource.from_contents(doc)) for name, doc in _docs.items())


def validate(doc, schema):
    Draft202012Validator(_docs[schema], registry=_registry).validate(doc)


def run(capsysbinary, *argv):
    code = main([str(a) for a in argv])
    out, err = capsysbinary.readouterr()
    return code, out, err


def error_line(err):
    lines = err.decode().splitlines()
    assert len(lines) == 1
    doc = json.loads(lines[0])
    validate(doc, "error.schema.json")
    return doc


def test_schemas_are_valid():
    for doc in _docs.values():
        Draft202012Validator.check_schema(doc)


def test_classify(capsysbinary):
    code, out, _ = run(capsysbinary, "classify", "D/2A/3")
    doc = json.loads(out)
    validate(doc, "classify.schema.json")
    assert code == EXIT_OK and doc["validation_level"] == "V3"


def test_classify_bad_triple(capsysbinary):
    code, out, err = run(capsysbinary, "classify", "F/2A/3")
    assert code == EXIT_INPUT and out == b""
    assert error_line(err)["exit_code"] == 3


def test_usage_error_exits_3(capsysbinary):
    code, _, err = run(capsysbinary, "certify")
    assert code == EXIT_INPUT and error_line(err)["error"] == "UsageError"
    code, _, err = run(capsysbinary, "frobnicate")
    assert code == EXIT_INPUT


def test_check_output(capsysbinary, tmp_path):
    out_file = tmp_path / "report.json"
    code, out, _ = run(capsysbinary, "check", FIXTURES / "airsight_bundle.json", "--out", out_file)
    assert code == EXIT_OK and out == b""
    doc = json.loads(out_file.read_bytes())
    validate(doc, "check_report.schema.json")
    assert doc["auto_pass_fraction"] == 1.0


def test_certify_json_schema(capsysbinary):
    code, out, _ = run(capsysbinary, "certify", FIXTURES / "airsight_bundle.json", "--format", "json",
                       "--fixed-clock", FIXED_CLOCK)
    doc = json.loads(out)
    validate(doc, "assurance_profile.schema.json")
    assert code == EXIT_OK
    assert doc["final"]["verdict"]["verdict"] == "CertifiedHigh"
    assert doc["generated_at"] == FIXED_CLOCK


def test_certify_both_to_dir(capsysbinary, tmp_path):
    code, out, _ = run(capsysbinary, "certify", FIXTURES / "worked_example_bundle.json", "--format", "both",
                       "--out", tmp_path, "--fixed-clock", FIXED_CLOCK)
    assert code == EXIT_OK and out == b""
    assert sorted(p.name for p in tmp_path.iterdir()) == ["assurance_profile.json", "assurance_profile.md"]
    golden = (ROOT / "tests" / "golden" / "worked_example_profile.md").read_bytes()
    assert (tmp_path / "assurance_profile.md").read_bytes() == golden


def test_not_certified_exit(capsysbinary, tmp_path):
    doc = json.loads((FIXTURES / "worked_example_bundle.json").read_text())
    for r in doc["manual_reviews"]:
        r["score"] = 40.0
    doc.pop("checksum", None)
    path = tmp_path / "low.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsysbinary, "certify", path, "--fixed-clock", FIXED_CLOCK)
    assert code == EXIT_NOT_CERTIFIED
    assert b"Not Certified" in out


def test_malformed_bundle(capsysbinary):
    code, out, err = run(capsysbinary, "certify", FIXTURES / "malformed_bundle.json")
    doc = error_line(err)
    assert code == EXIT_INPUT and out == b""
    assert doc["error"] == "SchemaViolation"


def test_bad_fixed_clock(capsysbinary):
    code, _, err = run(capsysbinary, "certify", FIXTURES / "worked_example_bundle.json", "--fixed-clock", "yesterday")
    assert code == EXIT_INPUT and error_line(err)


def test_fixed_clock_env(capsysbinary, monkeypatch):
    a = run(capsysbinary, "certify", FIXTURES / "worked_example_bundle.json", "--fixed-clock", FIXED_CLOCK)[1]
    monkeypatch.setenv("MLCERT_FIXED_CLOCK", FIXED_CLOCK)
    b = run(capsysbinary, "certify", FIXTURES / "worked_example_bundle.json")[1]
    assert a == b


def test_monitor_exit_codes(capsysbinary):
    base = FIXTURES / "baseline_profile.json"
    code, out, _ = run(capsysbinary, "monitor", base, FIXTURES / "windows" / "healthy.json")
    validate(json.loads(out), "trigger_reports.schema.json")
    assert code == EXIT_OK
    code, out, _ = run(capsysbinary, "monitor", base, FIXTURES / "windows" / "drifted.json")
    doc = json.loads(out)
    validate(doc, "trigger_reports.schema.json")
    assert code == EXIT_TRIGGERED and doc[0]["fired"][0]["kind"] == "DatasetShift"


def test_monitor_stream_and_config(capsysbinary, tmp_path):
    base = FIXTURES / "baseline_profile.json"
    code, out, _ = run(capsysbinary, "monitor", base, FIXTURES / "windows" / "stream.ndjson")
    assert code == EXIT_TRIGGERED
    assert [r["recertification_required"] for r in json.loads(out)] == [False, True, False]
    cfg = tmp_path / "triggers.json"
    cfg.write_text(json.dumps({"drift_threshold": 0.5}))
    code, _, _ = run(capsysbinary, "monitor", base, FIXTURES / "windows" / "stream.ndjson", "--config", cfg)
    assert code == EXIT_OK


def test_cm_flow(capsysbinary, tmp_path):
    d = tmp_path / "led"
    code, out, _ = run(capsysbinary, "cm", "init", FIXTURES / "airsight_manifest.json", "--dir", d)
    assert code == EXIT_OK and json.loads(out)["records"] == 0

    dist = tmp_path / "dist.json"
    dist.write_text(json.dumps({"aircraft": 0.83, "bird": 0.02, "drone": 0.15}))
    code, out, _ = run(capsysbinary, "cm", "change", "--dir", d, "--artifact", "train-set", "--hash", "ab" * 32,
                       "--label-distribution", dist, "--rationale", "new capture", "--fixed-clock", FIXED_CLOCK)
    rec = json.loads(out)
    validate(rec, "change_record.schema.json")
    assert code == EXIT_OK and rec["significance"] == "major" and rec["recertification_flag"]

    code, out, _ = run(capsysbinary, "cm", "audit", "--dir", d)
    report = json.loads(out)
    validate(report, "audit_report.schema.json")
    assert code == EXIT_OK and report["outstanding_recertifications"] == 1

    code, out, _ = run(capsysbinary, "cm", "recertify", "--dir", d, "--artifact", "train-set",
                       "--fixed-clock", FIXED_CLOCK)
    validate(json.loads(out), "change_record.schema.json")
    code, out, _ = run(capsysbinary, "cm", "audit", "--dir", d)
    assert json.loads(out)["outstanding_recertifications"] == 0

    code, _, err = run(capsysbinary, "cm", "change", "--dir", d, "--artifact", "ghost", "--hash", "cd" * 32)
    assert code == EXIT_INPUT and error_line(err)["error"] == "UnknownArtifact"
    code, _, err = run(capsysbinary, "cm", "change", "--dir", d, "--artifact", "train-set", "--descriptor", "oops")
    assert code == EXIT_INPUT


def test_cm_audit_tampered(capsysbinary, tmp_path):
    d = tmp_path / "led"
    shutil.copytree(FIXTURES / "ledger", d)
    path = d / "ledger.ndjson"
    raw = bytearray(path.read_bytes())
    raw[raw.index(b"retrain 20") + 9] = ord("1")
    path.write_bytes(bytes(raw))
    code, out, _ = run(capsysbinary, "cm", "audit", "--dir", d)
    doc = json.loads(out)
    validate(doc, "audit_report.schema.json")
    assert code == EXIT_NOT_CERTIFIED and not doc["chain_valid"] and doc["corruption_index"] is not None


def test_module_entry_point(tmp_path):
    env = {k: v for k, v in os.environ.items() if not k.startswith("MLCERT_")}
    p = subprocess.run([sys.executable, "-m", "mlcert", "classify", "C/1B/1"], capture_output=True, env=env)
    assert p.returncode == 0 and json.loads(p.stdout)["validation_level"] == "V1"
    p = subprocess.run([sys.executable, "-m", "mlcert", "--version"], capture_output=True, env=env)
    assert p.returncode == 0 and p.stdout.startswith(b"mlcert ")
