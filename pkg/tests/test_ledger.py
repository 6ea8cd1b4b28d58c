import shutil
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES
from mlcert.errors import DuplicateArtifactId, NoChange, UnknownArtifact
from mlcert.evidence import ArtifactKind, ArtifactManifest, ManifestEntry
from mlcert.ledger import (
    LEDGER_FILE,
    Significance,
    append_record,
    audit_ledger,
    audit_ledger_dir,
    load_ledger,
    mark_recertified,
    record_change,
    register_baseline,
    save_ledger,
)
from mlcert.serde import canonical_json

H = ["%064x" % i for i in range(1, 20)]
TS = "2025-03-01T00:00:00Z"


def manifest():
    return ArtifactManifest([
        ManifestEntry("model", ArtifactKind.MODEL, H[0], {"architecture": "yolov8s"}),
        ManifestEntry("data", ArtifactKind.DATASET, H[1], {}, {"a": 0.5, "b": 0.5}),
        ManifestEntry("hmi", ArtifactKind.INTERFACE, H[2]),
        ManifestEntry("unc", ArtifactKind.UNCERTAINTY, H[3], {"confidence_threshold": "0.5"}),
    ])


def test_register_baseline():
    led = register_baseline(manifest())
    assert led.records == ()
    assert register_baseline(manifest()).head_hash == led.head_hash


def test_duplicate_ids():
    m = ArtifactManifest(manifest().entries + [manifest().entries[0]])
    with pytest.raises(DuplicateArtifactId):
        register_baseline(m)


def test_dataset_shift_major():
    led, rec = record_change(register_baseline(manifest()), "data", H[4], None, {"a": 0.85, "b": 0.15}, "", TS)
    assert rec.drift_magnitude == pytest.approx(0.35)
    assert rec.significance is Significance.MAJOR and rec.recertification_flag


def test_dataset_small_shift_minor():
    led, rec = record_change(register_baseline(manifest()), "data", H[4], None, {"a": 0.6, "b": 0.4}, "", TS)
    assert rec.drift_magnitude == pytest.approx(0.10)
    assert rec.significance is Significance.MINOR and not rec.recertification_flag


def test_model_hash_change_major():
    _, rec = record_change(register_baseline(manifest()), "model", H[5], timestamp=TS)
    assert rec.significance is Significance.MAJOR


def test_uncertainty_change_major():
    _, rec = record_change(register_baseline(manifest()), "unc", None, {"confidence_threshold": "0.6"}, timestamp=TS)
    assert rec.significance is Significance.MAJOR


def test_interface_change_minor():
    _, rec = record_change(register_baseline(manifest()), "hmi", H[6], timestamp=TS)
    assert rec.significance is Significance.MINOR


def test_no_change_and_unknown():
    led = register_baseline(manifest())
    with pytest.raises(NoChange):
        record_change(led, "model", H[0], {"architecture": "yolov8s"})
    with pytest.raises(UnknownArtifact):
        record_change(led, "ghost", H[1])


def test_audit_counts():
    led = register_baseline(manifest())
    rep = audit_ledger(led)
    assert rep.chain_valid and rep.record_count == 0 and rep.outstanding_recertifications == 0
    led, _ = record_change(led, "model", H[7], timestamp=TS)
    rep = audit_ledger(led)
    assert (rep.major_count, rep.outstanding_recertifications) == (1, 1)
    led, rec = mark_recertified(led, "model", "board", TS)
    assert "[recertified]" in rec.rationale and not rec.recertification_flag
    assert audit_ledger(led).outstanding_recertifications == 0


def test_recertifying_other_artifact_leaves_flag_open():
    led, _ = record_change(register_baseline(manifest()), "model", H[7], timestamp=TS)
    led, _ = mark_recertified(led, "hmi", "", TS)
    assert audit_ledger(led).outstanding_recertifications == 1


def test_tampered_middle_record(tmp_path):
    d = tmp_path / "ledger"
    shutil.copytree(FIXTURES / "ledger", d)
    lines = (d / LEDGER_FILE).read_bytes().split(b"\n")
    lines[25] = lines[25].replace(b"retrain", b"retrainX", 1) if b"retrain" in lines[25] else lines[25][:-2] + b"Z}"
    (d / LEDGER_FILE).write_bytes(b"\n".join(lines))
    rep = audit_ledger_dir(d)
    assert not rep.chain_valid
    assert rep.corruption_index is not None and rep.corruption_index <= 25


def test_in_memory_tamper_detected():
    led = register_baseline(manifest())
    for i in range(5):
        led, _ = record_change(led, "hmi", H[8 + i], timestamp=TS)
    recs = list(led.records)
    recs[2] = replace(recs[2], rationale="edited")
    rep = audit_ledger(replace(led, records=tuple(recs)))
    assert not rep.chain_valid and rep.corruption_index == 2


def test_fixture_ledger_verifies():
    rep = audit_ledger_dir(FIXTURES / "ledger")
    assert rep.chain_valid and rep.record_count == 50
    assert audit_ledger(load_ledger(FIXTURES / "ledger")) == rep


def test_append_only_round_trip(tmp_path):
    led = register_baseline(manifest())
    save_ledger(led, tmp_path)
    seen = []
    for i in range(4):
        led, rec = record_change(led, "hmi", H[10 + i], timestamp=TS)
        append_record(tmp_path, rec)
        seen.append(canonical_json(rec).encode("utf-8"))
        lines = (tmp_path / LEDGER_FILE).read_bytes().split(b"\n")[:-1]
        assert lines == seen
    assert load_ledger(tmp_path) == led
    assert audit_ledger_dir(tmp_path).chain_valid


@settings(max_examples=50)
@given(st.lists(st.tuples(st.sampled_from(["model", "data", "hmi", "unc"]), st.integers(0, 18)), max_size=8))
def test_significance_deterministic(ops):
    a = b = register_baseline(manifest())
    for aid, k in ops:
        try:
            a, ra = record_change(a, aid, H[k], {"rev": str(k)}, None, "", TS)
        except NoChange:
            continue
        b, rb = record_change(b, aid, H[k], {"rev": str(k)}, None, "", TS)
        assert ra == rb
    assert audit_ledger(a).chain_valid
