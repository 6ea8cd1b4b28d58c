import json
from dataclasses import replace

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from mlcert.core import CheckCategory, ValidationLevel
from mlcert.errors import ChecksumMismatch, DuplicateArtifactId, MLCertError, ParseError, SchemaViolation
from mlcert.evidence import (
    ArtifactKind,
    ArtifactManifest,
    ManifestEntry,
    bundle_to_dict,
    dumps_bundle,
    load_evidence_bundle,
    parse_bundle,
    seal,
    validate_evidence_coverage,
    validate_manifest,
)
from mlcert.serde import canonical_json, digest, loads


def test_full_fixture_loads(full_bundle):
    assert len(full_bundle.datasets) == 2
    assert len(full_bundle.predictions) == 4
    assert full_bundle.baseline.run_id == "airsight-baseline"
    assert len(full_bundle.perturbed) == 3


def test_box_validity_violation(fixtures_dir):
    with pytest.raises(SchemaViolation) as info:
        load_evidence_bundle(fixtures_dir / "malformed_bundle.json")
    assert info.value.invariant == "box validity"
    assert info.value.location == "predictions[0].detections[0]"


def test_checksum_mismatch(full_bundle):
    doc = bundle_to_dict(full_bundle)
    doc["resources"]["peak_memory_mb"] = 900.0
    with pytest.raises(ChecksumMismatch):
        parse_bundle(json.dumps(doc))


def test_missing_file_is_parse_error(tmp_path):
    with pytest.raises(ParseError):
        load_evidence_bundle(tmp_path / "absent.json")


def test_unknown_field_rejected(full_bundle):
    doc = bundle_to_dict(full_bundle, with_checksum=False)
    doc["surprise"] = 1
    with pytest.raises(ParseError):
        parse_bundle(json.dumps(doc))


def test_duplicate_review_rejected(worked_example_bundle):
    b = replace(worked_example_bundle, manual_reviews=worked_example_bundle.manual_reviews * 2, checksum=None)
    with pytest.raises(SchemaViolation):
        parse_bundle(dumps_bundle(b))


def test_round_trip(full_bundle):
    again = parse_bundle(dumps_bundle(full_bundle))
    assert again == full_bundle
    assert dumps_bundle(again) == dumps_bundle(full_bundle)


def test_coverage_full_v3(full_bundle):
    items = validate_evidence_coverage(full_bundle, ValidationLevel.V3)
    assert [i.category for i in items] == list(CheckCategory)
    assert all(i.assessable for i in items)


def test_coverage_without_resources(full_bundle):
    b = replace(full_bundle, resources=None)
    res = {i.category: i for i in validate_evidence_coverage(b, ValidationLevel.V3)}[CheckCategory.RESOURCE]
    assert not res.assessable
    assert res.reason == "no resource samples"


def test_coverage_v1_ignores_perturbed(full_bundle):
    perf = {i.category: i for i in validate_evidence_coverage(full_bundle, ValidationLevel.V1)}
    item = perf[CheckCategory.MODEL_PERFORMANCE]
    assert item.assessable
    assert "ignored at V1" in item.reason


def _entry(aid, h="a" * 64):
    return ManifestEntry(aid, ArtifactKind.MODEL, h)


def test_manifest_duplicate_ids():
    with pytest.raises(DuplicateArtifactId):
        validate_manifest(ArtifactManifest([_entry("m"), _entry("m")]))


@pytest.mark.parametrize("h", ["A" * 64, "a" * 63, "g" * 64])
def test_manifest_hash_format(h):
    with pytest.raises(SchemaViolation):
        validate_manifest(ArtifactManifest([_entry("m", h)]))


def test_canonical_json_is_sorted_and_compact():
    assert canonical_json({"b": 1, "a": [1.5, "é"]}) == '{"a":[1.5,"é"],"b":1}'
    assert digest({"a": 1}) == digest({"a": 1})


@pytest.mark.parametrize("raw", [b"\xff\xfe", b"{", b'{"a": NaN}', b"[Infinity]", b"[" * 100000])
def test_loads_rejects(raw):
    with pytest.raises(ParseError):
        loads(raw)


def test_seal_checksum_verifies(worked_example_bundle):
    unsealed = replace(worked_example_bundle, checksum=None)
    assert seal(unsealed).checksum == worked_example_bundle.checksum


@settings(max_examples=300, suppress_health_check=[HealthCheck.too_slow])
@given(st.binary(max_size=300))
def test_loader_total_over_bytes(raw):
    try:
        parse_bundle(raw)
    except MLCertError:
        pass


json_values = st.recursive(
    st.none() | st.booleans() | st.integers() | st.floats(allow_nan=False, allow_infinity=False) | st.text(max_size=8),
    lambda kids: st.lists(kids, max_size=4) | st.dictionaries(st.text(max_size=8), kids, max_size=4),
    max_leaves=20,
)


@settings(max_examples=300, suppress_health_check=[HealthCheck.too_slow])
@given(json_values)
def test_loader_total_over_json(doc):
    try:
        parse_bundle(json.dumps(doc))
    except MLCertError:
        pass


@settings(max_examples=200, suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
@given(st.data())
def test_loader_total_over_mutated_fixture(worked_example_bundle, data):
    doc = bundle_to_dict(worked_example_bundle, with_checksum=False)
    review = data.draw(st.integers(0, len(doc["manual_reviews"]) - 1))
    key = data.draw(st.sampled_from(sorted(doc["manual_reviews"][review])))
    doc["manual_reviews"][review][key] = data.draw(json_values)
    try:
        parse_bundle(json.dumps(doc))
    except MLCertError:
        pass
