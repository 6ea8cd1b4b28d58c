"""Configuration management: content-addressed baseline plus a hash-chained change log.

On disk a ledger is a directory with ``baseline.json`` (the canonical manifest)
and ``ledger.ndjson`` (one canonical change record per line).  Each record
stores the hash of its predecessor (the baseline hash for the first record)
and its own hash over everything else in the record.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

from .checks import total_variation
from .clock import now_iso
from .errors import MLCertError, NoChange, ParseError, UnknownArtifact
from .evidence import ArtifactKind, ArtifactManifest, ManifestEntry, validate_manifest
from .serde import canonical_json, digest, dumps_canonical, from_jsonable, loads, sha256_hex

DATASET_SHIFT_THRESHOLD = 0.30
RECERTIFIED_TAG = "[recertified]"
BASELINE_FILE = "baseline.json"
LEDGER_FILE = "ledger.ndjson"


class Significance(str, enum.Enum):
    MAJOR = "major"
    MINOR = "minor"


@dataclass(frozen=True)
class ChangeRecord:
    ledger_seq: int
    artifact_id: str
    kind: ArtifactKind
    old_hash: str
    new_hash: str
    descriptor: dict[str, str]
    label_distribution: dict[str, float] | None
    significance: Significance
    drift_magnitude: float | None
    recertification_flag: bool
    rationale: str
    timestamp: str
    prev_hash: str
    record_hash: str = ""

    def body(self) -> dict:
        # spelled out rather than to_jsonable(): audits hash every record, often
        return {
            "ledger_seq": self.ledger_seq,
            "artifact_id": self.artifact_id,
            "kind": self.kind.value,
            "old_hash": self.old_hash,
            "new_hash": self.new_hash,
            "descriptor": dict(self.descriptor),
            "label_distribution": None if self.label_distribution is None else dict(self.label_distribution),
            "significance": self.significance.value,
            "drift_magnitude": self.drift_magnitude,
            "recertification_flag": self.recertification_flag,
            "rationale": self.rationale,
            "timestamp": self.timestamp,
            "prev_hash": self.prev_hash,
        }

    def canonical_line(self) -> bytes:
        return dumps_canonical({**self.body(), "record_hash": self.record_hash}).encode("utf-8")

    def compute_hash(self) -> str:
        return sha256_hex(dumps_canonical(self.body()))

    @property
    def recertifies(self) -> bool:
        return RECERTIFIED_TAG in self.rationale


@dataclass(frozen=True)
class Ledger:
    baseline: ArtifactManifest
    baseline_hash: str
    records: tuple[ChangeRecord, ...] = ()

    @property
    def head_hash(self) -> str:
        return self.records[-1].record_hash if self.records else self.baseline_hash

    def current(self) -> dict[str, ManifestEntry]:
        """Artifact state after applying every change record."""
        state = {e.artifact_id: e for e in self.baseline.entries}
        for r in self.records:
            if r.artifact_id in state:
                state[r.artifact_id] = replace(
                    state[r.artifact_id],
                    content_hash=r.new_hash,
                    descriptor=dict(r.descriptor),
                    label_distribution=r.label_distribution,
                )
        return state


@dataclass(frozen=True)
class AuditReport:
    chain_valid: bool
    record_count: int
    major_count: int
    outstanding_recertifications: int
    corruption_index: int | None = None
    detail: str = ""


def register_baseline(m: ArtifactManifest) -> Ledger:
    validate_manifest(m)
    return Ledger(baseline=m, baseline_hash=digest(m))


def _significance(entry: ManifestEntry, new_hash: str, descriptor, label_distribution):
    hash_changed = new_hash != entry.content_hash
    if entry.kind is ArtifactKind.MODEL:
        return (Significance.MAJOR if hash_changed else Significance.MINOR), None
    if entry.kind is ArtifactKind.UNCERTAINTY:
        return Significance.MAJOR, None
    if entry.kind is ArtifactKind.DATASET and entry.label_distribution and label_distribution:
        tv = total_variation(entry.label_distribution, label_distribution)
        return (Significance.MAJOR if tv > DATASET_SHIFT_THRESHOLD else Significance.MINOR), tv
    return Significance.MINOR, None


def record_change(
    ledger: Ledger,
    artifact_id: str,
    new_hash: str | None = None,
    descriptor: Mapping[str, str] | None = None,
    label_distribution: Mapping[str, float] | None = None,
    rationale: str = "",
    timestamp: str | None = None,
) -> tuple[Ledger, ChangeRecord]:
    """Append one artifact change and classify its significance.

    Major: a model whose hash changed, any change to an uncertainty-handling
    artifact, or a dataset whose label distribution moved by more than 30%
    (total variation).  Major changes set the recertification flag.
    """
    state = ledger.current()
    if artifact_id not in state:
        raise UnknownArtifact(f"artifact {artifact_id!r} is not in the baseline")
    entry = state[artifact_id]
    new_hash = entry.content_hash if new_hash is None else new_hash
    new_desc = dict(entry.descriptor if descriptor is None else descriptor)
    new_dist = dict(label_distribution) if label_distribution is not None else entry.label_distribution
    if new_hash == entry.content_hash and new_desc == entry.descriptor:
        raise NoChange(f"artifact {artifact_id!r}: hash and descriptor unchanged")
    probe = replace(entry, content_hash=new_hash, descriptor=new_desc, label_distribution=new_dist)
    validate_manifest(ArtifactManifest([probe]), "change")

    sig, tv = _significance(entry, new_hash, new_desc, new_dist)
    rec = ChangeRecord(
        ledger_seq=len(ledger.records) + 1,
        artifact_id=artifact_id,
        kind=entry.kind,
        old_hash=entry.content_hash,
        new_hash=new_hash,
        descriptor=new_desc,
        label_distribution=new_dist,
        significance=sig,
        drift_magnitude=tv,
        recertification_flag=sig is Significance.MAJOR,
        rationale=rationale,
        timestamp=now_iso(timestamp),
        prev_hash=ledger.head_hash,
    )
    rec = replace(rec, record_hash=rec.compute_hash())
    return replace(ledger, records=ledger.records + (rec,)), rec


def mark_recertified(ledger: Ledger, artifact_id: str, rationale: str = "", timestamp: str | None = None):
    """Record that an artifact's outstanding recertification is complete.

    Written as a descriptor update carrying the ``[recertified]`` tag.
    """
    state = ledger.current()
    if artifact_id not in state:
        raise UnknownArtifact(f"artifact {artifact_id!r} is not in the baseline")
    entry = state[artifact_id]
    desc = dict(entry.descriptor)
    desc["recertified_at_seq"] = str(len(ledger.records) + 1)
    note = f"{RECERTIFIED_TAG} {rationale}".strip()
    led, rec = record_change(ledger, artifact_id, entry.content_hash, desc, None, note, timestamp)
    # the descriptor bump alone must not re-flag the artifact
    if rec.recertification_flag:
        rec = replace(rec, significance=Significance.MINOR, recertification_flag=False, record_hash="")
        rec = replace(rec, record_hash=rec.compute_hash())
        led = replace(led, records=led.records[:-1] + (rec,))
    return led, rec


def _verify_records(baseline_hash: str, records) -> tuple[int | None, str]:
    prev, seq = baseline_hash, 0
    for i, r in enumerate(records):
        if r.prev_hash != prev:
            return i, "prev_hash does not link to the preceding record"
        if r.compute_hash() != r.record_hash:
            return i, "record hash does not match its contents"
        if r.ledger_seq <= seq:
            return i, "ledger_seq not strictly increasing"
        if r.recertification_flag and r.significance is not Significance.MAJOR:
            return i, "recertification flag on a minor change"
        prev, seq = r.record_hash, r.ledger_seq
    return None, ""


def _counts(records) -> tuple[int, int]:
    major = sum(1 for r in records if r.significance is Significance.MAJOR)
    outstanding = 0
    for i, r in enumerate(records):
        closed = any(later.recertifies and later.artifact_id == r.artifact_id for later in records[i + 1:])
        if r.recertification_flag and not closed:
            outstanding += 1
    return major, outstanding


def _report(baseline_hash: str, records) -> AuditReport:
    bad, detail = _verify_records(baseline_hash, records)
    major, outstanding = _counts(records)
    return AuditReport(bad is None, len(records), major, outstanding, bad, detail)


def audit_ledger(ledger: Ledger) -> AuditReport:
    records = list(ledger.records)
    if digest(ledger.baseline) != ledger.baseline_hash:
        return AuditReport(False, len(records), *_counts(records), corruption_index=-1,
                           detail="baseline hash does not match the manifest")
    return _report(ledger.baseline_hash, records)


# --- files ---------------------------------------------------------------------


def save_ledger(ledger: Ledger, directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / BASELINE_FILE).write_text(canonical_json(ledger.baseline) + "\n", encoding="utf-8")
    with open(d / LEDGER_FILE, "w", encoding="utf-8") as fh:
        for r in ledger.records:
            fh.write(r.canonical_line().decode("utf-8") + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def append_record(directory, record: ChangeRecord) -> None:
    """Append one record; flushed and synced before returning."""
    with open(Path(directory) / LEDGER_FILE, "a", encoding="utf-8") as fh:
        fh.write(record.canonical_line().decode("utf-8") + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def load_ledger(directory) -> Ledger:
    d = Path(directory)
    try:
        raw_base = (d / BASELINE_FILE).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {BASELINE_FILE}: {exc.strerror}", path=str(d)) from None
    manifest = from_jsonable(ArtifactManifest, loads(raw_base), f"${BASELINE_FILE}")
    records = []
    path = d / LEDGER_FILE
    if path.exists():
        for n, line in enumerate(path.read_bytes().splitlines(), start=1):
            if line.strip():
                records.append(from_jsonable(ChangeRecord, loads(line), f"${LEDGER_FILE}:{n}"))
    return Ledger(manifest, digest(manifest), tuple(records))


def audit_ledger_dir(directory) -> AuditReport:
    """Audit the files byte for byte: every line must be the canonical form of a verifying record."""
    d = Path(directory)
    try:
        raw_base = (d / BASELINE_FILE).read_bytes()
        raw_log = (d / LEDGER_FILE).read_bytes() if (d / LEDGER_FILE).exists() else b""
    except OSError as exc:
        return AuditReport(False, 0, 0, 0, -1, f"unreadable ledger files: {exc.strerror}")

    try:
        manifest = from_jsonable(ArtifactManifest, loads(raw_base))
        if canonical_json(manifest).encode("utf-8") + b"\n" != raw_base:
            raise ParseError("baseline is not in canonical form")
    except MLCertError as exc:
        return AuditReport(False, 0, 0, 0, -1, f"baseline: {exc}")

    lines = raw_log.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    records = []
    for i, line in enumerate(lines):
        try:
            rec = from_jsonable(ChangeRecord, loads(line))
            if rec.canonical_line() != line:
                raise ParseError("record is not in canonical form")
        except MLCertError as exc:
            major, outstanding = _counts(records)
            return AuditReport(False, len(lines), major, outstanding, i, f"record {i}: {exc}")
        records.append(rec)
    # the baseline file is canonical text plus a newline, so its hash is over raw_base[:-1]
    return _report(sha256_hex(raw_base[:-1]), records)
