"""Append-only JSONL persistence for session records.

One file per patient under {data_dir}/patients/. Records are never
rewritten in place: an upload acknowledgement appends a fresh copy with
uploaded=true, and readers keep the last version of each recording_id
(in first-seen order). A torn final line from a crash mid-append is
discarded on read; anything corrupt earlier in the file is a real error
and raises.

Cluster snapshots go to {data_dir}/models/ as whole JSON documents,
written atomically via rename.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path
from urllib.parse import quote, unquote

from ..errors import UnknownPatient
from ..features import FeatureVector
from ..gate import GateDecision, Verdict


@dataclass(frozen=True)
class SessionRecord:
    patient_id: str
    recording_id: str
    received_at: str  # ISO-8601 UTC
    feature_vector: FeatureVector
    gate: GateDecision
    uploaded: bool

    @property
    def pending_retry(self) -> bool:
        """An UPLOAD verdict the cloud has not acknowledged yet."""
        return self.gate.verdict is Verdict.UPLOAD and not self.uploaded

    def to_record(self) -> dict:
        return {
            "patient_id": self.patient_id,
            "recording_id": self.recording_id,
            "received_at": self.received_at,
            "feature_vector": self.feature_vector.to_record(),
            "gate": self.gate.to_record(),
            "uploaded": self.uploaded,
        }

    @classmethod
    def from_record(cls, record: dict) -> "SessionRecord":
        return cls(
            patient_id=record["patient_id"],
            recording_id=record["recording_id"],
            received_at=record["received_at"],
            feature_vector=FeatureVector.from_record(record["feature_vector"]),
            gate=GateDecision.from_record(record["gate"]),
            uploaded=bool(record["uploaded"]),
        )

    def as_uploaded(self) -> "SessionRecord":
        return replace(self, uploaded=True)


def _fs_name(identifier: str) -> str:
    """Percent-encode an id into a safe flat filename."""
    name = quote(identifier, safe="")
    # '.' survives quoting; keep '.'/'..' from escaping the directory
    return name.replace(".", "%2E") if name in (".", "..") else name


class SessionStore:
    def __init__(self, data_dir: Path | str):
        self.root = Path(data_dir)
        self.patients_dir = self.root / "patients"
        self.models_dir = self.root / "models"
        self.patients_dir.mkdir(parents=True, exist_ok=True)
        self.models_dir.mkdir(parents=True, exist_ok=True)

    def _patient_file(self, patient_id: str) -> Path:
        return self.patients_dir / f"{_fs_name(patient_id)}.jsonl"

    def append(self, record: SessionRecord) -> None:
        line = json.dumps(record.to_record(), separators=(",", ":"))
        with open(self._patient_file(record.patient_id), "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def mark_uploaded(self, record: SessionRecord) -> SessionRecord:
        updated = record.as_uploaded()
        self.append(updated)
        return updated

    def has_patient(self, patient_id: str) -> bool:
        return self._patient_file(patient_id).exists()

    def load_sessions(self, patient_id: str) -> list[SessionRecord]:
        """All sessions for one patient, chronological, latest version each."""
        path = self._patient_file(patient_id)
        if not path.exists():
            raise UnknownPatient(f"no sessions stored for patient {patient_id!r}")
        lines = path.read_text(encoding="utf-8").splitlines()
        by_id: dict[str, SessionRecord] = {}
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                record = SessionRecord.from_record(json.loads(line))
            except (json.JSONDecodeError, KeyError, ValueError):
                if i == len(lines) - 1:
                    break  # torn tail from a crash mid-append
                raise ValueError(f"{path} corrupt at line {i + 1}")
            # last version wins but keeps its original position
            by_id[record.recording_id] = record
        return list(by_id.values())

    def list_patients(self) -> list[str]:
        return sorted(
            unquote(p.stem) for p in self.patients_dir.glob("*.jsonl")
        )

    def pending_uploads(self) -> list[SessionRecord]:
        """Records across all patients still awaiting a cloud ack."""
        return [
            record
            for patient_id in self.list_patients()
            for record in self.load_sessions(patient_id)
            if record.pending_retry
        ]

    def save_model(self, name: str, payload: dict) -> Path:
        path = self.models_dir / f"{_fs_name(name)}.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        tmp.replace(path)
        return path
