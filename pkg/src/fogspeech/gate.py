"""Per-patient upload gating on rolling feature baselines.

Each patient carries a ring buffer of their recent feature summaries.
A new recording is compared against that window as a per-feature
z-score; a large deviation in either pitch or loudness sends the
summary to the cloud, everything else stays on the fog node. Until
enough history exists the gate uploads unconditionally (cold start), so
the cloud always sees a patient's earliest sessions.

decide() is pure; observe() is the only mutation and callers must
serialize it per patient.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .features import FeatureVector

DEFAULT_Z_THRESHOLD = 2.0
DEFAULT_WINDOW = 20  # M, ring-buffer capacity
DEFAULT_MIN_HISTORY = 5  # M_min, sessions needed before z-gating kicks in
STD_FLOOR = 1e-6  # constant histories would otherwise divide by zero


class Verdict(Enum):
    LOCAL = "LOCAL"
    UPLOAD = "UPLOAD"


class Reason(Enum):
    COLD_START = "COLD_START"
    THRESHOLD_EXCEEDED = "THRESHOLD_EXCEEDED"
    WITHIN_BASELINE = "WITHIN_BASELINE"
    # not part of the z-gate proper: aphonic recordings (no voiced
    # frames) are force-uploaded for review instead of being scored
    NO_VOICED_FRAMES = "NO_VOICED_FRAMES"


_UPLOAD_REASONS = frozenset(
    {Reason.COLD_START, Reason.THRESHOLD_EXCEEDED, Reason.NO_VOICED_FRAMES}
)


@dataclass(frozen=True)
class GateDecision:
    verdict: Verdict
    f0_z: float
    intensity_z: float
    reason: Reason

    def __post_init__(self):
        if (self.verdict is Verdict.UPLOAD) != (self.reason in _UPLOAD_REASONS):
            raise ValueError(f"verdict {self.verdict} inconsistent with {self.reason}")

    def to_record(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "f0_z": self.f0_z,
            "intensity_z": self.intensity_z,
            "reason": self.reason.value,
        }

    @classmethod
    def from_record(cls, record: dict) -> "GateDecision":
        return cls(
            verdict=Verdict(record["verdict"]),
            f0_z=float(record["f0_z"]),
            intensity_z=float(record["intensity_z"]),
            reason=Reason(record["reason"]),
        )


@dataclass
class PatientBaseline:
    """Rolling window of one patient's recent feature summaries."""

    patient_id: str
    capacity: int = DEFAULT_WINDOW
    window: deque = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.window is None:
            self.window = deque(maxlen=self.capacity)
        else:
            self.window = deque(self.window, maxlen=self.capacity)

    def __len__(self) -> int:
        return len(self.window)


def decide(
    baseline: PatientBaseline,
    new: FeatureVector,
    z_threshold: float = DEFAULT_Z_THRESHOLD,
    min_history: int = DEFAULT_MIN_HISTORY,
) -> GateDecision:
    """Score one recording against the baseline without mutating it.

    Fewer than min_history sessions → UPLOAD/COLD_START. Otherwise
    UPLOAD iff either feature's |x - mean|/std strictly exceeds
    z_threshold (population std over the window, floored at 1e-6).
    """
    if z_threshold <= 0:
        raise ValueError(f"z_threshold must be > 0, got {z_threshold}")
    if new.mean_f0_hz is None:
        raise ValueError("cannot gate a vector with undefined mean_f0_hz")
    if len(baseline) < min_history:
        return GateDecision(
            verdict=Verdict.UPLOAD, f0_z=0.0, intensity_z=0.0, reason=Reason.COLD_START
        )

    history = np.array(
        [(v.mean_f0_hz, v.mean_intensity_db) for v in baseline.window], dtype=float
    )
    mean = history.mean(axis=0)
    std = np.maximum(history.std(axis=0), STD_FLOOR)
    f0_z = abs(new.mean_f0_hz - mean[0]) / std[0]
    intensity_z = abs(new.mean_intensity_db - mean[1]) / std[1]
    if max(f0_z, intensity_z) > z_threshold:
        verdict, reason = Verdict.UPLOAD, Reason.THRESHOLD_EXCEEDED
    else:
        verdict, reason = Verdict.LOCAL, Reason.WITHIN_BASELINE
    return GateDecision(
        verdict=verdict,
        f0_z=float(f0_z),
        intensity_z=float(intensity_z),
        reason=reason,
    )


def observe(baseline: PatientBaseline, new: FeatureVector) -> PatientBaseline:
    """Fold one recording into the window, evicting the oldest at capacity."""
    baseline.window.append(new)
    return baseline
