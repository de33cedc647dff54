"""Per-recording feature summaries and z-score normalization.

Each recording collapses to two numbers: the mean fundamental frequency
over voiced frames and the mean intensity over non-clamped frames. Hz
and dB live on incommensurable scales, so both are z-scored (population
std) before any distance-based processing.

``fit_normalization``/``apply_normalization`` operate on FeatureVector
records; ``FeatureScaler`` exposes the same math as a scikit-learn
transformer for array-shaped pipelines.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import DegenerateFeatureWarning, NoVoicedFrames, TrackMismatch
from .intensity import IntensityTrack
from .pitch import PitchTrack

STD_SUBSTITUTE = 1.0  # stands in for a zero std so z-scores stay finite

_FEATURE_NAMES = ("mean_f0_hz", "mean_intensity_db")


@dataclass(frozen=True)
class FeatureVector:
    """Two-feature summary of one recording.

    mean_f0_hz is None only for recordings with no voiced frames; those
    never come out of summarize() but the gateway stores them for
    aphonic sessions.
    """

    recording_id: str
    mean_f0_hz: float | None
    mean_intensity_db: float
    voiced_ratio: float

    def to_record(self) -> dict:
        return {
            "recording_id": self.recording_id,
            "mean_f0_hz": self.mean_f0_hz,
            "mean_intensity_db": self.mean_intensity_db,
            "voiced_ratio": self.voiced_ratio,
        }

    @classmethod
    def from_record(cls, record: dict) -> "FeatureVector":
        f0 = record["mean_f0_hz"]
        return cls(
            recording_id=record["recording_id"],
            mean_f0_hz=None if f0 is None else float(f0),
            mean_intensity_db=float(record["mean_intensity_db"]),
            voiced_ratio=float(record["voiced_ratio"]),
        )


@dataclass(frozen=True)
class NormalizationParams:
    """Per-feature (f0, intensity) moments learned from a cohort."""

    mean: tuple[float, float]
    std: tuple[float, float]

    def to_record(self) -> dict:
        return {"mean": list(self.mean), "std": list(self.std)}

    @classmethod
    def from_record(cls, record: dict) -> "NormalizationParams":
        return cls(mean=tuple(record["mean"]), std=tuple(record["std"]))


def summarize(
    pitch: PitchTrack, intensity: IntensityTrack, recording_id: str
) -> FeatureVector:
    """Collapse paired tracks from one clip into a FeatureVector.

    Raises TrackMismatch when the tracks disagree on frame count and
    NoVoicedFrames when nothing is voiced (the f0 mean is undefined).
    """
    if len(pitch) != len(intensity):
        raise TrackMismatch(
            f"pitch track has {len(pitch)} frames, intensity {len(intensity)}"
        )
    voiced = pitch.voiced_f0
    total = len(pitch)
    voiced_ratio = len(voiced) / total if total else 0.0
    if voiced_ratio == 0.0:
        raise NoVoicedFrames(f"recording {recording_id!r} has no voiced frames")

    db = intensity.values_db
    audible = db[db > intensity.floor_db]
    # all-clamped with voiced frames present cannot happen from real
    # extraction; fall back to the clamp so the mean stays defined
    mean_db = float(np.mean(audible)) if audible.size else intensity.floor_db

    return FeatureVector(
        recording_id=recording_id,
        mean_f0_hz=float(np.mean(voiced)),
        mean_intensity_db=mean_db,
        voiced_ratio=voiced_ratio,
    )


def _moments(x: np.ndarray, context: str) -> tuple[np.ndarray, np.ndarray]:
    """Population mean/std per column; zero stds become STD_SUBSTITUTE."""
    mean = x.mean(axis=0)
    std = x.std(axis=0)  # ddof=0
    for j in np.flatnonzero(std == 0.0):
        name = _FEATURE_NAMES[j] if j < len(_FEATURE_NAMES) else f"feature {j}"
        warnings.warn(
            f"{name} has zero variance across {context}; using std=1",
            DegenerateFeatureWarning,
            stacklevel=3,
        )
    return mean, np.where(std == 0.0, STD_SUBSTITUTE, std)


def fit_normalization(vectors: Iterable[FeatureVector]) -> NormalizationParams:
    """Learn per-feature z-score moments from >= 2 feature vectors.

    A zero-variance feature is reported via DegenerateFeatureWarning and
    its std substituted by 1 so downstream distances stay finite.
    """
    rows = [(v.mean_f0_hz, v.mean_intensity_db) for v in vectors]
    if len(rows) < 2:
        raise ValueError(f"need at least 2 feature vectors, got {len(rows)}")
    if any(f0 is None for f0, _ in rows):
        raise ValueError("cannot normalize a vector with undefined mean_f0_hz")
    mean, std = _moments(np.asarray(rows, dtype=float), f"{len(rows)} recordings")
    return NormalizationParams(
        mean=(float(mean[0]), float(mean[1])), std=(float(std[0]), float(std[1]))
    )


def apply_normalization(
    vector: FeatureVector, params: NormalizationParams
) -> tuple[float, float]:
    """z-score one vector: ((f0 - mu1)/sigma1, (dB - mu2)/sigma2)."""
    if vector.mean_f0_hz is None:
        raise ValueError(f"recording {vector.recording_id!r} has no mean_f0_hz")
    return (
        (vector.mean_f0_hz - params.mean[0]) / params.std[0],
        (vector.mean_intensity_db - params.mean[1]) / params.std[1],
    )


class FeatureScaler(TransformerMixin, BaseEstimator):
    """Z-score transformer (population std) in scikit-learn clothing.

    Same convention as fit_normalization: a constant column warns and is
    scaled by 1 instead of 0.

    Attributes (after fit): mean_, scale_, degenerate_mask_, n_features_in_.
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        raw_std = X.std(axis=0)
        self.degenerate_mask_ = raw_std == 0.0
        mean, scale = _moments(X, f"{X.shape[0]} samples")
        self.mean_ = mean
        self.scale_ = scale
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "mean_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        return (X - self.mean_) / self.scale_

    def inverse_transform(self, X) -> np.ndarray:
        check_is_fitted(self, "mean_")
        X = check_array(X, dtype=np.float64)
        return X * self.scale_ + self.mean_


def params_from_scaler(scaler: FeatureScaler) -> NormalizationParams:
    """Bridge an array-fitted scaler back to the record-level params."""
    check_is_fitted(scaler, "mean_")
    return NormalizationParams(
        mean=(float(scaler.mean_[0]), float(scaler.mean_[1])),
        std=(float(scaler.scale_[0]), float(scaler.scale_[1])),
    )


def vectors_to_matrix(
    vectors: Sequence[FeatureVector], params: NormalizationParams
) -> np.ndarray:
    """Stack normalized vectors into an (n, 2) array, order preserved."""
    return np.asarray([apply_normalization(v, params) for v in vectors], dtype=float)
