"""Frame-level intensity in dB.

Squared samples are averaged under a Gaussian window centered on each
analysis frame, and the mean energy is expressed in decibels against the
2e-5 auditory reference pressure (samples are read as pascals). Absolute
calibration of a digital recording is arbitrary, but this anchor puts a
full-scale sine at 90.97 dB and keeps dB differences exact.

Frame centers are shared with the pitch track so the two tracks always
pair up one-to-one. The Gaussian has effective length 3.2 floor periods,
is truncated at half a window either side (sigma = length/6), and is
renormalized over whatever support remains inside the clip at the edges.
"""

import math
from dataclasses import dataclass

import numpy as np

from .audio import DEFAULT_HOP_S, AudioClip, frame_signal
from .errors import ClipTooShort
from .pitch import DEFAULT_FLOOR_HZ, pitch_frame_spec

DB_REFERENCE = 2e-5  # Pa
DB_FLOOR = -300.0  # clamp instead of -inf on silent frames

_WINDOW_FLOOR_PERIODS = 3.2


@dataclass(frozen=True)
class IntensityFrame:
    time_s: float
    intensity_db: float


@dataclass(frozen=True)
class IntensityTrack:
    frames: list[IntensityFrame]
    floor_db: float = DB_FLOOR

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def values_db(self) -> np.ndarray:
        return np.array([f.intensity_db for f in self.frames])


def extract_intensity(
    clip: AudioClip,
    floor_hz: float = DEFAULT_FLOOR_HZ,
    hop_s: float = DEFAULT_HOP_S,
) -> IntensityTrack:
    """Measure intensity at every analysis frame center.

    Raises ClipTooShort when the clip cannot hold one Gaussian window.
    """
    sr = clip.sample_rate
    window_s = _WINDOW_FLOOR_PERIODS / floor_hz
    if clip.duration_s < window_s:
        raise ClipTooShort(
            f"clip of {clip.duration_s:.4f}s shorter than one "
            f"{window_s:.4f}s intensity window"
        )

    half = window_s / 2.0
    sigma = window_s / 6.0
    squared = clip.samples**2
    n = len(squared)

    out = []
    for frame in frame_signal(clip, pitch_frame_spec(floor_hz, hop_s)):
        center_n = frame.center_s * sr
        lo = max(0, math.ceil(center_n - half * sr))
        hi = min(n - 1, math.floor(center_n + half * sr))
        tau = (np.arange(lo, hi + 1) - center_n) / sr
        weights = np.exp(-0.5 * (tau / sigma) ** 2)
        energy = float(np.dot(weights, squared[lo : hi + 1]) / np.sum(weights))
        if energy <= 0.0:
            db = DB_FLOOR
        else:
            db = max(10.0 * math.log10(energy / DB_REFERENCE**2), DB_FLOOR)
        out.append(IntensityFrame(time_s=frame.center_s, intensity_db=db))
    return IntensityTrack(frames=out)
