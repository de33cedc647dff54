"""Autocorrelation pitch tracking.

Per frame: remove the mean, taper with a Hann window, take the normalized
autocorrelation, and divide out the window's own autocorrelation. That
lag-domain correction undoes the taper's damping of long-lag correlation,
which is what makes plain short-time autocorrelation accurate enough for
clinical pitch work. The strongest corrected peak inside the candidate lag
band gives the period; parabolic interpolation refines it below one sample.

Defaults follow standard speech-analysis practice: 75-600 Hz band, voicing
threshold 0.45 on the corrected peak, frames of three floor periods (40 ms
at the default floor) hopped every 10 ms.
"""

import math
from dataclasses import dataclass

import numpy as np

from .audio import DEFAULT_HOP_S, AudioClip, FrameSpec, frame_signal
from .errors import InvalidRange

DEFAULT_FLOOR_HZ = 75.0
DEFAULT_CEILING_HZ = 600.0
VOICING_THRESHOLD = 0.45
SILENCE_RMS = 1e-4  # of full scale

# Corrected peaks of a clean periodic frame differ only by numerical noise
# across the period's multiples; treat peaks this close to the maximum as
# tied and keep the shortest lag (the fundamental).
_PEAK_TIE_REL = 1e-3

# periods of the pitch floor covered by one analysis frame
_FLOOR_PERIODS = 3.0


@dataclass(frozen=True)
class PitchFrame:
    """One pitch estimate: f0 is None for unvoiced frames."""

    time_s: float
    f0_hz: float | None
    periodicity: float

    @property
    def voiced(self) -> bool:
        return self.f0_hz is not None


@dataclass(frozen=True)
class PitchTrack:
    frames: list[PitchFrame]
    floor_hz: float
    ceiling_hz: float

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def voiced_f0(self) -> np.ndarray:
        return np.array([f.f0_hz for f in self.frames if f.voiced])


def pitch_frame_spec(floor_hz: float, hop_s: float = DEFAULT_HOP_S) -> FrameSpec:
    """Frame geometry shared by the pitch and intensity tracks."""
    return FrameSpec(frame_length_s=_FLOOR_PERIODS / floor_hz, hop_length_s=hop_s)


def _autocorr(frames: np.ndarray, max_lag: int) -> np.ndarray:
    """Linear autocorrelation of each row up to max_lag, via FFT."""
    n = frames.shape[-1]
    nfft = 1 << (2 * n - 1).bit_length()
    spec = np.fft.rfft(frames, nfft)
    ac = np.fft.irfft(spec.real**2 + spec.imag**2, nfft)
    return ac[..., : max_lag + 1]


def _refine_peak(r: np.ndarray, lag: int) -> tuple[float, float]:
    """Parabolic refinement of a local maximum: (lag, height)."""
    ym, y0, yp = r[lag - 1], r[lag], r[lag + 1]
    denom = ym - 2.0 * y0 + yp
    if denom >= 0.0:  # flat or degenerate; keep the integer lag
        return float(lag), float(y0)
    delta = 0.5 * (ym - yp) / denom
    return lag + delta, y0 - 0.25 * (ym - yp) * delta


def extract_pitch(
    clip: AudioClip,
    floor_hz: float = DEFAULT_FLOOR_HZ,
    ceiling_hz: float = DEFAULT_CEILING_HZ,
    hop_s: float = DEFAULT_HOP_S,
    voicing_threshold: float = VOICING_THRESHOLD,
    silence_rms: float = SILENCE_RMS,
) -> PitchTrack:
    """Track the fundamental frequency of a clip.

    Raises InvalidRange unless 0 < floor_hz < ceiling_hz <= sample_rate/4,
    and ClipTooShort when the clip cannot hold one analysis frame.
    """
    sr = clip.sample_rate
    if not (0.0 < floor_hz < ceiling_hz <= sr / 4.0):
        raise InvalidRange(
            f"need 0 < floor ({floor_hz}) < ceiling ({ceiling_hz}) <= rate/4 ({sr / 4})"
        )

    frames = frame_signal(clip, pitch_frame_spec(floor_hz, hop_s))
    mat = np.stack([f.samples for f in frames])
    n = mat.shape[1]

    lag_min = max(2, math.ceil(sr / ceiling_hz))
    lag_max = min(math.floor(sr / floor_hz), n - 2)
    if lag_max <= lag_min:
        raise InvalidRange("frame too short for the requested pitch floor")

    rms = np.sqrt(np.mean(mat**2, axis=1))
    window = np.hanning(n)
    tapered = (mat - mat.mean(axis=1, keepdims=True)) * window

    ac = _autocorr(tapered, lag_max + 1)
    ac_win = _autocorr(window, lag_max + 1)
    ac_win /= ac_win[0]

    out = []
    for i, frame in enumerate(frames):
        r0 = ac[i, 0]
        f0, peak = None, 0.0
        if r0 > 0.0 and rms[i] >= silence_rms:
            r = (ac[i] / r0) / ac_win
            seg = r[lag_min : lag_max + 1]
            is_peak = (seg > r[lag_min - 1 : lag_max]) & (seg >= r[lag_min + 1 : lag_max + 2])
            lags = np.nonzero(is_peak)[0] + lag_min
            if lags.size:
                refined = [_refine_peak(r, int(lag)) for lag in lags]
                best = max(h for _, h in refined)
                # shortest lag among ties, see _PEAK_TIE_REL
                lag_s, peak = next(
                    (lg, h) for lg, h in refined if h >= best - _PEAK_TIE_REL * abs(best)
                )
                peak = float(min(max(peak, 0.0), 1.0))
                if peak >= voicing_threshold:
                    f0 = float(min(max(sr / lag_s, floor_hz), ceiling_hz))
        out.append(PitchFrame(time_s=frame.center_s, f0_hz=f0, periodicity=peak))
    return PitchTrack(frames=out, floor_hz=floor_hz, ceiling_hz=ceiling_hz)
