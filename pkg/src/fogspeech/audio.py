"""WAV ingest and framing.

Accepts 16-bit integer PCM in a RIFF/WAVE container (the only format the
recording side produces), 1 or 2 channels, 8-48 kHz. Everything downstream
works on `AudioClip`: mono float samples in [-1, 1] at the native rate.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    ClipTooShort,
    EmptyAudio,
    MalformedContainer,
    UnsupportedEncoding,
    UnsupportedRate,
)

MIN_SAMPLE_RATE = 8000
MAX_SAMPLE_RATE = 48000

# canonical analysis geometry: 40 ms windows hopped every 10 ms
DEFAULT_FRAME_S = 0.040
DEFAULT_HOP_S = 0.010

_PCM_SCALE = 32768.0


@dataclass(frozen=True)
class AudioClip:
    """Decoded mono recording: samples in [-1, 1] plus the sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("AudioClip samples must be one-dimensional")
        if samples.size == 0:
            raise EmptyAudio("clip has zero samples")
        if not (MIN_SAMPLE_RATE <= self.sample_rate <= MAX_SAMPLE_RATE):
            raise UnsupportedRate(
                f"sample rate {self.sample_rate} outside "
                f"[{MIN_SAMPLE_RATE}, {MAX_SAMPLE_RATE}]"
            )
        if np.max(np.abs(samples)) > 1.0:
            raise ValueError("samples must lie in [-1.0, 1.0]")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class FrameSpec:
    """Analysis frame geometry in seconds."""

    frame_length_s: float = DEFAULT_FRAME_S
    hop_length_s: float = DEFAULT_HOP_S

    def __post_init__(self):
        if not (0.0 < self.hop_length_s <= self.frame_length_s):
            raise ValueError("need 0 < hop_length_s <= frame_length_s")


@dataclass(frozen=True)
class Frame:
    """One analysis window with its center time."""

    center_s: float
    samples: np.ndarray


def decode_wav(data: bytes) -> AudioClip:
    """Decode a RIFF/WAVE byte string into a mono AudioClip.

    Stereo input is averaged to mono before the 1/32768 scaling. Only
    canonical 16-bit PCM is accepted; anything else is rejected with
    a specific error rather than guessed at.
    """
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedContainer("missing RIFF/WAVE signature")

    fmt = None
    pcm = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body_start = pos + 8
        if body_start + chunk_size > len(data):
            raise MalformedContainer(
                f"chunk {chunk_id!r} overruns the container"
            )
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise MalformedContainer("fmt chunk too small")
            fmt = struct.unpack_from("<HHIIHH", data, body_start)
        elif chunk_id == b"data":
            pcm = data[body_start : body_start + chunk_size]
        pos = body_start + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None or pcm is None:
        raise MalformedContainer("missing fmt or data chunk")

    audio_format, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if audio_format != 1:
        raise UnsupportedEncoding(f"format tag {audio_format}, expected PCM (1)")
    if bits != 16:
        raise UnsupportedEncoding(f"{bits}-bit samples, expected 16")
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"{channels} channels, expected 1 or 2")
    if not (MIN_SAMPLE_RATE <= sample_rate <= MAX_SAMPLE_RATE):
        raise UnsupportedRate(
            f"sample rate {sample_rate} outside "
            f"[{MIN_SAMPLE_RATE}, {MAX_SAMPLE_RATE}]"
        )
    if len(pcm) % (2 * channels) != 0:
        raise MalformedContainer("data chunk not aligned to the sample size")
    if len(pcm) == 0:
        raise EmptyAudio("data chunk holds zero samples")

    raw = np.frombuffer(pcm, dtype="<i2").astype(np.float64)
    if channels == 2:
        raw = raw.reshape(-1, 2).mean(axis=1)
    return AudioClip(samples=raw / _PCM_SCALE, sample_rate=int(sample_rate))


def encode_wav(samples: np.ndarray, sample_rate: int) -> bytes:
    """Encode float samples in [-1, 1] as a 16-bit PCM WAV byte string.

    Accepts (n,) mono or (n, 2) stereo. Values are scaled by 32768 and
    clamped to the int16 range, the exact inverse of `decode_wav` for
    mono clips.
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim == 1:
        channels = 1
    elif arr.ndim == 2 and arr.shape[1] == 2:
        channels = 2
    else:
        raise ValueError("expected shape (n,) or (n, 2)")
    ints = np.clip(np.rint(arr * _PCM_SCALE), -32768, 32767).astype("<i2")
    pcm = ints.tobytes()

    byte_rate = sample_rate * channels * 2
    header = b"".join(
        [
            b"RIFF",
            struct.pack("<I", 36 + len(pcm)),
            b"WAVE",
            b"fmt ",
            struct.pack("<IHHIIHH", 16, 1, channels, sample_rate, byte_rate, channels * 2, 16),
            b"data",
            struct.pack("<I", len(pcm)),
        ]
    )
    return header + pcm


def frame_signal(clip: AudioClip, spec: FrameSpec = FrameSpec()) -> list[Frame]:
    """Slice a clip into analysis frames.

    Frame starts advance by the hop; every window lies fully inside the
    clip (no zero padding), so the count is
    ``(n_samples - frame_len) // hop + 1``.
    """
    frame_len = max(1, round(spec.frame_length_s * clip.sample_rate))
    hop = max(1, round(spec.hop_length_s * clip.sample_rate))
    n = len(clip.samples)
    if n < frame_len:
        raise ClipTooShort(
            f"clip of {clip.duration_s:.4f}s shorter than one "
            f"{spec.frame_length_s:.4f}s frame"
        )
    frames = []
    for start in range(0, n - frame_len + 1, hop):
        center_s = (start + 0.5 * frame_len) / clip.sample_rate
        frames.append(Frame(center_s=center_s, samples=clip.samples[start : start + frame_len]))
    return frames
