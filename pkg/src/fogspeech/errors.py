"""Exception taxonomy shared across the pipeline.

Class names double as the machine-readable error codes that the gateway
returns in ``{"error": code}`` bodies, so they are kept short and stable.
"""


class FogSpeechError(Exception):
    """Base class for all pipeline errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# audio ingest
class MalformedContainer(FogSpeechError):
    """Input is not a well-formed RIFF/WAVE container."""


class UnsupportedEncoding(FogSpeechError):
    """WAV payload is not 16-bit integer PCM with 1 or 2 channels."""


class UnsupportedRate(FogSpeechError):
    """Sample rate outside the accepted 8-48 kHz band."""


class EmptyAudio(FogSpeechError):
    """Container decodes to zero samples."""


class ClipTooShort(FogSpeechError):
    """Clip shorter than one analysis window."""


# feature extraction
class InvalidRange(FogSpeechError):
    """Bad pitch floor/ceiling configuration."""


class NoVoicedFrames(FogSpeechError):
    """No voiced frames found; the mean pitch is undefined."""


class TrackMismatch(FogSpeechError):
    """Pitch and intensity tracks have different frame counts."""


class DegenerateFeatureWarning(UserWarning):
    """A feature had zero variance; its scale was substituted by 1."""


# clustering
class TooManyClusters(FogSpeechError):
    """Requested more clusters than there are distinct points."""


# gateway
class NotEnoughSessions(FogSpeechError):
    """Fewer stored sessions than requested clusters."""


class UnknownPatient(FogSpeechError):
    """No sessions stored for this patient."""


class CloudUnreachable(FogSpeechError):
    """Upload failed after exhausting retries."""


# benchmarking
class WorkloadFailed(FogSpeechError):
    """A measured workload raised during an iteration."""
