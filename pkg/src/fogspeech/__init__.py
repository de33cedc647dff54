"""fogspeech: speech analytics pipeline for fog-node telehealth.

Decodes wearable-captured WAV audio, extracts pitch and intensity
tracks, summarizes them per recording, clusters cohorts with k-means,
and gates per-patient cloud uploads on abnormal feature change. The
gateway subpackage runs the whole thing as an HTTP service.
"""

from .audio import AudioClip, decode_wav, encode_wav, frame_signal
from .cluster import (
    ClusterModel,
    Dataset,
    KMeans,
    assign_step,
    fit_kmeans,
    init_centroids,
    objective,
    update_step,
)
from .features import (
    FeatureScaler,
    FeatureVector,
    NormalizationParams,
    apply_normalization,
    fit_normalization,
    summarize,
)
from .gate import (
    GateDecision,
    PatientBaseline,
    Reason,
    Verdict,
    decide,
    observe,
)
from .bench import BenchReport, compare, measure, pipeline_workload
from .corpus import CorpusManifest, analyze_corpus, extract_one
from .intensity import IntensityTrack, extract_intensity
from .pitch import PitchTrack, extract_pitch
from . import errors

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "BenchReport",
    "ClusterModel",
    "CorpusManifest",
    "Dataset",
    "FeatureScaler",
    "FeatureVector",
    "GateDecision",
    "IntensityTrack",
    "KMeans",
    "NormalizationParams",
    "PatientBaseline",
    "PitchTrack",
    "Reason",
    "Verdict",
    "analyze_corpus",
    "apply_normalization",
    "assign_step",
    "compare",
    "decide",
    "decode_wav",
    "encode_wav",
    "errors",
    "extract_intensity",
    "extract_one",
    "extract_pitch",
    "fit_kmeans",
    "fit_normalization",
    "frame_signal",
    "init_centroids",
    "measure",
    "pipeline_workload",
    "objective",
    "observe",
    "summarize",
    "update_step",
]
