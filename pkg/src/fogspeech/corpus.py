"""Batch analysis over a directory of WAV recordings.

Walks a corpus, summarizes every decodable clip, z-scores the cohort,
and clusters it for each requested k, leaving plot-ready JSON/CSV
behind. A bad file is skipped and reported, never fatal on its own;
utterance labels ride along into the CSV but are invisible to the
clustering itself.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .cluster import Dataset, fit_kmeans, model_to_record
from .errors import FogSpeechError
from .features import (
    FeatureVector,
    apply_normalization,
    fit_normalization,
    summarize,
    vectors_to_matrix,
)
from .audio import decode_wav
from .intensity import extract_intensity
from .pitch import extract_pitch

DEFAULT_K_LIST = (2, 3, 4)
DEFAULT_SEED = 42

CSV_COLUMNS = (
    "recording_id",
    "mean_f0_hz",
    "mean_intensity_db",
    "f0_norm",
    "intensity_norm",
    "cluster",
)

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_FATAL = 2


@dataclass(frozen=True)
class ManifestEntry:
    recording_id: str
    file_path: Path
    label: str | None = None


@dataclass(frozen=True)
class CorpusManifest:
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        ids = [e.recording_id for e in self.entries]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate recording ids: {dupes}")
        missing = [str(e.file_path) for e in self.entries if not e.file_path.is_file()]
        if missing:
            raise FileNotFoundError(f"missing corpus files: {missing}")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def has_labels(self) -> bool:
        return any(e.label is not None for e in self.entries)

    @classmethod
    def from_dir(cls, corpus_dir: Path | str) -> "CorpusManifest":
        """Build from a directory: manifest.json when present, else *.wav.

        manifest.json is a list of {"recording_id", "file", "label"?}
        with file paths relative to the directory.
        """
        corpus_dir = Path(corpus_dir)
        manifest_path = corpus_dir / "manifest.json"
        if manifest_path.is_file():
            raw = json.loads(manifest_path.read_text(encoding="utf-8"))
            entries = tuple(
                ManifestEntry(
                    recording_id=item["recording_id"],
                    file_path=corpus_dir / item["file"],
                    label=item.get("label"),
                )
                for item in raw
            )
        else:
            entries = tuple(
                ManifestEntry(recording_id=p.stem, file_path=p)
                for p in sorted(corpus_dir.glob("*.wav"))
            )
        return cls(entries=entries)


def extract_one(file_path: Path | str, recording_id: str | None = None) -> FeatureVector:
    """Run one WAV through decode -> pitch -> intensity -> summarize."""
    file_path = Path(file_path)
    clip = decode_wav(file_path.read_bytes())
    pitch = extract_pitch(clip)
    intensity = extract_intensity(clip)
    return summarize(pitch, intensity, recording_id or file_path.stem)


@dataclass
class AnalyzeResult:
    exit_status: int
    vectors: list[FeatureVector] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)  # (id, error)
    artifacts: list[Path] = field(default_factory=list)
    fatal_reason: str | None = None


def analyze_corpus(
    corpus_dir: Path | str,
    k_list: tuple[int, ...] = DEFAULT_K_LIST,
    seed: int = DEFAULT_SEED,
    out_dir: Path | str = "results",
) -> AnalyzeResult:
    """Featurize a corpus and cluster it for every k in k_list.

    Writes features.json plus clusters_k{K}.json / clusters_k{K}.csv
    per k. exit_status: 0 clean, 1 if any file was skipped, 2 when the
    run could not produce clusters at all.
    """
    out_dir = Path(out_dir)
    result = AnalyzeResult(exit_status=EXIT_OK)
    try:
        manifest = CorpusManifest.from_dir(corpus_dir)
    except (OSError, ValueError, json.JSONDecodeError, KeyError) as exc:
        result.exit_status = EXIT_FATAL
        result.fatal_reason = f"unreadable corpus: {exc}"
        return result

    labels: dict[str, str | None] = {}
    for entry in manifest.entries:
        try:
            vector = extract_one(entry.file_path, entry.recording_id)
        except (FogSpeechError, OSError) as exc:
            code = exc.code if isinstance(exc, FogSpeechError) else "ReadError"
            result.failures.append((entry.recording_id, f"{code}: {exc}"))
            continue
        result.vectors.append(vector)
        labels[entry.recording_id] = entry.label

    needed = max(k_list) if k_list else 2
    if len(result.vectors) < max(needed, 2):
        result.exit_status = EXIT_FATAL
        result.fatal_reason = (
            f"only {len(result.vectors)} usable recordings; need {max(needed, 2)}"
        )
        return result

    out_dir.mkdir(parents=True, exist_ok=True)
    features_path = out_dir / "features.json"
    features_path.write_text(
        json.dumps([v.to_record() for v in result.vectors], indent=2) + "\n",
        encoding="utf-8",
    )
    result.artifacts.append(features_path)

    params = fit_normalization(result.vectors)
    data = Dataset(
        points=vectors_to_matrix(result.vectors, params),
        ids=tuple(v.recording_id for v in result.vectors),
    )
    for k in k_list:
        model = fit_kmeans(data, k=k, seed=seed)
        payload = model_to_record(model, data.ids)
        payload["normalization"] = params.to_record()
        json_path = out_dir / f"clusters_k{k}.json"
        json_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        result.artifacts.append(json_path)

        csv_path = out_dir / f"clusters_k{k}.csv"
        columns = CSV_COLUMNS + (("label",) if manifest.has_labels else ())
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for vector, norm, cluster in zip(
                result.vectors, data.points, model.assignment
            ):
                row = [
                    vector.recording_id,
                    repr(vector.mean_f0_hz),
                    repr(vector.mean_intensity_db),
                    repr(float(norm[0])),
                    repr(float(norm[1])),
                    int(cluster),
                ]
                if manifest.has_labels:
                    row.append(labels.get(vector.recording_id) or "")
                writer.writerow(row)
        result.artifacts.append(csv_path)

    if result.failures:
        result.exit_status = EXIT_PARTIAL
    return result
