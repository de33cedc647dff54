"""fogspeech command line: analyze / extract / serve / bench.

Exit codes across subcommands: 0 success, 1 finished with per-file
failures, 2 fatal.
"""

from __future__ import annotations

import json
import sys
import threading
import time
from pathlib import Path

import click

from . import __version__
from .bench import (
    DEFAULT_BUDGET_MS,
    DEFAULT_ITERATIONS,
    compare,
    measure,
    pipeline_workload,
)
from .corpus import DEFAULT_K_LIST, DEFAULT_SEED, analyze_corpus, extract_one
from .errors import FogSpeechError

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_FATAL = 2


def _parse_k_list(text: str) -> tuple[int, ...]:
    try:
        ks = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}")
    if not ks or any(k < 1 for k in ks):
        raise click.BadParameter(f"cluster counts must be >= 1, got {text!r}")
    return ks


@click.group()
@click.version_option(version=__version__, prog_name="fogspeech")
def main():
    """Speech analytics for the fog node: features, clustering, gating."""


@main.command()
@click.option("--dir", "corpus_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path), help="Corpus directory of WAV files (optional manifest.json).")
@click.option("--k", "k_text", default=",".join(str(k) for k in DEFAULT_K_LIST), show_default=True, help="Comma-separated cluster counts.")
@click.option("--seed", default=DEFAULT_SEED, show_default=True, type=int, help="Clustering seed (printed for reproducibility).")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False, path_type=Path), help="Output directory for features.json and cluster files.")
def analyze(corpus_dir: Path, k_text: str, seed: int, out_dir: Path):
    """Featurize a corpus and cluster it for each requested k."""
    k_list = _parse_k_list(k_text)
    result = analyze_corpus(corpus_dir, k_list=k_list, seed=seed, out_dir=out_dir)
    for recording_id, error in result.failures:
        click.echo(f"skipped {recording_id}: {error}", err=True)
    if result.exit_status == EXIT_FATAL:
        click.echo(f"fatal: {result.fatal_reason}", err=True)
        sys.exit(EXIT_FATAL)
    click.echo(
        f"analyzed {len(result.vectors)} recordings "
        f"({len(result.failures)} skipped), seed={seed}"
    )
    for path in result.artifacts:
        click.echo(f"wrote {path}")
    sys.exit(result.exit_status)


@main.command()
@click.option("--file", "wav_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path), help="WAV file to featurize.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), help="Also write the JSON here.")
def extract(wav_path: Path, out_path: Path | None):
    """Print the feature summary of one recording as JSON."""
    try:
        vector = extract_one(wav_path)
    except (FogSpeechError, OSError) as exc:
        code = exc.code if isinstance(exc, FogSpeechError) else "ReadError"
        click.echo(f"{code}: {exc}", err=True)
        sys.exit(EXIT_FATAL)
    text = json.dumps(vector.to_record(), indent=2)
    click.echo(text)
    if out_path:
        out_path.write_text(text + "\n", encoding="utf-8")


@main.command()
@click.option("--data-dir", type=click.Path(file_okay=False, path_type=Path), help="Override FOG_DATA_DIR.")
@click.option("--cloud-url", help="Override FOG_CLOUD_URL.")
@click.option("--listen", help="Override FOG_LISTEN_ADDR (host:port).")
def serve(data_dir: Path | None, cloud_url: str | None, listen: str | None):
    """Run the fog gateway HTTP service."""
    import uvicorn
    from dataclasses import replace

    from .gateway import create_app
    from .gateway.config import GatewayConfig

    config = GatewayConfig.from_env()
    if data_dir is not None:
        config = replace(config, data_dir=data_dir)
    if cloud_url is not None:
        config = replace(config, cloud_url=cloud_url)
    if listen is not None:
        config = replace(config, listen_addr=listen)

    app = create_app(config)
    service = app.state.service

    if service.cloud is not None:
        def flush_loop():
            while True:
                time.sleep(config.flush_interval_s)
                service.flush_pending()

        threading.Thread(target=flush_loop, daemon=True, name="upload-flush").start()

    click.echo(f"fogspeech gateway on {config.host}:{config.port} (data: {config.data_dir})")
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


@main.command()
@click.option("--workload", "workloads", multiple=True, default=("pipeline",), show_default=True, type=click.Choice(["pipeline", "decode", "features"]), help="What to measure (repeatable).")
@click.option("--clip", "clip_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path), help="WAV clip the workload runs on.")
@click.option("--iterations", default=DEFAULT_ITERATIONS, show_default=True, type=int)
@click.option("--budget-ms", default=DEFAULT_BUDGET_MS, show_default=True, type=float, help="Real-time latency budget.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), help="Write report JSON here.")
def bench(workloads: tuple[str, ...], clip_path: Path, iterations: int, budget_ms: float, out_path: Path | None):
    """Measure runtime / CPU / memory of pipeline workloads on a clip."""
    from .audio import decode_wav
    from .features import summarize
    from .intensity import extract_intensity
    from .pitch import extract_pitch

    wav_bytes = clip_path.read_bytes()

    def decode_only():
        decode_wav(wav_bytes)

    def features_only():
        clip = decode_wav(wav_bytes)
        summarize(extract_pitch(clip), extract_intensity(clip), "bench")

    catalog = {
        "pipeline": pipeline_workload(wav_bytes),
        "decode": decode_only,
        "features": features_only,
    }
    try:
        reports = [
            measure(
                catalog[name],
                name=name,
                iterations=iterations,
                latency_budget_ms=budget_ms,
            )
            for name in workloads
        ]
    except FogSpeechError as exc:
        click.echo(f"{exc.code}: {exc}", err=True)
        sys.exit(EXIT_FATAL)

    for report in reports:
        verdict = "PASS" if report.passed_latency_budget else "FAIL"
        click.echo(
            f"{report.workload_name}: median {report.runtime_ms:.2f} ms, "
            f"cpu {report.avg_cpu_pct:.1f}%, peak mem +{report.peak_mem_bytes} B "
            f"over {report.iterations} iterations -> {verdict} vs {budget_ms:.0f} ms"
        )
    if len(reports) >= 2:
        click.echo(compare(reports).to_text())

    if out_path:
        payload = (
            reports[0].to_record()
            if len(reports) == 1
            else [r.to_record() for r in reports]
        )
        out_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        click.echo(f"wrote {out_path}")
        if len(reports) >= 2:
            csv_path = out_path.with_suffix(".csv")
            csv_path.write_text(compare(reports).to_csv(), encoding="utf-8")
            click.echo(f"wrote {csv_path}")


if __name__ == "__main__":
    main()
