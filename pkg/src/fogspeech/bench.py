"""Workload measurement: wall runtime, CPU utilization, peak memory.

Runs a callable N times after one warm-up and reports the median wall
time (robust to scheduler noise on small boards), average CPU as
process-CPU-time over wall time, and the growth of the process's peak
resident set. The latency budget verdict is median-vs-budget, nothing
fancier. Workloads must run one at a time or the CPU figure stops
meaning anything.
"""

from __future__ import annotations

import csv
import io
import json
import os
import statistics
import time
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import WorkloadFailed

try:
    import resource
except ImportError:  # non-POSIX
    resource = None

DEFAULT_ITERATIONS = 30
DEFAULT_WARMUP = 1
DEFAULT_BUDGET_MS = 200.0

_METRICS = ("runtime_ms", "avg_cpu_pct", "peak_mem_bytes")


class MemoryProbe:
    """Reads the process's peak resident set in bytes."""

    def read(self) -> int:
        raise NotImplementedError


class RusagePeakProbe(MemoryProbe):
    """ru_maxrss high-water mark (kilobytes on Linux)."""

    def read(self) -> int:
        return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


class PsutilPeakProbe(MemoryProbe):
    """Fallback: current RSS via psutil; an approximation of the peak."""

    def __init__(self):
        import psutil

        self._process = psutil.Process(os.getpid())

    def read(self) -> int:
        return self._process.memory_info().rss


def default_probe() -> MemoryProbe:
    return RusagePeakProbe() if resource is not None else PsutilPeakProbe()


@dataclass(frozen=True)
class BenchReport:
    workload_name: str
    runtime_ms: float  # median over iterations
    avg_cpu_pct: float  # process CPU time / wall time * 100
    avg_cpu_per_core_pct: float
    peak_mem_bytes: int  # peak-RSS growth across the measured loop
    iterations: int
    latency_budget_ms: float
    passed_latency_budget: bool

    def to_record(self) -> dict:
        return {
            "workload_name": self.workload_name,
            "runtime_ms": self.runtime_ms,
            "avg_cpu_pct": self.avg_cpu_pct,
            "avg_cpu_per_core_pct": self.avg_cpu_per_core_pct,
            "peak_mem_bytes": self.peak_mem_bytes,
            "iterations": self.iterations,
            "latency_budget_ms": self.latency_budget_ms,
            "passed_latency_budget": self.passed_latency_budget,
        }


def measure(
    workload: Callable[[], object],
    name: str | None = None,
    iterations: int = DEFAULT_ITERATIONS,
    latency_budget_ms: float = DEFAULT_BUDGET_MS,
    warmup: int = DEFAULT_WARMUP,
    probe: MemoryProbe | None = None,
) -> BenchReport:
    """Time a workload and judge it against a latency budget.

    Raises WorkloadFailed if any run (warm-up included) raises.
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    name = name or getattr(workload, "__name__", "workload")
    probe = probe or default_probe()

    def run_once() -> float:
        t0 = time.perf_counter()
        try:
            workload()
        except Exception as exc:
            raise WorkloadFailed(f"workload {name!r} raised: {exc!r}") from exc
        return time.perf_counter() - t0

    for _ in range(warmup):
        run_once()

    mem_before = probe.read()
    cpu_before = time.process_time()
    wall_before = time.perf_counter()
    wall_times = [run_once() for _ in range(iterations)]
    wall_total = time.perf_counter() - wall_before
    cpu_total = time.process_time() - cpu_before
    mem_after = probe.read()

    runtime_ms = statistics.median(wall_times) * 1000.0
    avg_cpu_pct = 100.0 * cpu_total / wall_total if wall_total > 0 else 0.0
    return BenchReport(
        workload_name=name,
        runtime_ms=runtime_ms,
        avg_cpu_pct=avg_cpu_pct,
        avg_cpu_per_core_pct=avg_cpu_pct / (os.cpu_count() or 1),
        peak_mem_bytes=max(mem_after - mem_before, 0),
        iterations=iterations,
        latency_budget_ms=latency_budget_ms,
        passed_latency_budget=runtime_ms <= latency_budget_ms,
    )


@dataclass(frozen=True)
class Comparison:
    """Per-metric rows for a set of reports, with ratios vs the first."""

    reports: tuple[BenchReport, ...]

    def rows(self) -> list[dict]:
        base = self.reports[0]
        out = []
        for report in self.reports:
            for metric in _METRICS:
                value = float(getattr(report, metric))
                ref = float(getattr(base, metric))
                out.append(
                    {
                        "workload": report.workload_name,
                        "metric": metric,
                        "value": value,
                        "ratio_vs_first": value / ref if ref else float("nan"),
                    }
                )
        return out

    def to_json(self) -> str:
        return json.dumps(self.rows(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(
            buf, fieldnames=["workload", "metric", "value", "ratio_vs_first"]
        )
        writer.writeheader()
        writer.writerows(self.rows())
        return buf.getvalue()

    def to_text(self) -> str:
        header = f"{'workload':<24}{'metric':<18}{'value':>16}{'vs first':>10}"
        lines = [header, "-" * len(header)]
        for row in self.rows():
            lines.append(
                f"{row['workload']:<24}{row['metric']:<18}"
                f"{row['value']:>16.3f}{row['ratio_vs_first']:>10.3f}"
            )
        return "\n".join(lines)


def compare(reports: Sequence[BenchReport]) -> Comparison:
    """Line up >= 2 reports metric by metric against the first one."""
    if len(reports) < 2:
        raise ValueError(f"need at least 2 reports to compare, got {len(reports)}")
    return Comparison(reports=tuple(reports))


def pipeline_workload(wav_bytes: bytes) -> Callable[[], None]:
    """The full per-recording fog path as a benchable unit."""
    from .features import summarize
    from .gate import PatientBaseline, decide, observe
    from .intensity import extract_intensity
    from .pitch import extract_pitch
    from .audio import decode_wav

    def pipeline() -> None:
        clip = decode_wav(wav_bytes)
        pitch = extract_pitch(clip)
        intensity = extract_intensity(clip)
        vector = summarize(pitch, intensity, "bench")
        baseline = PatientBaseline("bench")
        decide(baseline, vector)
        observe(baseline, vector)

    return pipeline
