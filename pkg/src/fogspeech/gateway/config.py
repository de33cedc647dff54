"""Gateway configuration, sourced from the environment.

FOG_DATA_DIR      where per-patient JSONL and model snapshots live
FOG_CLOUD_URL     cloud backend base URL; unset disables uploads
FOG_GATE_Z        upload-gate z-score threshold (2.0)
FOG_GATE_WINDOW   baseline ring-buffer capacity (20)
FOG_GATE_MIN      sessions required before z-gating starts (5)
FOG_LISTEN_ADDR   host:port for `fogspeech serve` (127.0.0.1:8080)
"""

import os
from dataclasses import dataclass
from pathlib import Path

from ..gate import DEFAULT_MIN_HISTORY, DEFAULT_WINDOW, DEFAULT_Z_THRESHOLD

DEFAULT_DATA_DIR = "./fog-data"
DEFAULT_LISTEN_ADDR = "127.0.0.1:8080"
DEFAULT_FLUSH_INTERVAL_S = 30.0


@dataclass(frozen=True)
class GatewayConfig:
    data_dir: Path
    cloud_url: str | None = None
    gate_z: float = DEFAULT_Z_THRESHOLD
    gate_window: int = DEFAULT_WINDOW
    gate_min: int = DEFAULT_MIN_HISTORY
    listen_addr: str = DEFAULT_LISTEN_ADDR
    # not environment-driven: cloud client behavior and retry flushing
    cloud_timeout_s: float = 5.0
    cloud_max_retries: int = 3
    cloud_backoff_base_s: float = 0.5
    flush_interval_s: float = DEFAULT_FLUSH_INTERVAL_S
    cluster_seed: int = 42

    @classmethod
    def from_env(cls, env: dict | None = None) -> "GatewayConfig":
        env = os.environ if env is None else env
        return cls(
            data_dir=Path(env.get("FOG_DATA_DIR", DEFAULT_DATA_DIR)),
            cloud_url=env.get("FOG_CLOUD_URL") or None,
            gate_z=float(env.get("FOG_GATE_Z", DEFAULT_Z_THRESHOLD)),
            gate_window=int(env.get("FOG_GATE_WINDOW", DEFAULT_WINDOW)),
            gate_min=int(env.get("FOG_GATE_MIN", DEFAULT_MIN_HISTORY)),
            listen_addr=env.get("FOG_LISTEN_ADDR", DEFAULT_LISTEN_ADDR),
        )

    @property
    def host(self) -> str:
        return self.listen_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen_addr.rsplit(":", 1)[1])
