"""HTTP client side of the fog-to-cloud boundary.

Uploads are feature summaries plus gate metadata — the SessionRecord
JSON, which never contains audio. Transport failures and non-2xx
responses retry with exponential backoff; when retries run out the
caller keeps the record pending and tries again on a later flush.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import httpx

from ..errors import CloudUnreachable
from .storage import SessionRecord

UPLOADS_PATH = "/v1/uploads"


@dataclass(frozen=True)
class CloudTarget:
    base_url: str
    timeout_s: float = 5.0
    max_retries: int = 3
    backoff_base_s: float = 0.5

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ValueError(f"timeout_s must be > 0, got {self.timeout_s}")
        if self.max_retries < 0:
            raise ValueError(f"max_retries must be >= 0, got {self.max_retries}")


def upload_summary(
    target: CloudTarget,
    record: SessionRecord,
    client: httpx.Client | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> None:
    """POST one record summary; raise CloudUnreachable when it won't land.

    Makes 1 + max_retries attempts, sleeping backoff_base * 2^attempt
    between them. Any 2xx is an acknowledgement.
    """
    url = target.base_url.rstrip("/") + UPLOADS_PATH
    payload = record.to_record()
    own_client = client is None
    if own_client:
        client = httpx.Client(timeout=target.timeout_s)
    try:
        last_error: Exception | None = None
        for attempt in range(1 + target.max_retries):
            if attempt:
                sleep(target.backoff_base_s * 2 ** (attempt - 1))
            try:
                response = client.post(url, json=payload, timeout=target.timeout_s)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if 200 <= response.status_code < 300:
                return
            last_error = httpx.HTTPStatusError(
                f"cloud answered {response.status_code}",
                request=response.request,
                response=response,
            )
        raise CloudUnreachable(
            f"upload of {record.recording_id!r} failed after "
            f"{1 + target.max_retries} attempts: {last_error}"
        )
    finally:
        if own_client:
            client.close()
