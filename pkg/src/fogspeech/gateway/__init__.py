"""Fog-node gateway service: HTTP ingestion, persistence, cloud uplink."""

from .cloud import CloudTarget, upload_summary
from .config import GatewayConfig
from .service import GatewayService, create_app
from .storage import SessionRecord, SessionStore

__all__ = [
    "CloudTarget",
    "GatewayConfig",
    "GatewayService",
    "SessionRecord",
    "SessionStore",
    "create_app",
    "upload_summary",
]
