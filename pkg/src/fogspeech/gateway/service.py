"""Fog gateway: ingest -> features -> gate -> persist -> (maybe) upload.

Ingestion for one patient is serialized behind a per-patient lock so
the gate sees sessions in arrival order; distinct patients proceed in
parallel. Uploads run after the HTTP response (FastAPI background
tasks) and never carry audio. Records whose upload fails stay pending
and are retried by flush_pending(), which `fogspeech serve` drives on a
timer and a restart re-arms by rescanning storage.
"""

from __future__ import annotations

import threading
from collections import defaultdict
from datetime import datetime, timezone

import httpx
from fastapi import BackgroundTasks, FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse

from ..audio import decode_wav
from ..cluster import Dataset, fit_kmeans, model_to_record
from ..errors import (
    CloudUnreachable,
    FogSpeechError,
    NoVoicedFrames,
    NotEnoughSessions,
    UnknownPatient,
)
from ..features import FeatureVector, fit_normalization, summarize, vectors_to_matrix
from ..gate import GateDecision, PatientBaseline, Reason, Verdict, decide, observe
from ..intensity import IntensityTrack, extract_intensity
from ..pitch import extract_pitch
from .cloud import CloudTarget, upload_summary
from .config import GatewayConfig
from .storage import SessionRecord, SessionStore

VALIDATED_K = (2, 3, 4)


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


def _aphonic_vector(recording_id: str, intensity: IntensityTrack) -> FeatureVector:
    """Feature summary for a clip with no voiced frames: F0 undefined."""
    db = intensity.values_db
    audible = db[db > intensity.floor_db]
    mean_db = float(audible.mean()) if audible.size else intensity.floor_db
    return FeatureVector(
        recording_id=recording_id,
        mean_f0_hz=None,
        mean_intensity_db=mean_db,
        voiced_ratio=0.0,
    )


class GatewayService:
    """All gateway behavior behind a plain-Python face; HTTP is a shim."""

    def __init__(
        self,
        config: GatewayConfig,
        transport: httpx.BaseTransport | None = None,
    ):
        self.config = config
        self.store = SessionStore(config.data_dir)
        self._locks: defaultdict[str, threading.Lock] = defaultdict(threading.Lock)
        self._locks_guard = threading.Lock()
        self._baselines: dict[str, PatientBaseline] = {}
        self._pending: dict[tuple[str, str], SessionRecord] = {}
        self._pending_guard = threading.Lock()
        self.cloud: CloudTarget | None = None
        self._client: httpx.Client | None = None
        if config.cloud_url:
            self.cloud = CloudTarget(
                base_url=config.cloud_url,
                timeout_s=config.cloud_timeout_s,
                max_retries=config.cloud_max_retries,
                backoff_base_s=config.cloud_backoff_base_s,
            )
            self._client = httpx.Client(
                timeout=config.cloud_timeout_s, transport=transport
            )
        self._recover()

    def close(self) -> None:
        if self._client is not None:
            self._client.close()

    def _lock_for(self, patient_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks[patient_id]

    def _recover(self) -> None:
        """Rebuild baselines and the pending-upload queue from storage."""
        for patient_id in self.store.list_patients():
            baseline = PatientBaseline(patient_id, capacity=self.config.gate_window)
            for record in self.store.load_sessions(patient_id):
                if record.feature_vector.mean_f0_hz is not None:
                    observe(baseline, record.feature_vector)
                if record.pending_retry:
                    self._pending[(patient_id, record.recording_id)] = record
            self._baselines[patient_id] = baseline

    # -- ingestion ----------------------------------------------------

    def ingest_recording(
        self, patient_id: str, recording_id: str, wav_bytes: bytes
    ) -> SessionRecord:
        """Decode, featurize, gate, persist; upload is the caller's followup.

        Raises FogSpeechError subclasses on undecodable input (nothing
        is persisted). Aphonic clips are persisted with a null F0 and
        force-uploaded rather than rejected.
        """
        clip = decode_wav(wav_bytes)
        with self._lock_for(patient_id):
            pitch = extract_pitch(clip)
            intensity = extract_intensity(clip)
            try:
                vector = summarize(pitch, intensity, recording_id)
            except NoVoicedFrames:
                vector = _aphonic_vector(recording_id, intensity)
                gate_decision = GateDecision(
                    verdict=Verdict.UPLOAD,
                    f0_z=0.0,
                    intensity_z=0.0,
                    reason=Reason.NO_VOICED_FRAMES,
                )
            else:
                baseline = self._baselines.setdefault(
                    patient_id,
                    PatientBaseline(patient_id, capacity=self.config.gate_window),
                )
                gate_decision = decide(
                    baseline,
                    vector,
                    z_threshold=self.config.gate_z,
                    min_history=self.config.gate_min,
                )
                observe(baseline, vector)
            record = SessionRecord(
                patient_id=patient_id,
                recording_id=recording_id,
                received_at=_utcnow(),
                feature_vector=vector,
                gate=gate_decision,
                uploaded=False,
            )
            self.store.append(record)
            if record.pending_retry:
                with self._pending_guard:
                    self._pending[(patient_id, recording_id)] = record
            return record

    # -- uploads ------------------------------------------------------

    def push_to_cloud(self, record: SessionRecord) -> bool:
        """Try to deliver one pending record; True when acknowledged."""
        if self.cloud is None or not record.pending_retry:
            return False
        key = (record.patient_id, record.recording_id)
        try:
            upload_summary(self.cloud, record, client=self._client)
        except CloudUnreachable:
            return False  # stays pending; flush_pending retries later
        with self._lock_for(record.patient_id):
            self.store.mark_uploaded(record)
        with self._pending_guard:
            self._pending.pop(key, None)
        return True

    def flush_pending(self) -> int:
        """Retry every pending upload once; returns how many landed."""
        with self._pending_guard:
            backlog = list(self._pending.values())
        return sum(self.push_to_cloud(record) for record in backlog)

    def pending_count(self) -> int:
        with self._pending_guard:
            return len(self._pending)

    # -- queries ------------------------------------------------------

    def list_sessions(self, patient_id: str) -> list[SessionRecord]:
        with self._lock_for(patient_id):
            return self.store.load_sessions(patient_id)

    def run_clustering(self, k: int, patient_id: str | None = None) -> dict:
        """Cluster stored feature summaries; persists and returns the model."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if patient_id is not None:
            if not self.store.has_patient(patient_id):
                raise UnknownPatient(f"no sessions stored for patient {patient_id!r}")
            patients = [patient_id]
        else:
            patients = self.store.list_patients()
        vectors: list[FeatureVector] = []
        for pid in patients:
            for record in self.store.load_sessions(pid):
                if record.feature_vector.mean_f0_hz is not None:
                    vectors.append(record.feature_vector)
        if len(vectors) < max(k, 2):
            raise NotEnoughSessions(
                f"{len(vectors)} usable sessions stored, need at least {max(k, 2)}"
            )
        params = fit_normalization(vectors)
        data = Dataset(
            points=vectors_to_matrix(vectors, params),
            ids=tuple(v.recording_id for v in vectors),
        )
        model = fit_kmeans(data, k=k, seed=self.config.cluster_seed)
        payload = model_to_record(model, data.ids)
        payload["normalization"] = params.to_record()
        if k not in VALIDATED_K:
            payload["warning"] = f"k={k} outside the validated sweep {list(VALIDATED_K)}"
        name = f"clusters_k{k}" + (f"_{patient_id}" if patient_id else "")
        self.store.save_model(name, payload)
        return payload


def _error_response(status: int, exc: Exception) -> JSONResponse:
    code = exc.code if isinstance(exc, FogSpeechError) else type(exc).__name__
    return JSONResponse(status_code=status, content={"error": code})


def create_app(
    config: GatewayConfig | None = None,
    transport: httpx.BaseTransport | None = None,
) -> FastAPI:
    """Build the HTTP face over a fresh GatewayService.

    `transport` goes to the cloud-side httpx client so tests can stub
    the cloud without touching a network.
    """
    service = GatewayService(config or GatewayConfig.from_env(), transport=transport)
    app = FastAPI(title="fogspeech gateway")
    app.state.service = service

    @app.post("/v1/patients/{patient_id}/recordings", status_code=201)
    async def ingest(patient_id: str, request: Request, background: BackgroundTasks):
        recording_id = request.headers.get("X-Recording-Id")
        if not recording_id:
            return JSONResponse(
                status_code=400, content={"error": "MissingRecordingId"}
            )
        wav_bytes = await request.body()
        try:
            record = await run_in_threadpool(
                service.ingest_recording, patient_id, recording_id, wav_bytes
            )
        except FogSpeechError as exc:
            return _error_response(400, exc)
        if record.pending_retry and service.cloud is not None:
            background.add_task(service.push_to_cloud, record)
        return JSONResponse(status_code=201, content=record.to_record())

    @app.get("/v1/patients/{patient_id}/sessions")
    def sessions(patient_id: str):
        try:
            records = service.list_sessions(patient_id)
        except UnknownPatient as exc:
            return _error_response(404, exc)
        return [r.to_record() for r in records]

    @app.post("/v1/cluster")
    def cluster(k: int, patient_id: str | None = None):
        try:
            return service.run_clustering(k, patient_id)
        except (NotEnoughSessions, ValueError) as exc:
            return _error_response(422, exc)
        except UnknownPatient as exc:
            return _error_response(404, exc)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    return app
