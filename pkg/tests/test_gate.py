"""Upload gate: cold start, z-scoring, window semantics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fogspeech import (
    FeatureVector,
    GateDecision,
    PatientBaseline,
    Reason,
    Verdict,
    decide,
    observe,
)


def vec(f0, db=65.0, rid="r"):
    return FeatureVector(
        recording_id=rid, mean_f0_hz=f0, mean_intensity_db=db, voiced_ratio=1.0
    )


def baseline_mean120_std5(intensities=None):
    """20 sessions, f0 mean 120 Hz / std 5 exactly (10x115 + 10x125)."""
    base = PatientBaseline("p1")
    dbs = intensities or [60.0, 70.0] * 10  # mean 65, std 5
    for i, db in enumerate(dbs):
        observe(base, vec(115.0 if i % 2 == 0 else 125.0, db, rid=f"h{i}"))
    return base


def scratch_z(history_f0, new_f0):
    arr = np.asarray(history_f0, dtype=float)
    return abs(new_f0 - arr.mean()) / max(arr.std(), 1e-6)


class TestDecide:
    def test_within_baseline_is_local(self):
        decision = decide(baseline_mean120_std5(), vec(121.0, 65.0))
        assert decision.verdict is Verdict.LOCAL
        assert decision.reason is Reason.WITHIN_BASELINE
        assert decision.f0_z == pytest.approx(0.2)

    def test_large_shift_uploads(self):
        decision = decide(baseline_mean120_std5(), vec(135.0, 65.0))
        assert decision.verdict is Verdict.UPLOAD
        assert decision.reason is Reason.THRESHOLD_EXCEEDED
        assert decision.f0_z == pytest.approx(3.0)

    def test_intensity_alone_can_trigger(self):
        decision = decide(baseline_mean120_std5(), vec(120.0, 90.0))
        assert decision.verdict is Verdict.UPLOAD
        assert decision.intensity_z == pytest.approx(5.0)

    def test_cold_start_with_two_sessions(self):
        base = PatientBaseline("p1")
        observe(base, vec(120.0))
        observe(base, vec(121.0))
        decision = decide(base, vec(500.0))
        assert decision.verdict is Verdict.UPLOAD
        assert decision.reason is Reason.COLD_START

    def test_cold_start_boundary_at_min_history(self):
        base = PatientBaseline("p1")
        for i in range(4):
            observe(base, vec(120.0 + i % 2, rid=f"h{i}"))
        assert decide(base, vec(120.0)).reason is Reason.COLD_START
        observe(base, vec(121.0))
        assert decide(base, vec(120.0)).reason is not Reason.COLD_START

    def test_exactly_at_threshold_stays_local(self):
        # f0 z lands on 2.0 exactly: (130 - 120) / 5; strict > uploads
        base = baseline_mean120_std5(intensities=[65.0] * 20)
        decision = decide(base, vec(130.0, 65.0), z_threshold=2.0)
        assert decision.f0_z == 2.0
        assert decision.verdict is Verdict.LOCAL

    def test_constant_history_uses_std_floor(self):
        base = PatientBaseline("p1")
        for i in range(6):
            observe(base, vec(120.0, 65.0, rid=f"h{i}"))
        # std floored at 1e-6, so a 1e-5 shift scores z ~= 10
        decision = decide(base, vec(120.00001, 65.0))
        assert decision.verdict is Verdict.UPLOAD
        assert decision.f0_z == pytest.approx(10.0, rel=1e-3)

    def test_pure_and_repeatable(self):
        base = baseline_mean120_std5()
        before = list(base.window)
        first = decide(base, vec(133.0))
        second = decide(base, vec(133.0))
        assert first == second
        assert list(base.window) == before

    def test_validation(self):
        with pytest.raises(ValueError):
            decide(baseline_mean120_std5(), vec(120.0), z_threshold=0.0)
        with pytest.raises(ValueError):
            decide(baseline_mean120_std5(), vec(None))

    @settings(max_examples=40, deadline=None)
    @given(shift=st.floats(0.0, 50.0), extra=st.floats(0.1, 50.0))
    def test_monotone_in_f0_deviation(self, shift, extra):
        base = baseline_mean120_std5()
        near = decide(base, vec(120.0 + shift, 65.0))
        far = decide(base, vec(120.0 + shift + extra, 65.0))
        if near.verdict is Verdict.UPLOAD:
            assert far.verdict is Verdict.UPLOAD


class TestObserve:
    def test_appends(self):
        base = PatientBaseline("p1")
        observe(base, vec(120.0))
        assert len(base) == 1

    def test_evicts_oldest_at_capacity(self):
        base = PatientBaseline("p1", capacity=20)
        for i in range(20):
            observe(base, vec(100.0 + i, rid=f"h{i}"))
        observe(base, vec(200.0, rid="new"))
        assert len(base) == 20
        assert base.window[0].recording_id == "h1"
        assert base.window[-1].recording_id == "new"

    def test_custom_capacity(self):
        base = PatientBaseline("p1", capacity=3)
        for i in range(5):
            observe(base, vec(100.0 + i, rid=f"h{i}"))
        assert [v.recording_id for v in base.window] == ["h2", "h3", "h4"]

    def test_observing_first_shrinks_z(self):
        """Folding the vector into its own baseline pulls the mean toward it."""
        new = vec(134.0, 65.0)
        before_base = baseline_mean120_std5()
        z_before = decide(before_base, new).f0_z

        after_base = baseline_mean120_std5()
        observe(after_base, new)  # evicts one, adds the new vector
        z_after = decide(after_base, new).f0_z
        assert z_after < z_before

        # scratch z-score cross-check
        f0s = [115.0 if i % 2 == 0 else 125.0 for i in range(20)]
        assert z_before == pytest.approx(scratch_z(f0s, 134.0))
        assert z_after == pytest.approx(scratch_z(f0s[1:] + [134.0], 134.0))


class TestGateDecision:
    def test_verdict_reason_consistency_enforced(self):
        with pytest.raises(ValueError):
            GateDecision(
                verdict=Verdict.LOCAL,
                f0_z=0.0,
                intensity_z=0.0,
                reason=Reason.COLD_START,
            )
        with pytest.raises(ValueError):
            GateDecision(
                verdict=Verdict.UPLOAD,
                f0_z=0.0,
                intensity_z=0.0,
                reason=Reason.WITHIN_BASELINE,
            )

    def test_record_roundtrip(self):
        decision = GateDecision(
            verdict=Verdict.UPLOAD,
            f0_z=3.25,
            intensity_z=0.5,
            reason=Reason.THRESHOLD_EXCEEDED,
        )
        assert GateDecision.from_record(decision.to_record()) == decision
        assert decision.to_record()["verdict"] == "UPLOAD"
        assert decision.to_record()["reason"] == "THRESHOLD_EXCEEDED"
