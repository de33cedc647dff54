"""Feature summarization and z-score normalization."""

import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from fogspeech import (
    FeatureScaler,
    FeatureVector,
    NormalizationParams,
    apply_normalization,
    decode_wav,
    extract_intensity,
    extract_pitch,
    fit_normalization,
    summarize,
)
from fogspeech.errors import DegenerateFeatureWarning, NoVoicedFrames, TrackMismatch
from fogspeech.features import params_from_scaler, vectors_to_matrix
from fogspeech.intensity import DB_FLOOR, IntensityFrame, IntensityTrack
from fogspeech.pitch import PitchFrame, PitchTrack
from synth import sine_wav, silence_wav


def pitch_track(f0s):
    frames = [
        PitchFrame(time_s=0.01 * i, f0_hz=f0, periodicity=0.9 if f0 else 0.0)
        for i, f0 in enumerate(f0s)
    ]
    return PitchTrack(frames=frames, floor_hz=75.0, ceiling_hz=600.0)


def intensity_track(dbs):
    frames = [
        IntensityFrame(time_s=0.01 * i, intensity_db=db) for i, db in enumerate(dbs)
    ]
    return IntensityTrack(frames=frames)


def vec(rid, f0, db, vr=1.0):
    return FeatureVector(
        recording_id=rid, mean_f0_hz=f0, mean_intensity_db=db, voiced_ratio=vr
    )


class TestSummarize:
    def test_mean_over_voiced_frames(self):
        fv = summarize(
            pitch_track([200.0, 210.0, 220.0]),
            intensity_track([60.0, 60.0, 60.0]),
            "r1",
        )
        assert fv.mean_f0_hz == pytest.approx(210.0)
        assert fv.voiced_ratio == 1.0

    def test_unvoiced_frames_excluded_from_f0(self):
        fv = summarize(
            pitch_track([200.0, None, 220.0, None]),
            intensity_track([60.0, 60.0, 60.0, 60.0]),
            "r1",
        )
        assert fv.mean_f0_hz == pytest.approx(210.0)
        assert fv.voiced_ratio == 0.5

    def test_clamped_frames_excluded_from_intensity(self):
        fv = summarize(
            pitch_track([200.0, 200.0, 200.0]),
            intensity_track([DB_FLOOR, 70.0, 80.0]),
            "r1",
        )
        assert fv.mean_intensity_db == pytest.approx(75.0)

    def test_all_unvoiced_raises(self):
        with pytest.raises(NoVoicedFrames):
            summarize(pitch_track([None, None]), intensity_track([60.0, 60.0]), "r1")

    def test_track_length_mismatch(self):
        with pytest.raises(TrackMismatch):
            summarize(pitch_track([200.0]), intensity_track([60.0, 61.0]), "r1")

    def test_end_to_end_220hz_sine(self):
        clip = decode_wav(sine_wav(220.0, amp=0.5))
        fv = summarize(extract_pitch(clip), extract_intensity(clip), "sine220")
        assert fv.mean_f0_hz == pytest.approx(220.0, abs=1.0)
        assert fv.mean_intensity_db == pytest.approx(84.9485, abs=0.2)
        assert fv.voiced_ratio == 1.0

    def test_silence_end_to_end_raises(self):
        clip = decode_wav(silence_wav())
        with pytest.raises(NoVoicedFrames):
            summarize(extract_pitch(clip), extract_intensity(clip), "quiet")

    def test_record_roundtrip(self):
        fv = vec("r9", 123.4, 67.8, 0.75)
        again = FeatureVector.from_record(json.loads(json.dumps(fv.to_record())))
        assert again == fv

    def test_record_roundtrip_null_f0(self):
        fv = vec("r9", None, -300.0, 0.0)
        assert FeatureVector.from_record(fv.to_record()) == fv


class TestNormalization:
    def test_two_point_example(self):
        params = fit_normalization([vec("a", 100.0, 60.0), vec("b", 120.0, 70.0)])
        assert params.mean == pytest.approx((110.0, 65.0))
        assert params.std == pytest.approx((10.0, 5.0))
        assert apply_normalization(vec("a", 100.0, 60.0), params) == pytest.approx(
            (-1.0, -1.0)
        )

    def test_population_std_not_sample_std(self):
        params = fit_normalization(
            [vec("a", 100.0, 60.0), vec("b", 110.0, 60.0), vec("c", 120.0, 70.0)]
        )
        xs = np.array([100.0, 110.0, 120.0])
        assert params.std[0] == pytest.approx(xs.std())  # ddof=0

    def test_degenerate_dimension_warns_and_uses_unit_std(self):
        vectors = [vec(f"r{i}", 150.0, 70.0) for i in range(5)]
        with pytest.warns(DegenerateFeatureWarning) as captured:
            params = fit_normalization(vectors)
        assert len(captured) == 2  # both features are constant
        assert params.std == (1.0, 1.0)
        assert apply_normalization(vectors[0], params) == pytest.approx((0.0, 0.0))

    def test_single_vector_rejected(self):
        with pytest.raises(ValueError):
            fit_normalization([vec("a", 100.0, 60.0)])

    def test_null_f0_rejected(self):
        with pytest.raises(ValueError):
            fit_normalization([vec("a", None, 60.0), vec("b", 100.0, 61.0)])
        params = NormalizationParams(mean=(0.0, 0.0), std=(1.0, 1.0))
        with pytest.raises(ValueError):
            apply_normalization(vec("a", None, 60.0), params)

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(
            st.tuples(st.floats(80.0, 400.0), st.floats(30.0, 95.0)),
            min_size=2,
            max_size=30,
        )
    )
    def test_normalized_population_has_zero_mean_unit_std(self, rows):
        # realistic measurement grid; sub-ulp spreads would make the
        # moment identity numerically unattainable for any implementation
        rows = [(round(f0, 2), round(db, 2)) for f0, db in rows]
        vectors = [vec(f"r{i}", f0, db) for i, (f0, db) in enumerate(rows)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateFeatureWarning)
            params = fit_normalization(vectors)
            norm = vectors_to_matrix(vectors, params)
        degenerate = np.asarray(
            [
                len({r[0] for r in rows}) == 1,
                len({r[1] for r in rows}) == 1,
            ]
        )
        assert np.all(np.abs(norm.mean(axis=0)) < 1e-9)
        expected_std = np.where(degenerate, 0.0, 1.0)
        assert np.allclose(norm.std(axis=0), expected_std, atol=1e-9)

    def test_idempotent_at_population_level(self):
        vectors = [
            vec("a", 100.0, 60.0),
            vec("b", 140.0, 75.0),
            vec("c", 180.0, 65.0),
        ]
        params = fit_normalization(vectors)
        renorm = [
            vec(v.recording_id, *apply_normalization(v, params)) for v in vectors
        ]
        second = fit_normalization(renorm)
        assert second.mean == pytest.approx((0.0, 0.0), abs=1e-9)
        assert second.std == pytest.approx((1.0, 1.0), abs=1e-9)

    def test_params_record_roundtrip(self):
        params = NormalizationParams(mean=(110.0, 65.0), std=(10.0, 5.0))
        assert NormalizationParams.from_record(params.to_record()) == params


class TestFeatureScaler:
    def test_matches_fit_normalization(self):
        vectors = [vec("a", 100.0, 60.0), vec("b", 120.0, 70.0), vec("c", 95.0, 58.0)]
        params = fit_normalization(vectors)
        X = np.array([(v.mean_f0_hz, v.mean_intensity_db) for v in vectors])
        scaler = FeatureScaler().fit(X)
        assert params_from_scaler(scaler).mean == pytest.approx(params.mean)
        assert params_from_scaler(scaler).std == pytest.approx(params.std)
        np.testing.assert_allclose(
            scaler.transform(X), vectors_to_matrix(vectors, params)
        )

    def test_inverse_transform_roundtrip(self):
        X = np.array([[100.0, 60.0], [120.0, 70.0], [95.0, 58.0]])
        scaler = FeatureScaler().fit(X)
        np.testing.assert_allclose(scaler.inverse_transform(scaler.transform(X)), X)

    def test_degenerate_mask_and_warning(self):
        X = np.array([[100.0, 5.0], [100.0, 7.0], [100.0, 9.0]])
        with pytest.warns(DegenerateFeatureWarning):
            scaler = FeatureScaler().fit(X)
        np.testing.assert_array_equal(scaler.degenerate_mask_, [True, False])
        assert scaler.scale_[0] == 1.0

    def test_unfitted_raises(self):
        with pytest.raises(NotFittedError):
            FeatureScaler().transform(np.zeros((2, 2)))

    def test_sklearn_clone_and_params(self):
        scaler = FeatureScaler()
        assert clone(scaler).get_params() == scaler.get_params()

    def test_feature_count_checked(self):
        scaler = FeatureScaler().fit(np.zeros((3, 2)) + np.arange(3)[:, None])
        with pytest.raises(ValueError):
            scaler.transform(np.zeros((2, 3)))

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            FeatureScaler().fit(np.array([[1.0, 2.0]]))
