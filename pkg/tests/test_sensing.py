import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsync_sim.motion import BREATHING, RhythmicMotion
from rsync_sim.sensing import (MalformedTrack, NoSamples, NyquistViolation, SensingError, SensorModel, TrackSeries,
                               observe, read_track, write_track)

X25 = RhythmicMotion.from_amplitudes([25, 0, 0, 0, 0, 0], 0.2)


def test_noiseless_samples_equal_truth():
    m = RhythmicMotion.from_amplitudes([3, 1, 0, 2, 0, 5], 0.25, 0.4, BREATHING)
    ts = observe(m, SensorModel(sigma_trans=0, sigma_rot=0))
    assert np.array_equal(ts.poses, m.sample(ts.t))


def test_default_sampling_grid():
    ts = observe(X25, SensorModel())
    assert len(ts) == 900
    assert np.allclose(np.diff(ts.t), 1 / 15, rtol=0, atol=1e-12)
    assert ts.t[0] == 0.0


def test_nyquist_and_duration_checks():
    m = RhythmicMotion.from_amplitudes([1, 0, 0, 0, 0, 0], 0.5)
    with pytest.raises(NyquistViolation):
        observe(m, SensorModel(fps=1.0))
    with pytest.raises(NyquistViolation):
        observe(m, SensorModel(fps=1.0 + 1e-12 - 1e-12))
    with pytest.raises(NoSamples):
        observe(X25, SensorModel(duration=19.0))
    observe(X25, SensorModel(duration=20.0))


def test_static_motion_needs_no_period():
    ts = observe(RhythmicMotion.static(), SensorModel(fps=1, duration=4, sigma_trans=0, sigma_rot=0))
    assert len(ts) == 4 and not ts.poses.any()


@pytest.mark.parametrize("kw", [dict(fps=0), dict(duration=-1), dict(sigma_trans=-0.1), dict(outlier_fraction=0.1),
                                dict(clock_offset=-1)])
def test_sensor_validation(kw):
    with pytest.raises(SensingError):
        SensorModel(**kw)


def test_determinism():
    a = observe(X25, SensorModel(seed=7))
    b = observe(X25, SensorModel(seed=7))
    c = observe(X25, SensorModel(seed=8))
    assert a == b
    assert a.poses.tobytes() == b.poses.tobytes()
    assert a != c


def test_mean_residual_within_bound():
    # 3 sigma / sqrt(900) = 0.1 mm; a looser 0.15 mm band keeps 20 seeds from flaking
    for seed in range(20):
        ts = observe(X25, SensorModel(sigma_trans=1.0, seed=seed))
        res = ts.poses[:, :3] - X25.sample(ts.t)[:, :3]
        assert np.all(np.abs(res.mean(axis=0)) <= 0.15)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.05, 5.0), st.integers(0, 2**31))
def test_noise_std_converges(st_, sr, seed):
    ts = observe(X25, SensorModel(sigma_trans=st_, sigma_rot=sr, seed=seed))
    res = ts.poses - X25.sample(ts.t)
    std = res.std(axis=0, ddof=1)
    assert np.all(np.abs(std[:3] / st_ - 1) < 0.1)
    assert np.all(np.abs(std[3:] / sr - 1) < 0.1)


def test_clock_offset_shifts_observed_time():
    s = SensorModel(sigma_trans=0, sigma_rot=0, clock_offset=0.3, seed=11)
    ts = observe(X25, s)
    rng = np.random.default_rng(11)
    rng.standard_normal((900, 6))
    delta = 0.3 * rng.standard_normal()
    assert np.allclose(ts.poses, X25.sample(ts.t - delta), atol=1e-12)


def test_track_is_read_only_and_strictly_increasing():
    ts = observe(X25, SensorModel())
    with pytest.raises(ValueError):
        ts.poses[0, 0] = 1.0
    with pytest.raises(MalformedTrack):
        TrackSeries([0.0, 0.0], np.zeros((2, 6)))
    with pytest.raises(NoSamples):
        TrackSeries([], np.zeros((0, 6)))


def test_round_trip(tmp_path):
    ts = observe(RhythmicMotion.from_amplitudes([1, 2, 3, 4, 5, 6], 0.3), SensorModel(seed=3))
    p = tmp_path / "track.csv"
    write_track(ts, p)
    assert p.read_text().splitlines()[0] == "t,tx,ty,tz,rx,ry,rz"
    assert read_track(p) == ts


def test_empty_file_is_malformed(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    with pytest.raises(MalformedTrack):
        read_track(p)


def test_header_only_has_no_samples(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("t,tx,ty,tz,rx,ry,rz\n")
    with pytest.raises(NoSamples):
        read_track(p)


def test_bad_row_names_row_number(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("t,tx,ty,tz,rx,ry,rz\n0,0,0,0,0,0,0\n1,0,0,oops,0,0,0\n")
    with pytest.raises(MalformedTrack, match="row 3"):
        read_track(p)
    p.write_text("t,tx,ty,tz,rx,ry,rz\n0,0,0,0,0,0\n")
    with pytest.raises(MalformedTrack, match="row 2"):
        read_track(p)
    p.write_text("time,x\n0,0\n")
    with pytest.raises(MalformedTrack, match="header"):
        read_track(p)


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(OSError):
        read_track(tmp_path / "nope.csv")
