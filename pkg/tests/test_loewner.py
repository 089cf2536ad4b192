import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import half_disk_map, rk4_flow, slit_map
from slecft.loewner import (
    DrivingPath,
    SleParams,
    driving_batch,
    flow_point,
    flow_real_point,
    half_disk,
    hit_slit,
    monitor_hits,
    polyline_hits,
    sample_driving,
    step_map,
    trace,
    vertical_slit,
)


def zero_path(T=1.0, n=1000):
    return DrivingPath(T / n, np.zeros(n))


# -- driving -------------------------------------------------------------------------------

def test_kappa_zero_driving_is_zero():
    d = sample_driving(SleParams(0.0, T=1.0, n_steps=100))
    assert not d.dw.any()


def test_driving_is_deterministic():
    p = SleParams(8 / 3, n_steps=5000, seed=7)
    assert np.array_equal(sample_driving(p, 3).dw, sample_driving(p, 3).dw)
    assert not np.array_equal(sample_driving(p, 3).dw, sample_driving(p, 4).dw)


def test_driving_batch_rows_match_single_paths():
    p = SleParams(6.0, n_steps=300, seed=11)
    batch = driving_batch(p, 5, 9)
    for r, idx in enumerate(range(5, 9)):
        assert np.array_equal(batch[r], sample_driving(p, idx).dw)


def test_driving_mean_clt():
    p = SleParams(8 / 3, T=1000.0, n_steps=10**6, seed=1)
    dw = sample_driving(p).dw
    se = math.sqrt(p.kappa * p.dt / len(dw))
    assert abs(dw.mean()) < 4 * se
    assert dw.var() == pytest.approx(p.kappa * p.dt, rel=0.01)


def test_params_validation():
    for bad in (dict(kappa=-1.0), dict(kappa=1.0, T=0.0), dict(kappa=1.0, n_steps=0), dict(kappa=1.0, seed=-1)):
        with pytest.raises(ValueError):
            SleParams(**bad)


def test_driving_values():
    d = DrivingPath(0.1, np.array([1.0, 2.0, 3.0]))
    assert d.values().tolist() == [0.0, 1.0, 3.0]
    assert d.final_value() == 6.0 and d.T == pytest.approx(0.3)


# -- elementary map ----------------------------------------------------------------------

def test_step_map_identity_at_zero_time():
    assert step_map(2, 0, 0) == 2


def test_step_map_closed_form():
    assert step_map(2, 0, 1) == pytest.approx(math.sqrt(8), abs=1e-12)


def test_step_map_swallows_origin():
    assert step_map(0, 0, 0.1) is None
    # points on the new slit are swallowed, real points beside it are pushed outward
    assert step_map(0.5j, 0, 0.1) is None
    assert step_map(0.3, 0, 0.1) == pytest.approx(math.sqrt(0.09 + 0.4))
    assert step_map(-0.3, 0, 0.1) == pytest.approx(-math.sqrt(0.09 + 0.4))


def test_step_map_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        step_map(1 - 1j, 0, 1)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(-3, 3), st.floats(0.05, 3), st.floats(-2, 2), st.floats(0.001, 0.5)
)
def test_step_map_matches_rk4(re, im, w, dt):
    # keep away from the slit [w, w + 2i sqrt(dt)] where the ODE is singular
    assume(abs(re - w) > 0.05 or im > 2 * math.sqrt(dt) + 0.05)
    z = complex(re, im)
    assert step_map(z, w, dt) == pytest.approx(rk4_flow(z, w, dt, n=400), abs=1e-7)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(0, 3), st.floats(-2, 2), st.floats(0.001, 0.5))
def test_step_map_stays_in_upper_half_plane(re, im, w, dt):
    out = step_map(complex(re, im), w, dt)
    assert out is None or out.imag >= 0


# -- flow ------------------------------------------------------------------------------------

def test_flow_zero_driving_real_point():
    st_ = flow_point(zero_path(T=1.0), 3.0)
    assert st_.swallowed_at is None
    assert st_.z == pytest.approx(math.sqrt(9 + 4), abs=1e-12)
    # derivative of sqrt(x^2 + 4T)
    assert st_.deriv.real == pytest.approx(3 / math.sqrt(13), abs=1e-12)


def test_flow_large_z_asymptotics():
    d = sample_driving(SleParams(8 / 3, T=1.0, n_steps=2000, seed=3))
    z0 = 50j + 10
    st_ = flow_point(d, z0)
    W = d.final_value()
    # g_T(z) = z + 2T/z + O(|z|^-2); the O(|z|^-2) term carries the driving
    assert abs(st_.z - z0 - 2 / z0) < 10 * (1 + abs(W)) / abs(z0) ** 2


def test_flow_origin_swallowed():
    assert flow_point(zero_path(), 0).swallowed_at == 0.0


def test_flow_matches_composed_step_maps():
    d = sample_driving(SleParams(6.0, T=0.5, n_steps=200, seed=5))
    z = 0.4 + 0.8j
    w = d.values()
    for i in range(d.n_steps):
        z = step_map(z, w[i], d.dt)
    assert flow_point(d, 0.4 + 0.8j).z == pytest.approx(z, abs=1e-12)


def test_flow_real_point_zero_driving():
    z, dz, w = flow_real_point(SleParams(0.0, T=0.25, n_steps=100), 2.0, 3)
    assert np.allclose(z, math.sqrt(4 + 1)) and np.allclose(w, 0)
    assert np.allclose(dz, 2 / math.sqrt(5))


# -- trace -------------------------------------------------------------------------------------

def test_trace_zero_driving_vertical_line():
    tr = trace(zero_path(T=1.0, n=400), stride=20)
    assert tr.points[0] == 0
    np.testing.assert_allclose(tr.points, 2j * np.sqrt(tr.times), atol=1e-12)


def test_trace_sane_in_half_plane():
    tr = trace(sample_driving(SleParams(8 / 3, T=1.0, n_steps=10**4, seed=9)), stride=50)
    assert np.all(np.isfinite(tr.points))
    assert np.all(tr.points.imag >= -1e-12)
    assert tr.points[0] == 0
    assert abs(tr.points[1]) < 0.2


def test_trace_csv():
    tr = trace(zero_path(T=1.0, n=10), stride=5)
    lines = tr.to_csv().splitlines()
    assert lines[0] == "t,re,im" and len(lines) == 1 + 3


def test_trace_stride_validation():
    with pytest.raises(ValueError):
        trace(zero_path(), stride=0)


def test_scaling_covariance():
    d = sample_driving(SleParams(8 / 3, T=1.0, n_steps=10**4, seed=2))
    lam = 2.5
    a = trace(d, stride=100).points * math.sqrt(lam)
    b = trace(d.scaled(lam), stride=100).points
    # Hausdorff distance relative to the curve's diameter
    D = np.abs(a[:, None] - b[None, :])
    haus = max(D.min(axis=0).max(), D.min(axis=1).max())
    assert haus <= 0.01 * np.abs(a).max()


# -- hulls and hits ------------------------------------------------------------------------------

def test_hull_validation():
    with pytest.raises(ValueError):
        vertical_slit(0.0, 1.0)
    with pytest.raises(ValueError):
        half_disk(1.0, 1.0)
    with pytest.raises(ValueError):
        vertical_slit(1.0, -1.0)


def test_hull_geometry():
    s = vertical_slit(3.0, 4.0)
    assert s.reach == 5.0 and s.point(1.0) == 3 + 4j
    h = half_disk(2.0, 0.5)
    assert h.reach == 2.5
    assert abs(h.point(0.5) - (2 + 0.5j)) < 1e-12
    assert all(abs(abs(z - 2) - 0.5) < 1e-12 for z in h.boundary_samples())


def test_hull_maps_oracles_are_uniformizing():
    # sanity of the test oracles themselves: hull boundary goes to the real line
    for y in (0.1, 0.5, 0.99):
        assert abs(slit_map(complex(1.0 + 1e-12, y), 1.0, 1.0).imag) < 1e-5
    z = 2 + cmath.rect(0.5, 1.0)
    assert abs(half_disk_map(z, 2.0, 0.5).imag) < 1e-12


def test_hit_slit_zero_driving_misses():
    assert not hit_slit(zero_path(T=4.0), 1.0, 0.3)


def test_hit_slit_unreachable():
    d = sample_driving(SleParams(6.0, T=1.0, n_steps=2000, seed=4))
    w = np.concatenate([[0.0], np.cumsum(d.dw)])
    x = np.abs(w).max() + 2 * math.sqrt(d.T) + 1.0
    assert not hit_slit(d, x, 0.1)


def test_hit_slit_validation():
    with pytest.raises(ValueError):
        hit_slit(zero_path(), 0.0, 0.1)
    with pytest.raises(ValueError):
        hit_slit(zero_path(), 1.0, 0.0)


def test_hit_slit_smoke_frequency():
    p = SleParams(6.0, T=4.0, n_steps=4000, seed=12)
    hits = [hit_slit(sample_driving(p, i), 0.5, 0.5) for i in range(60)]
    assert 0 < sum(hits) < 60


def test_monitor_monotone_in_delta_and_eps():
    p = SleParams(6.0, T=2.0, n_steps=2000, seed=8)
    n = 80
    for x in (0.5,):
        lo = monitor_hits(p, [vertical_slit(x, 0.2)], n, delta_hit=0.01)[:, 0]
        hi = monitor_hits(p, [vertical_slit(x, 0.2)], n, delta_hit=0.1)[:, 0]
        assert np.all(hi >= lo)
    paths = [sample_driving(p, i) for i in range(n)]
    small = np.array([hit_slit(d, 0.5, 0.1) for d in paths])
    big = np.array([hit_slit(d, 0.5, 0.3) for d in paths])
    # the bigger slit contains the smaller one; a path hitting the small slit near its
    # tip must pass within the threshold of the big slit's midpoint or be swallowed
    assert big.sum() >= small.sum()


def test_monitor_min_gap_monotone():
    d = sample_driving(SleParams(6.0, T=1.0, n_steps=3000, seed=13))
    gap = flow_point(d, 0.6 + 0.2j).min_gap
    hits = [hit_slit(d, 0.6, 0.2 / math.sqrt(2), delta) for delta in (0.001, 0.01, 0.1, 1.0, 10.0)]
    assert hits == sorted(hits)
    assert gap >= 0


def test_polyline_hits_examples():
    tr = trace(zero_path(T=1.0, n=200), stride=1)
    assert not polyline_hits(tr, vertical_slit(0.5, 3.0))
    assert not polyline_hits(tr, half_disk(1.0, 0.5))
    shifted = type(tr)(tr.points + 0.5, tr.times)
    assert polyline_hits(shifted, vertical_slit(0.5, 1.0))
    assert polyline_hits(shifted, half_disk(1.0, 0.6))
