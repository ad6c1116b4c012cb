import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harmloss.errors import BandEmpty
from harmloss.machine import DqVoltages, HarmonicParameterTables
from harmloss.modulation import Mode, PwmConfig, TopologyMode, inverse_park, synthesize_waveform
from harmloss.spectrum import (
    DqSeries,
    HarmonicSpectrum,
    park,
    park_transform,
    ripple_spectrum,
    single_sided_amplitudes,
    spectrum_csv,
)

FS = 1.28e6
N = 12800  # 10 ms, 100 Hz resolution


def tone_series(amplitude=10.0, f=10e3, axis="d", offset=(0.0, 0.0)):
    t = np.arange(N) / FS
    x = amplitude * np.cos(2 * math.pi * f * t)
    d = x + offset[0] if axis == "d" else np.full(N, offset[0])
    q = x + offset[1] if axis == "q" else np.full(N, offset[1])
    return DqSeries(d, q, FS)


def test_park_of_balanced_set_is_constant():
    theta = np.linspace(0, 4 * math.pi, 1000)
    abc = inverse_park(30.0, 40.0, theta)
    d, q = park(*abc, theta)
    assert np.allclose(d, 30.0, atol=1e-12)
    assert np.allclose(q, 40.0, atol=1e-12)
    assert np.allclose(np.hypot(d, q), 50.0, atol=1e-12)


def test_park_zero_input():
    theta = np.linspace(0, 1, 10)
    d, q = park(np.zeros(10), np.zeros(10), np.zeros(10), theta)
    assert not d.any() and not q.any()


@settings(max_examples=50)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=2), st.floats(0, 100))
def test_inverse_park_round_trip(dq, theta):
    d, q = park(*inverse_park(dq[0], dq[1], np.array([theta])), np.array([theta]))
    assert d[0] == pytest.approx(dq[0], abs=1e-9)
    assert q[0] == pytest.approx(dq[1], abs=1e-9)


def test_single_tone_recovered():
    spec = ripple_spectrum(tone_series(), DqVoltages(0.0, 0.0), (2500.0, 250e3))
    k = int(np.argmax(spec.u_d_h))
    assert spec.f_h[k] == pytest.approx(10e3, abs=1e-9)
    assert spec.u_d_h[k] == pytest.approx(10.0, abs=1e-9)
    assert np.all(spec.u_q_h <= 1e-9)
    others = np.delete(spec.u_d_h, k)
    assert others.max() <= 1e-9


def test_reference_is_subtracted():
    series = tone_series(offset=(120.0, -340.0))
    spec = ripple_spectrum(series, DqVoltages(120.0, -340.0), (0.0, FS / 2))
    assert spec.u_d_h[0] == pytest.approx(0.0, abs=1e-9)
    assert spec.u_q_h[0] == pytest.approx(0.0, abs=1e-9)


def test_zero_ripple_gives_zero_bins():
    series = DqSeries(np.full(N, 5.0), np.full(N, 7.0), FS)
    spec = ripple_spectrum(series, DqVoltages(5.0, 7.0), (2500.0, 250e3))
    assert spec.f_h.size > 0
    assert not spec.u_d_h.any() and not spec.u_q_h.any()


def test_band_empty():
    with pytest.raises(BandEmpty):
        ripple_spectrum(tone_series(), DqVoltages(0.0, 0.0), (1010.0, 1090.0))


def test_band_from_tables_default_edge():
    t = HarmonicParameterTables(grid=(1e3, 1e6), ld_h=(1e-4,) * 2, lq_h=(1e-4,) * 2,
                                rcu_h=(1,) * 2, riron_h=(1,) * 2, rmag_h=(1,) * 2)
    spec = ripple_spectrum(tone_series(), DqVoltages(0.0, 0.0), t, f_sw=4e3)
    assert spec.band == (2500.0, 100e3)
    assert spec.f_h[0] >= 2500.0 and spec.f_h[-1] <= 100e3
    with pytest.raises(ValueError):
        ripple_spectrum(tone_series(), DqVoltages(0.0, 0.0), t)


def test_band_filtering_excludes_low_order_harmonics():
    t = np.arange(N) / FS
    d = 3.0 * np.cos(2 * math.pi * 500.0 * t) + 2.0 * np.cos(2 * math.pi * 20e3 * t)
    spec = ripple_spectrum(DqSeries(d, np.zeros(N), FS), DqVoltages(0.0, 0.0), (2500.0, 250e3))
    assert spec.f_h.min() >= 2500.0
    assert spec.u_d_h.max() == pytest.approx(2.0, abs=1e-9)


def _parseval_gap(x):
    amp = single_sided_amplitudes(x)
    return (amp**2).sum() / 2.0, np.mean(x**2)


@settings(max_examples=30)
@given(st.integers(min_value=4, max_value=400), st.integers(min_value=0, max_value=2**31 - 1))
def test_parseval_random_series(n, seed):
    x = np.random.default_rng(seed).normal(size=n)
    lhs, rhs = _parseval_gap(x)
    assert lhs == pytest.approx(rhs, rel=1e-9)


@pytest.mark.parametrize("mode", list(Mode))
def test_parseval_on_waveforms(mode):
    cap = 800.0 if mode is Mode.OW_H else 800.0 / math.sqrt(3.0)
    vdc_set = 400.0 if mode is Mode.BUCK_2L else None
    if vdc_set:
        cap /= 2
    u = DqVoltages(-0.2 * cap, 0.6 * cap)
    w = synthesize_waveform(TopologyMode(mode, vdc_set), 800.0, u, 300.0,
                            PwmConfig(samples_per_switching_period=64))
    dq = park_transform(w)
    spec = ripple_spectrum(dq, u, (0.0, dq.sample_rate / 2))
    lhs = ((spec.u_d_h**2 + spec.u_q_h**2) / 2).sum()
    rhs = np.mean((dq.d - u.d) ** 2 + (dq.q - u.q) ** 2)
    assert lhs == pytest.approx(rhs, rel=1e-9)


@given(st.floats(min_value=0.01, max_value=100.0))
def test_linearity(alpha):
    rng = np.random.default_rng(3)
    d, q = rng.normal(size=N), rng.normal(size=N)
    base = ripple_spectrum(DqSeries(d, q, FS), DqVoltages(0.0, 0.0), (2500.0, 250e3))
    scaled = ripple_spectrum(DqSeries(alpha * d, alpha * q, FS), DqVoltages(0.0, 0.0),
                             (2500.0, 250e3))
    assert np.allclose(scaled.u_d_h, alpha * base.u_d_h, rtol=1e-12, atol=1e-12 * alpha)
    assert np.allclose(scaled.u_q_h, alpha * base.u_q_h, rtol=1e-12, atol=1e-12 * alpha)


def test_spectrum_invariants_and_metadata():
    w = synthesize_waveform(Mode.TNPC_3L, 800.0, DqVoltages(-50.0, 250.0), 200.0,
                            PwmConfig(samples_per_switching_period=64))
    u = DqVoltages(-50.0, 250.0)
    spec = ripple_spectrum(park_transform(w), u, (2500.0, 250e3))
    assert np.all(np.diff(spec.f_h) > 0)
    assert np.all(spec.u_d_h >= 0) and np.all(spec.u_q_h >= 0)
    assert spec.resolution == pytest.approx(w.f_e_used)
    meta = spec.metadata()
    assert meta["amplitude_convention"] == "single-sided peak"
    assert meta["n_bins"] == spec.f_h.size


def test_select_and_scaled():
    spec = HarmonicSpectrum(np.array([3e3, 5e3, 9e3]), np.array([1.0, 2.0, 3.0]),
                            np.array([0.5, 0.0, 1.0]), (2500.0, 1e4), 100.0)
    sub = spec.select(4e3, 1e4)
    assert sub.f_h.tolist() == [5e3, 9e3]
    assert spec.scaled(2.0).u_d_h.tolist() == [2.0, 4.0, 6.0]


def test_spectrum_csv():
    spec = HarmonicSpectrum(np.array([3e3, 5e3]), np.array([1.0, 2.0]), np.array([0.5, 0.0]),
                            (2500.0, 1e4), 100.0)
    assert spectrum_csv(spec) == "f_hz,ud_V,uq_V\n3000.0,1.0,0.5\n5000.0,2.0,0.0\n"
