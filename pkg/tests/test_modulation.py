import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harmloss.errors import InvalidConfig, Overmodulation
from harmloss.machine import DqVoltages
from harmloss.modulation import (
    Mode,
    PwmConfig,
    TopologyMode,
    inverse_park,
    svpwm_reference,
    synthesize_waveform,
    waveform_csv,
    winding_level_set,
)

VDC = 800.0
CFG = PwmConfig(samples_per_switching_period=64)


def u_at(m, cap, angle=1.2):
    return DqVoltages(-m * cap * math.sin(angle), m * cap * math.cos(angle))


def capability(mode, vdc=VDC):
    return vdc if mode is Mode.OW_H else vdc / math.sqrt(3.0)


def topo(mode):
    return TopologyMode(mode, 400.0 if mode is Mode.BUCK_2L else None)


def test_mode_parse_is_case_insensitive():
    assert Mode.parse("tnpc_3l") is Mode.TNPC_3L
    with pytest.raises(ValueError):
        Mode.parse("npc")


def test_buck_setpoint_validation():
    assert TopologyMode(Mode.BUCK_2L, 400.0).dc_link(800.0) == 400.0
    assert TopologyMode(Mode.B6_2L).dc_link(800.0) == 800.0
    with pytest.raises(ValueError):
        TopologyMode(Mode.BUCK_2L, 900.0).dc_link(800.0)
    with pytest.raises(ValueError):
        TopologyMode(Mode.BUCK_2L, 0.0).dc_link(800.0)
    with pytest.raises(ValueError):
        TopologyMode(Mode.B6_2L, 400.0).dc_link(800.0)


def test_pwm_config_validation():
    with pytest.raises(InvalidConfig):
        PwmConfig(samples_per_switching_period=16)
    with pytest.raises(InvalidConfig):
        PwmConfig(samples_per_switching_period=65)
    with pytest.raises(InvalidConfig):
        PwmConfig(fundamental_periods=0)
    with pytest.raises(InvalidConfig):
        PwmConfig(scheme="SPWM")


def test_svpwm_zero_reference():
    t = np.linspace(0, 0.01, 101)
    assert np.all(svpwm_reference(DqVoltages(0.0, 0.0), 100.0, VDC, t) == 0.0)


def test_svpwm_linear_range_boundary():
    t = np.linspace(0, 0.01, 20001)
    refs = svpwm_reference(DqVoltages(0.0, VDC / math.sqrt(3.0)), 100.0, VDC, t)
    assert np.abs(refs).max() == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(Overmodulation):
        svpwm_reference(DqVoltages(0.0, 1.01 * VDC / math.sqrt(3.0)), 100.0, VDC, t)


def test_svpwm_injection_is_common_mode():
    t = np.linspace(0, 0.01, 501)
    u = DqVoltages(50.0, 300.0)
    refs = svpwm_reference(u, 100.0, VDC, t) * (VDC / 2.0)
    abc = inverse_park(u.d, u.q, 2 * math.pi * 100.0 * t)
    injection = refs - abc
    assert np.allclose(injection, injection[0], atol=1e-9)
    assert np.allclose(refs.sum(axis=0) - 3 * injection[0], 0.0, atol=1e-9)


@pytest.mark.parametrize("mode", list(Mode))
def test_level_set_membership(mode):
    w = synthesize_waveform(topo(mode), VDC, u_at(0.7, capability(mode, w_vdc(mode))), 200.0, CFG)
    levels = winding_level_set(mode, w.vdc_used)
    dist = np.abs(w.windings[..., None] - levels).min(axis=-1)
    assert dist.max() <= 1e-12 * VDC


def w_vdc(mode):
    return 400.0 if mode is Mode.BUCK_2L else VDC


def test_distinct_pole_levels():
    u = u_at(0.6, VDC / math.sqrt(3.0))
    for mode, n in ((Mode.B6_2L, 2), (Mode.TNPC_3L, 3), (Mode.ML_5L, 5)):
        w = synthesize_waveform(mode, VDC, u, 200.0, CFG)
        assert np.unique(np.round(w.poles, 9)).size <= n
    # star-connected two-level windings: the five line-to-neutral levels
    # (zero included, zero vectors exist)
    w2 = synthesize_waveform(Mode.B6_2L, VDC, u, 200.0, CFG)
    assert set(np.round(w2.windings.ravel() / VDC * 3).astype(int)) <= {-2, -1, 0, 1, 2}


def test_zero_reference_gives_zero_period_means():
    w = synthesize_waveform(Mode.B6_2L, VDC, DqVoltages(0.0, 0.0), 200.0, CFG)
    ratio = w.metadata["switching_ratio"]
    means = w.windings.reshape(3, ratio, CFG.samples_per_switching_period).mean(axis=2)
    assert np.abs(means).max() <= VDC / CFG.samples_per_switching_period


@pytest.mark.parametrize("m", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("mode", list(Mode))
def test_fundamental_bin_reproduces_reference(mode, m):
    u = u_at(m, capability(mode, w_vdc(mode)))
    w = synthesize_waveform(topo(mode), VDC, u, 250.0, PwmConfig())
    n = w.n_samples
    phasor = 2.0 / n * np.sum(w.windings[0] * np.exp(-1j * w.theta_e))
    assert abs(phasor) == pytest.approx(u.magnitude, rel=0.01)


def test_snap_reported_in_metadata():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        w = synthesize_waveform(Mode.B6_2L, VDC, DqVoltages(0.0, 100.0), 333.0, CFG)
    assert w.f_e_requested == 333.0
    assert 10_000.0 / w.f_e_used == w.metadata["switching_ratio"] == 30
    assert w.n_samples == 30 * CFG.samples_per_switching_period


def test_standstill_uses_lowest_resolved_frequency():
    w = synthesize_waveform(Mode.B6_2L, VDC, DqVoltages(0.0, 0.0), 0.0, CFG)
    assert w.f_e_used == 100.0


def test_low_switching_ratio_warns():
    with pytest.warns(UserWarning):
        synthesize_waveform(Mode.B6_2L, VDC, DqVoltages(0.0, 100.0), 2000.0, CFG)


def test_ow_h_overmodulation():
    with pytest.raises(Overmodulation):
        synthesize_waveform(Mode.OW_H, VDC, DqVoltages(0.0, 1.01 * VDC), 200.0, CFG)
    # above the star limit but inside the H-bridge one
    synthesize_waveform(Mode.OW_H, VDC, DqVoltages(0.0, 0.9 * VDC), 200.0, CFG)


@pytest.mark.parametrize("mode", list(Mode))
def test_periodicity_over_several_periods(mode):
    u = u_at(0.5, capability(mode, w_vdc(mode)))
    one = synthesize_waveform(topo(mode), VDC, u, 500.0, CFG)
    three = synthesize_waveform(topo(mode), VDC, u, 500.0,
                                PwmConfig(samples_per_switching_period=64, fundamental_periods=3))
    assert np.array_equal(three.windings, np.tile(one.windings, 3))
    assert three.n_samples == 3 * one.n_samples


def test_waveform_is_read_only():
    w = synthesize_waveform(Mode.B6_2L, VDC, DqVoltages(0.0, 100.0), 200.0, CFG)
    with pytest.raises(ValueError):
        w.windings[0, 0] = 1.0


def _peak_ripple(w):
    s = w.samples_per_switching_period
    x = w.windings.reshape(3, -1, s)
    return np.abs(x - x.mean(axis=2, keepdims=True)).max()


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.05, max_value=0.95), st.floats(min_value=0.0, max_value=2 * math.pi))
def test_tnpc_ripple_not_above_two_level(m, angle):
    u = u_at(m, VDC / math.sqrt(3.0), angle)
    r2 = _peak_ripple(synthesize_waveform(Mode.B6_2L, VDC, u, 200.0, CFG))
    r3 = _peak_ripple(synthesize_waveform(Mode.TNPC_3L, VDC, u, 200.0, CFG))
    assert r3 <= r2 + 1e-9


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(list(Mode)), st.floats(min_value=0.0, max_value=0.99),
       st.floats(min_value=0.0, max_value=2 * math.pi), st.sampled_from([50.0, 200.0, 700.0]))
def test_volt_second_balance_property(mode, m, angle, f_e):
    vdc = w_vdc(mode)
    u = u_at(m, capability(mode, vdc), angle)
    w = synthesize_waveform(topo(mode), VDC, u, f_e, CFG)
    s = CFG.samples_per_switching_period
    means = w.windings.reshape(3, -1, s).mean(axis=2)
    assert np.abs(means - w.period_reference).max() <= vdc / s


def test_waveform_csv_layout():
    w = synthesize_waveform(Mode.B6_2L, VDC, DqVoltages(0.0, 100.0), 1000.0,
                            PwmConfig(samples_per_switching_period=32))
    text = waveform_csv(w)
    lines = text.split("\n")
    assert lines[0] == "t_s,va_V,vb_V,vc_V"
    assert len(lines) == w.n_samples + 2 and lines[-1] == ""
    assert float(lines[1].split(",")[1]) == w.windings[0, 0]
