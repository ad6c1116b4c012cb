"""Switched winding-voltage synthesis for the supported inverter/motor modes.

All modes share one carrier scheme: regular-sampled (asymmetric) triangular
carriers, with the references sampled once per half carrier period. The
multilevel modes stack ``levels - 1`` phase-disposition carriers, which is
equivalent to comparing the band-local duty of the active band with one
carrier. Samples sit at the midpoints of ``samples_per_switching_period``
equal sub-intervals, and the high-sample count of each half period is
rounded with the residual of the preceding half carried over, so each
switching period's mean pole voltage matches the held references to within
half a sample.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidConfig, Overmodulation
from .machine import DqVoltages

TWO_PI_3 = 2.0 * math.pi / 3.0
# fundamental periods are resolved on at least this many Hz at standstill
MAX_SWITCHING_RATIO = 100


class Mode(enum.Enum):
    B6_2L = "B6_2L"
    TNPC_3L = "TNPC_3L"
    ML_5L = "ML_5L"
    BUCK_2L = "BUCK_2L"
    OW_H = "OW_H"
    OW_Y = "OW_Y"

    @classmethod
    def parse(cls, token: str) -> "Mode":
        try:
            return cls(token.strip().upper())
        except ValueError:
            names = ", ".join(m.value.lower() for m in cls)
            raise ValueError(f"unknown mode {token!r} (expected one of {names})") from None

    @property
    def pole_levels(self) -> int:
        return {Mode.TNPC_3L: 3, Mode.ML_5L: 5}.get(self, 2)


@dataclass(frozen=True)
class TopologyMode:
    """A mode plus its DC-link operating voltage (only BUCK_2L may differ
    from nominal)."""

    mode: Mode
    vdc_set: Optional[float] = None

    def dc_link(self, vdc_nominal: float) -> float:
        if self.vdc_set is None:
            return vdc_nominal
        if self.mode is not Mode.BUCK_2L:
            raise ValueError(f"{self.mode.value} runs at the nominal DC link")
        if not 0 < self.vdc_set <= vdc_nominal * (1 + 1e-12):
            raise ValueError(
                f"BUCK_2L vdc_set must lie in (0, {vdc_nominal}], got {self.vdc_set}"
            )
        return self.vdc_set


@dataclass(frozen=True)
class PwmConfig:
    f_sw: float = 10_000.0
    samples_per_switching_period: int = 128
    fundamental_periods: int = 1
    scheme: str = "SVPWM"

    def __post_init__(self):
        s = self.samples_per_switching_period
        if int(s) != s or s < 32 or s % 2:
            raise InvalidConfig(
                f"samples_per_switching_period must be an even integer >= 32, got {s}"
            )
        if int(self.fundamental_periods) != self.fundamental_periods or self.fundamental_periods < 1:
            raise InvalidConfig("fundamental_periods must be an integer >= 1")
        if not self.f_sw > 0:
            raise InvalidConfig("f_sw must be > 0")
        if self.scheme.upper() != "SVPWM":
            raise InvalidConfig(f"unsupported PWM scheme {self.scheme!r}")

    def switching_ratio(self, f_e: float) -> int:
        """Integer carrier periods per fundamental period for ``f_e``."""
        if f_e <= 0:
            return MAX_SWITCHING_RATIO
        ratio = int(round(self.f_sw / f_e))
        return min(max(ratio, 1), MAX_SWITCHING_RATIO)


@dataclass(frozen=True, eq=False)
class PhaseVoltageWaveform:
    sample_rate: float
    theta_e: np.ndarray           # (n,)
    windings: np.ndarray          # (3, n) winding voltages, V
    poles: np.ndarray             # (k, n) pole voltages against DC midpoint, V
    period_reference: np.ndarray  # (3, n_sw) held-reference mean per switching period
    vdc_used: float
    mode: Mode
    f_e_requested: float
    f_e_used: float
    samples_per_switching_period: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("theta_e", "windings", "poles", "period_reference"):
            getattr(self, name).setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.theta_e.size

    @property
    def t(self) -> np.ndarray:
        return (np.arange(self.n_samples) + 0.5) / self.sample_rate


def inverse_park(u_d, u_q, theta):
    theta = np.asarray(theta, dtype=float)
    return np.stack([
        u_d * np.cos(theta - k * TWO_PI_3) - u_q * np.sin(theta - k * TWO_PI_3)
        for k in range(3)
    ])


def svpwm_reference(u_ref: DqVoltages, f_e: float, vdc: float, t) -> np.ndarray:
    """Normalized pole references in [-1, 1] with min-max common-mode injection.

    Returns an array of shape ``(3,) + shape(t)``.
    """
    m = u_ref.magnitude / (vdc / math.sqrt(3.0))
    if m > 1.0 + 1e-12:
        raise Overmodulation(f"modulation index {m:.4f} exceeds the linear range")
    theta = 2.0 * math.pi * f_e * np.asarray(t, dtype=float)
    abc = inverse_park(u_ref.d, u_ref.q, theta)
    injection = -0.5 * (abc.max(axis=0) + abc.min(axis=0))
    return np.clip((abc + injection) * (2.0 / vdc), -1.0, 1.0)


def _levels_from_counts(b_rise, n_rise, b_fall, n_fall, half: int) -> np.ndarray:
    j = np.arange(half)
    # rising carrier: high at the start of the half; falling: at its end
    high_rise = j[None, None, :] < n_rise[:, :, None]
    high_fall = j[None, None, :] >= (half - n_fall)[:, :, None]
    lvl_rise = b_rise[:, :, None] + high_rise
    lvl_fall = b_fall[:, :, None] + high_fall
    levels = np.concatenate([lvl_rise, lvl_fall], axis=2)  # (legs, n_sw, 2*half)
    return levels.reshape(b_rise.shape[0], -1)


def _quantize_legs(x: np.ndarray, n_levels: int, half: int) -> np.ndarray:
    """Pole level per sample for held references ``x`` (level units in
    ``[0, n_levels-1]``, one column per half carrier period). Returns
    ``(legs, n)`` float levels."""
    band = np.clip(np.floor(x), 0, n_levels - 2)
    duty = x - band
    rise, fall = duty[:, 0::2], duty[:, 1::2]
    b_rise, b_fall = band[:, 0::2], band[:, 1::2]
    n_rise = np.round(rise * half)
    target = np.round((b_rise + rise + b_fall + fall) * half)
    n_fall = np.clip(target - half * (b_rise + b_fall) - n_rise, 0, half)
    return _levels_from_counts(b_rise, n_rise, b_fall, n_fall, half)


def _quantize_bridges(x: np.ndarray, half: int) -> np.ndarray:
    """Two-level legs of H-bridges: rows ``k`` and ``k + 3`` feed winding ``k``.

    The first leg of each bridge is quantized on its own; the second leg's
    period count follows from rounding the winding's target once, so the
    two legs' rounding errors do not add up across the winding.
    """
    first = np.clip(x[:3], 0.0, 1.0)
    second = np.clip(x[3:], 0.0, 1.0)
    zeros = np.zeros_like(first[:, 0::2])
    n1_rise = np.round(first[:, 0::2] * half)
    n1 = np.round((first[:, 0::2] + first[:, 1::2]) * half)
    n1_fall = np.clip(n1 - n1_rise, 0, half)
    winding = np.round((first[:, 0::2] + first[:, 1::2] - second[:, 0::2] - second[:, 1::2]) * half)
    n2 = np.clip(n1 - winding, 0, 2 * half)
    n2_rise = np.clip(np.round(second[:, 0::2] * half), n2 - half, np.minimum(n2, half))
    n2_fall = n2 - n2_rise
    lv1 = _levels_from_counts(zeros, n1_rise, zeros, n1_fall, half)
    lv2 = _levels_from_counts(zeros, n2_rise, zeros, n2_fall, half)
    return np.concatenate([lv1, lv2])


def winding_level_set(mode: Mode, vdc: float) -> np.ndarray:
    """Every voltage a winding can take in ``mode``."""
    if mode is Mode.OW_H:
        return np.array([-vdc, 0.0, vdc])
    step = vdc / (mode.pole_levels - 1)
    j = np.arange(-2 * (mode.pole_levels - 1), 2 * (mode.pole_levels - 1) + 1)
    return j * step / 3.0


def pole_level_set(mode: Mode, vdc: float) -> np.ndarray:
    n = mode.pole_levels
    return -vdc / 2.0 + np.arange(n) * vdc / (n - 1)


def synthesize_waveform(
    mode: TopologyMode | Mode,
    vdc_nom: float,
    u_ref: DqVoltages,
    f_e: float,
    cfg: PwmConfig = PwmConfig(),
) -> PhaseVoltageWaveform:
    """Switched winding voltages over ``cfg.fundamental_periods`` periods.

    ``f_e`` is snapped so that ``f_sw / f_e`` is an integer; the value used
    is reported as ``f_e_used``.
    """
    if isinstance(mode, Mode):
        mode = TopologyMode(mode)
    vdc = mode.dc_link(vdc_nom)
    kind = mode.mode
    if f_e < 0:
        raise InvalidConfig("f_e must be >= 0")
    if f_e > 0 and cfg.f_sw < 10.0 * f_e:
        warnings.warn(
            f"f_sw={cfg.f_sw:g} Hz is less than 10x the fundamental {f_e:.1f} Hz",
            stacklevel=2,
        )

    ratio = cfg.switching_ratio(f_e)
    f_used = cfg.f_sw / ratio
    s = cfg.samples_per_switching_period
    half = s // 2
    n_period = s * ratio
    fs = cfg.f_sw * s

    # one held reference per half carrier period, evaluated at the centre of
    # the half so the hold introduces no net phase delay
    t_half = (np.arange(2 * ratio) + 0.5) / (2.0 * cfg.f_sw)
    theta_half = 2.0 * math.pi * f_used * t_half
    if kind is Mode.OW_H:
        if u_ref.magnitude > vdc * (1 + 1e-12):
            raise Overmodulation(
                f"|u_ref|={u_ref.magnitude:.2f} V exceeds the H-bridge limit {vdc:.2f} V"
            )
        r = np.clip(inverse_park(u_ref.d, u_ref.q, theta_half) / vdc, -1.0, 1.0)
        refs = np.concatenate([r, -r])  # two legs per winding, opposite references
    else:
        refs = svpwm_reference(u_ref, f_used, vdc, t_half)

    n_levels = kind.pole_levels
    x = (refs + 1.0) * 0.5 * (n_levels - 1)
    if kind is Mode.OW_H:
        levels = _quantize_bridges(x, half)
    else:
        levels = _quantize_legs(x, n_levels, half)
    poles = -vdc / 2.0 + levels * (vdc / (n_levels - 1))

    pole_ref_half = refs * (vdc / 2.0)
    if kind is Mode.OW_H:
        windings = poles[:3] - poles[3:]
        ref_half = pole_ref_half[:3] - pole_ref_half[3:]
    else:
        windings = poles - poles.mean(axis=0)
        ref_half = pole_ref_half - pole_ref_half.mean(axis=0)
    period_ref = 0.5 * (ref_half[:, 0::2] + ref_half[:, 1::2])

    theta = 2.0 * math.pi * (np.arange(n_period) + 0.5) / n_period
    k = cfg.fundamental_periods
    if k > 1:
        theta = np.tile(theta, k)
        windings = np.tile(windings, k)
        poles = np.tile(poles, k)
        period_ref = np.tile(period_ref, k)

    return PhaseVoltageWaveform(
        sample_rate=fs,
        theta_e=theta,
        windings=windings,
        poles=poles,
        period_reference=period_ref,
        vdc_used=vdc,
        mode=kind,
        f_e_requested=f_e,
        f_e_used=f_used,
        samples_per_switching_period=s,
        metadata={
            "f_e_requested_Hz": f_e,
            "f_e_used_Hz": f_used,
            "switching_ratio": ratio,
            "vdc_V": vdc,
            "mode": kind.value,
        },
    )


def modulation_index(mode: Mode, u_ref: DqVoltages, vdc: float) -> float:
    limit = vdc if mode is Mode.OW_H else vdc / math.sqrt(3.0)
    return u_ref.magnitude / limit


def waveform_csv(w: PhaseVoltageWaveform) -> str:
    lines = ["t_s,va_V,vb_V,vc_V"]
    for t, a, b, c in zip(w.t.tolist(), *(row.tolist() for row in w.windings)):
        lines.append(f"{t!r},{a!r},{b!r},{c!r}")
    return "\n".join(lines) + "\n"
