"""Fundamental-frequency dq model of an interior PM synchronous machine.

Convention: amplitude-invariant Park transform, so dq quantities are phase
peak values and three-phase power is ``1.5 * (u_d*i_d + u_q*i_q)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ConfigError, Infeasible

MTPA_ANGLE_TOL = 1e-9  # rad
FW_CURRENT_TOL = 1e-6  # A
_FW_SCAN_POINTS = 801
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class MotorParameters:
    pole_pairs: int
    psi_pm: float          # V*s
    ld_fund: float         # H
    lq_fund: float         # H
    rs: float              # ohm
    i_max: float           # A peak
    rated_power: float     # W
    iron_hyst_coeff: float
    iron_eddy_coeff: float

    def __post_init__(self):
        if int(self.pole_pairs) != self.pole_pairs or self.pole_pairs < 1:
            raise ConfigError(f"pole_pairs must be an integer >= 1, got {self.pole_pairs}")
        for name in ("psi_pm", "ld_fund", "lq_fund", "rs", "i_max", "rated_power",
                     "iron_hyst_coeff", "iron_eddy_coeff"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be > 0, got {value}")


@dataclass(frozen=True)
class HarmonicParameterTables:
    """Frequency-dependent harmonic inductances and loss resistances.

    ``f_max=None`` selects the default band edge ``min(Nyquist, 25*f_sw)``
    once the waveform's sample rate is known.
    """

    grid: tuple
    ld_h: tuple
    lq_h: tuple
    rcu_h: tuple
    riron_h: tuple
    rmag_h: tuple
    k_cu: float = 1.0
    k_iron: float = 1.0
    k_mag: float = 1.0
    f_min: float = 2500.0
    f_max: Optional[float] = None

    def __post_init__(self):
        for name in ("grid", "ld_h", "lq_h", "rcu_h", "riron_h", "rmag_h"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        grid = np.asarray(self.grid)
        if grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ConfigError("harmonic table grid must be strictly increasing with >= 2 samples")
        for name in ("ld_h", "lq_h", "rcu_h", "riron_h", "rmag_h"):
            values = np.asarray(getattr(self, name))
            if values.shape != grid.shape:
                raise ConfigError(f"{name} has {values.size} entries, grid has {grid.size}")
            if np.any(~np.isfinite(values)) or np.any(values <= 0):
                raise ConfigError(f"{name} must be > 0 everywhere")
        for name in ("k_cu", "k_iron", "k_mag"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.f_min < 0:
            raise ConfigError("f_min must be >= 0")
        if self.f_max is not None:
            if not self.f_min < self.f_max:
                raise ConfigError(f"f_min ({self.f_min}) must be < f_max ({self.f_max})")
            if self.f_min < grid[0] or self.f_max > grid[-1]:
                raise ConfigError(
                    f"grid [{grid[0]}, {grid[-1]}] Hz does not cover band "
                    f"[{self.f_min}, {self.f_max}] Hz"
                )

    def band(self, sample_rate: float, f_sw: float) -> tuple[float, float]:
        if self.f_max is not None:
            return self.f_min, self.f_max
        return self.f_min, min(sample_rate / 2.0, 25.0 * f_sw)

    def with_band(self, f_min: float, f_max: Optional[float]) -> "HarmonicParameterTables":
        return replace(self, f_min=f_min, f_max=f_max)


@dataclass(frozen=True)
class OperatingPoint:
    torque: float  # N*m
    speed: float   # rad/s mechanical

    def __post_init__(self):
        if not self.speed >= 0:
            raise ValueError(f"speed must be >= 0, got {self.speed}")


@dataclass(frozen=True)
class DqCurrents:
    d: float
    q: float

    @property
    def magnitude(self) -> float:
        return math.hypot(self.d, self.q)

    def scaled(self, factor: float) -> "DqCurrents":
        return DqCurrents(self.d * factor, self.q * factor)


@dataclass(frozen=True)
class DqVoltages:
    d: float
    q: float

    @property
    def magnitude(self) -> float:
        return math.hypot(self.d, self.q)

    def scaled(self, factor: float) -> "DqVoltages":
        return DqVoltages(self.d * factor, self.q * factor)


@dataclass(frozen=True)
class FundamentalLosses:
    copper: float
    iron: float


def electrical_frequency(op: OperatingPoint, pole_pairs: int) -> float:
    return op.speed * pole_pairs / (2.0 * math.pi)


def torque_from_currents(m: MotorParameters, i: DqCurrents) -> float:
    if i.magnitude > m.i_max * (1.0 + 1e-9):
        warnings.warn(
            f"current magnitude {i.magnitude:.1f} A exceeds i_max {m.i_max:.1f} A",
            stacklevel=2,
        )
    return 1.5 * m.pole_pairs * (m.psi_pm * i.q + (m.ld_fund - m.lq_fund) * i.d * i.q)


def _current_for_angle(m: MotorParameters, torque: float, gamma: float) -> float:
    """Smallest magnitude at current angle ``gamma`` (i_d = -I sin, i_q = I cos)
    that produces ``torque`` (> 0); ``inf`` if the angle cannot."""
    s, c = math.sin(gamma), math.cos(gamma)
    t_norm = torque / (1.5 * m.pole_pairs)
    a = -(m.ld_fund - m.lq_fund) * s * c
    b = m.psi_pm * c
    if abs(a) < 1e-300:
        return t_norm / b if b > 0 else math.inf
    disc = b * b + 4.0 * a * t_norm
    if disc < 0:
        return math.inf
    root = math.sqrt(disc)
    # numerically stable form of (-b + root) / (2a)
    candidate = 2.0 * t_norm / (b + root) if b + root > 0 else math.inf
    return candidate if candidate > 0 else math.inf


def mtpa_angle_interval(m: MotorParameters) -> tuple[float, float]:
    delta = m.ld_fund - m.lq_fund
    edge = math.pi / 2.0 - 1e-6
    if delta < 0:
        return 0.0, edge
    if delta > 0:
        return -edge, 0.0
    return 0.0, 0.0


def golden_section_min(f, lo: float, hi: float, tol: float) -> float:
    """Minimizer of a unimodal ``f`` on ``[lo, hi]`` to within ``tol``."""
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def mtpa_currents(m: MotorParameters, torque: float) -> DqCurrents:
    """Minimum-magnitude current vector producing ``torque``.

    Negative torque is served by mirroring i_q.
    """
    if torque == 0:
        return DqCurrents(0.0, 0.0)
    sign = 1.0 if torque > 0 else -1.0
    t_abs = abs(torque)
    lo, hi = mtpa_angle_interval(m)
    if lo == hi:
        gamma = 0.0
    else:
        gamma = golden_section_min(lambda g: _current_for_angle(m, t_abs, g), lo, hi,
                                   MTPA_ANGLE_TOL)
    mag = _current_for_angle(m, t_abs, gamma)
    if not mag <= m.i_max:
        raise Infeasible(
            f"torque {torque:.3f} N*m needs {mag:.1f} A, above i_max {m.i_max:.1f} A"
        )
    return DqCurrents(-mag * math.sin(gamma), sign * mag * math.cos(gamma))


def steady_state_voltages(m: MotorParameters, i: DqCurrents, f_e: float) -> DqVoltages:
    w = 2.0 * math.pi * f_e
    u_d = m.rs * i.d - w * m.lq_fund * i.q
    u_q = m.rs * i.q + w * (m.ld_fund * i.d + m.psi_pm)
    return DqVoltages(u_d, u_q)


def _iq_on_torque_curve(m: MotorParameters, torque: float, i_d: float) -> float:
    flux = m.psi_pm + (m.ld_fund - m.lq_fund) * i_d
    return torque / (1.5 * m.pole_pairs * flux)


def _flux_singularity(m: MotorParameters) -> float:
    """Most negative i_d before the torque-producing flux term changes sign."""
    delta = m.ld_fund - m.lq_fund
    if delta < 0:
        return m.psi_pm / delta  # negative
    return -math.inf


def field_weakening_currents(
    m: MotorParameters, torque: float, f_e: float, v_limit: float
) -> DqCurrents:
    """Currents that meet ``torque`` with ``|u| <= v_limit`` and ``|i| <= i_max``.

    Returns the MTPA vector if it already respects the voltage limit, otherwise
    the point on the constant-torque curve with the least field-weakening
    current that reaches the voltage limit. Raises ``Infeasible`` when the
    current disk and the voltage ellipse do not intersect on the torque curve.
    """
    if v_limit < 0:
        raise ValueError("v_limit must be >= 0")
    sign = -1.0 if torque < 0 else 1.0
    t_abs = abs(torque)
    base = mtpa_currents(m, t_abs)

    def volt(i_d: float) -> float:
        i_q = _iq_on_torque_curve(m, t_abs, i_d)
        return steady_state_voltages(m, DqCurrents(i_d, sign * i_q), f_e).magnitude

    def mirrored(i: DqCurrents) -> DqCurrents:
        return DqCurrents(i.d, sign * i.q)

    if volt(base.d) <= v_limit:
        return mirrored(base)

    # Lowest i_d on the torque curve that still respects the current limit;
    # |i| grows monotonically as i_d moves away from the MTPA point.
    floor = max(-m.i_max, _flux_singularity(m) * (1.0 - 1e-9))

    def current_excess(i_d: float) -> float:
        return math.hypot(i_d, _iq_on_torque_curve(m, t_abs, i_d)) - m.i_max

    if current_excess(floor) <= 0:
        id_lo = floor
    else:
        a, b = floor, base.d  # excess(a) > 0, excess(b) <= 0
        while b - a > FW_CURRENT_TOL * 1e-3:
            mid = 0.5 * (a + b)
            if current_excess(mid) > 0:
                a = mid
            else:
                b = mid
        id_lo = b
    if id_lo >= base.d:
        raise Infeasible("no field-weakening headroom inside the current limit")

    grid = np.linspace(base.d, id_lo, _FW_SCAN_POINTS)
    volts = np.array([volt(x) for x in grid])
    feasible = np.nonzero(volts <= v_limit)[0]
    if feasible.size:
        first = int(feasible[0])
        a, b = grid[first - 1], grid[first]
    else:
        # the feasible interval may be narrower than the scan spacing
        k = int(np.argmin(volts))
        lo = grid[min(k + 1, grid.size - 1)]
        hi = grid[max(k - 1, 0)]
        id_best = golden_section_min(volt, lo, hi, FW_CURRENT_TOL * 1e-3)
        if volt(id_best) > v_limit:
            raise Infeasible(
                f"torque {torque:.3f} N*m at {f_e:.1f} Hz needs more than {v_limit:.1f} V"
            )
        a, b = hi, id_best
    # a: infeasible (closer to MTPA), b: feasible
    while abs(a - b) > FW_CURRENT_TOL:
        mid = 0.5 * (a + b)
        if volt(mid) <= v_limit:
            b = mid
        else:
            a = mid
    i_q = _iq_on_torque_curve(m, t_abs, b)
    return DqCurrents(b, sign * i_q)


def fundamental_losses(m: MotorParameters, i: DqCurrents, f_e: float) -> FundamentalLosses:
    copper = 1.5 * m.rs * (i.d * i.d + i.q * i.q)
    psi_sq = (m.ld_fund * i.d + m.psi_pm) ** 2 + (m.lq_fund * i.q) ** 2
    iron = (m.iron_hyst_coeff * f_e + m.iron_eddy_coeff * f_e * f_e) * psi_sq
    return FundamentalLosses(copper=copper, iron=iron)

