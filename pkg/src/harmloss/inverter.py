"""First-order conduction and switching losses of the inverter and buck stages."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError, InvalidRatio
from .modulation import Mode


@dataclass(frozen=True)
class SwitchParameters:
    r_on: float      # ohm
    e_sw_ref: float  # J per switching period (turn-on + turn-off) at v_ref, i_ref
    v_ref: float     # V
    i_ref: float     # A

    def __post_init__(self):
        for name in ("r_on", "e_sw_ref", "v_ref", "i_ref"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"switch {name} must be > 0")


@dataclass(frozen=True)
class BuckParameters:
    inductor_dcr: float  # ohm
    switch: SwitchParameters
    f_sw_dc: float       # Hz

    def __post_init__(self):
        if not self.inductor_dcr > 0 or not self.f_sw_dc > 0:
            raise ConfigError("buck inductor_dcr and f_sw_dc must be > 0")


@dataclass(frozen=True)
class InverterLosses:
    conduction: float
    switching: float


def series_devices(mode: Mode, midpoint_share: Optional[float] = None) -> float:
    """Devices in the conduction path, averaged over the current."""
    if mode is Mode.TNPC_3L:
        # outer path: one device, midpoint path: two
        share = 0.5 if midpoint_share is None else min(max(midpoint_share, 0.0), 1.0)
        return 1.0 + share
    if mode in (Mode.OW_H, Mode.ML_5L):
        return 2.0
    return 1.0


def commutation_voltage(mode: Mode, vdc: float) -> float:
    """Voltage step a device commutates against."""
    return vdc / (mode.pole_levels - 1)


def inverter_losses(
    mode: Mode,
    vdc: float,
    i_rms_phase: float,
    f_sw: float,
    sp: SwitchParameters,
    midpoint_share: Optional[float] = None,
) -> InverterLosses:
    """Three-phase conduction and switching losses.

    ``midpoint_share`` is the current-squared-weighted fraction of time the
    TNPC midpoint path conducts; if omitted, an even split is assumed.
    """
    if i_rms_phase <= 0:
        return InverterLosses(0.0, 0.0)
    n = series_devices(mode, midpoint_share)
    conduction = n * 3.0 * i_rms_phase**2 * sp.r_on
    i_avg = i_rms_phase * 2.0 * math.sqrt(2.0) / math.pi
    switching = (3.0 * f_sw * sp.e_sw_ref * (commutation_voltage(mode, vdc) / sp.v_ref)
                 * (i_avg / sp.i_ref))
    if mode is Mode.OW_H:
        switching *= 2.0
    return InverterLosses(conduction, switching)


def buck_losses(v_in: float, v_out: float, p_transfer: float, bp: BuckParameters) -> float:
    """Synchronous buck losses; zero in bypass (``v_out == v_in``)."""
    if not v_out > 0:
        raise InvalidRatio(f"buck output voltage must be > 0, got {v_out}")
    if v_out > v_in * (1 + 1e-12):
        raise InvalidRatio(f"buck output {v_out:g} V exceeds input {v_in:g} V")
    if p_transfer < 0:
        raise ValueError("p_transfer must be >= 0")
    if v_out >= v_in or p_transfer == 0:
        return 0.0
    i_l = p_transfer / v_out
    sw = bp.switch
    # high side conducts for D, low side for 1 - D: together one r_on for the full period
    conduction = i_l**2 * (bp.inductor_dcr + sw.r_on)
    switching = bp.f_sw_dc * sw.e_sw_ref * (v_in / sw.v_ref) * (i_l / sw.i_ref)
    return conduction + switching
