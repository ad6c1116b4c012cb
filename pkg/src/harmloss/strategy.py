"""Per-operating-point mode feasibility, DC-link optimization and mode selection."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigError, Infeasible, NoFeasibleMode
from .harmonic import total_harmonic
from .inverter import BuckParameters, SwitchParameters, buck_losses, inverter_losses
from .machine import (
    DqCurrents,
    DqVoltages,
    HarmonicParameterTables,
    MotorParameters,
    OperatingPoint,
    electrical_frequency,
    field_weakening_currents,
    fundamental_losses,
    steady_state_voltages,
)
from .modulation import Mode, PwmConfig, TopologyMode, inverse_park, synthesize_waveform
from .spectrum import park_transform, ripple_spectrum

SQRT3 = math.sqrt(3.0)
DEFAULT_CAPABILITY_FACTOR = {Mode.OW_H: SQRT3}
LOSS_COLUMNS = ("p_cu_f", "p_fe_f", "p_cu_h", "p_fe_h", "p_mag_h",
                "p_inv_cond", "p_inv_sw", "p_dcdc")


def voltage_capability(mode: Mode, vdc: float, factor: Optional[float] = None) -> float:
    """Peak phase-voltage limit of ``mode`` at DC-link voltage ``vdc``.

    Star-connected modes reach ``vdc/sqrt(3)`` with SVPWM. The open-winding
    H-mode applies up to ``vdc`` across each winding without zero-sequence
    voltage, i.e. ``sqrt(3)`` times the star value.
    """
    if vdc <= 0:
        raise ValueError("vdc must be > 0")
    if factor is None:
        factor = DEFAULT_CAPABILITY_FACTOR.get(mode, 1.0)
    return factor * vdc / SQRT3


@dataclass(frozen=True)
class ModeConstraint:
    mode: Mode
    max_phase_current: float
    vdc_range: Optional[tuple] = None
    voltage_capability_factor: Optional[float] = None

    def __post_init__(self):
        if not self.max_phase_current > 0:
            raise ConfigError(f"{self.mode.value}: max_phase_current must be > 0")
        if self.vdc_range is not None:
            lo, hi = self.vdc_range
            if not 0 < lo <= hi:
                raise ConfigError(f"{self.mode.value}: vdc_range must be ordered and > 0")
            object.__setattr__(self, "vdc_range", (float(lo), float(hi)))
        f = self.voltage_capability_factor
        if f is not None and not f > 0:
            raise ConfigError(f"{self.mode.value}: voltage_capability_factor must be > 0")


@dataclass(frozen=True)
class LossBreakdown:
    cu_f: float = 0.0
    fe_f: float = 0.0
    cu_h: float = 0.0
    fe_h: float = 0.0
    mag_h: float = 0.0
    inv_cond: float = 0.0
    inv_sw: float = 0.0
    dcdc: float = 0.0

    @property
    def fundamental(self) -> float:
        return self.cu_f + self.fe_f

    @property
    def harmonic(self) -> float:
        return self.cu_h + self.fe_h + self.mag_h

    @property
    def inverter(self) -> float:
        return self.inv_cond + self.inv_sw

    @property
    def total(self) -> float:
        return self.fundamental + self.harmonic + self.inverter + self.dcdc

    def values(self) -> tuple:
        return (self.cu_f, self.fe_f, self.cu_h, self.fe_h, self.mag_h,
                self.inv_cond, self.inv_sw, self.dcdc)

    def scaled(self, factor: float) -> "LossBreakdown":
        return LossBreakdown(*(v * factor for v in self.values()))

    def as_dict(self) -> dict:
        return dict(zip(LOSS_COLUMNS, self.values()))


@dataclass(frozen=True)
class ModeDecision:
    op: OperatingPoint
    mode: Mode
    vdc_set: float
    feasible: bool
    losses: Optional[LossBreakdown] = None
    currents: Optional[DqCurrents] = None
    voltages: Optional[DqVoltages] = None
    f_e_used: Optional[float] = None
    reason: str = ""

    def scaled(self, factor: float) -> "ModeDecision":
        if self.losses is None:
            return self
        return replace(self, losses=self.losses.scaled(factor))


@dataclass(frozen=True)
class DriveSystem:
    """Everything a single operating-point evaluation needs."""

    motor: MotorParameters
    tables: HarmonicParameterTables
    switch: SwitchParameters
    buck: BuckParameters
    constraints: tuple
    vdc_nom: float = 800.0
    pwm: PwmConfig = field(default_factory=PwmConfig)
    dc_link_step: float = 10.0
    dc_link_margin: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not self.vdc_nom > 0:
            raise ConfigError("vdc_nom must be > 0")
        if not self.dc_link_step > 0:
            raise ConfigError("dc_link_step must be > 0")
        seen = set()
        for c in self.constraints:
            if c.mode in seen:
                raise ConfigError(f"mode {c.mode.value} constrained twice")
            seen.add(c.mode)
            if c.mode is Mode.BUCK_2L and c.vdc_range is not None and c.vdc_range[0] > self.vdc_nom:
                raise ConfigError("BUCK_2L vdc_range lies above vdc_nom")
        if not self.constraints:
            raise ConfigError("at least one mode constraint is required")

    @property
    def modes(self) -> tuple:
        return tuple(c.mode for c in self.constraints)

    def constraint(self, mode: Mode) -> ModeConstraint:
        for c in self.constraints:
            if c.mode is mode:
                return c
        raise KeyError(f"mode {mode.value} is not configured")

    def with_modes(self, modes: Iterable[Mode]) -> "DriveSystem":
        modes = list(modes)
        missing = [m.value for m in modes if m not in self.modes]
        if missing:
            raise ConfigError(f"modes not configured: {', '.join(missing)}")
        return replace(self, constraints=tuple(self.constraint(m) for m in modes))


def mode_currents(op: OperatingPoint, system: DriveSystem, mode: Mode,
                  vdc: Optional[float] = None) -> DqCurrents:
    """Currents for ``op`` under ``mode``'s voltage and current limits."""
    c = system.constraint(mode)
    vdc = system.vdc_nom if vdc is None else vdc
    f_e = electrical_frequency(op, system.motor.pole_pairs)
    v_lim = voltage_capability(mode, vdc, c.voltage_capability_factor)
    i = field_weakening_currents(system.motor, op.torque, f_e, v_lim)
    if i.magnitude > c.max_phase_current * (1 + 1e-9):
        raise Infeasible(
            f"{mode.value}: {i.magnitude:.1f} A exceeds the mode limit {c.max_phase_current:.1f} A"
        )
    return i


def feasible_modes(op: OperatingPoint, system: DriveSystem) -> list:
    out = []
    for mode in system.modes:
        try:
            mode_currents(op, system, mode)
        except Infeasible:
            continue
        out.append(mode)
    return out


def _midpoint_share(poles: np.ndarray, theta: np.ndarray, i: DqCurrents) -> float:
    i_abc = inverse_park(i.d, i.q, theta)
    weight = i_abc**2
    total = weight.sum()
    if total == 0:
        return 0.0
    return float((weight * (np.abs(poles) < 1e-9)).sum() / total)


def evaluate_mode(
    op: OperatingPoint,
    system: DriveSystem,
    mode: Mode,
    vdc_set: Optional[float] = None,
    currents: Optional[DqCurrents] = None,
) -> ModeDecision:
    """Full loss breakdown of ``op`` in ``mode`` (raises ``Infeasible``)."""
    m = system.motor
    vdc = system.vdc_nom if vdc_set is None else vdc_set
    if currents is None:
        currents = mode_currents(op, system, mode, system.vdc_nom)
    f_e = electrical_frequency(op, m.pole_pairs)
    u = steady_state_voltages(m, currents, f_e)
    topo = TopologyMode(mode, vdc_set if mode is Mode.BUCK_2L else None)
    wave = synthesize_waveform(topo, system.vdc_nom, u, f_e, system.pwm)
    spec = ripple_spectrum(park_transform(wave), u, system.tables, system.pwm.f_sw)
    harm = total_harmonic(spec, system.tables)
    fund = fundamental_losses(m, currents, f_e)

    share = None
    if mode is Mode.TNPC_3L:
        share = _midpoint_share(wave.poles, wave.theta_e, currents)
    inv = inverter_losses(mode, vdc, currents.magnitude / math.sqrt(2.0), system.pwm.f_sw,
                          system.switch, midpoint_share=share)
    dcdc = 0.0
    if mode is Mode.BUCK_2L:
        p_mech = op.torque * op.speed
        drive_losses = fund.copper + fund.iron + harm.total + inv.conduction + inv.switching
        dcdc = buck_losses(system.vdc_nom, vdc, abs(p_mech + drive_losses), system.buck)
    losses = LossBreakdown(
        cu_f=fund.copper, fe_f=fund.iron,
        cu_h=harm.copper, fe_h=harm.iron, mag_h=harm.magnet,
        inv_cond=inv.conduction, inv_sw=inv.switching, dcdc=dcdc,
    )
    return ModeDecision(op=op, mode=mode, vdc_set=vdc, feasible=True, losses=losses,
                        currents=currents, voltages=u, f_e_used=wave.f_e_used)


def dc_link_grid(required: float, lo: float, hi: float, step: float) -> list:
    """Candidate DC-link voltages from ``max(required, lo)`` to ``hi``."""
    start = max(required, lo)
    if start >= hi:
        return [hi]
    n = int(math.floor((hi - start) / step + 1e-9))
    grid = [start + k * step for k in range(n + 1)]
    if hi - grid[-1] > 1e-9 * hi:
        grid.append(hi)
    else:
        grid[-1] = hi
    return grid


def dc_link_sweep(op: OperatingPoint, system: DriveSystem,
                  vdc_range: Optional[tuple] = None,
                  step: Optional[float] = None) -> list:
    """``ModeDecision`` of BUCK_2L at every candidate DC-link voltage."""
    c = system.constraint(Mode.BUCK_2L)
    step = system.dc_link_step if step is None else step
    if not step > 0:
        raise ValueError("step must be > 0")
    lo, hi = vdc_range or c.vdc_range or (0.25 * system.vdc_nom, system.vdc_nom)
    hi = min(hi, system.vdc_nom)
    currents = mode_currents(op, system, Mode.BUCK_2L, system.vdc_nom)
    f_e = electrical_frequency(op, system.motor.pole_pairs)
    u = steady_state_voltages(system.motor, currents, f_e)
    per_volt = voltage_capability(Mode.BUCK_2L, 1.0, c.voltage_capability_factor)
    required = u.magnitude / per_volt * (1.0 + system.dc_link_margin)
    return [evaluate_mode(op, system, Mode.BUCK_2L, vdc_set=v, currents=currents)
            for v in dc_link_grid(required, lo, hi, step)]


def dc_link_objective(d: ModeDecision) -> float:
    return d.losses.harmonic + d.losses.inverter + d.losses.dcdc


def _best_dc_link(sweep: Sequence[ModeDecision]) -> ModeDecision:
    best = sweep[0]
    for d in sweep[1:]:
        if dc_link_objective(d) < dc_link_objective(best):
            best = d
    return best


def optimize_dc_link(op: OperatingPoint, system: DriveSystem,
                     vdc_range: Optional[tuple] = None,
                     step: Optional[float] = None) -> float:
    """Loss-minimal BUCK_2L DC-link voltage (ties go to the lower voltage)."""
    return _best_dc_link(dc_link_sweep(op, system, vdc_range, step)).vdc_set


def best_in_mode(op: OperatingPoint, system: DriveSystem, mode: Mode) -> ModeDecision:
    """Evaluation of ``op`` in one mode; infeasibility is reported, not raised."""
    try:
        if mode is Mode.BUCK_2L:
            return _best_dc_link(dc_link_sweep(op, system))
        return evaluate_mode(op, system, mode)
    except Infeasible as exc:
        return ModeDecision(op=op, mode=mode, vdc_set=system.vdc_nom, feasible=False,
                            reason=str(exc))


def pick_best(decisions: Sequence[ModeDecision]) -> ModeDecision:
    """Lowest total loss; the first of equal candidates wins."""
    candidates = [d for d in decisions if d.feasible]
    if not candidates:
        raise NoFeasibleMode("no feasible mode")
    best = candidates[0]
    for d in candidates[1:]:
        if d.losses.total < best.losses.total:
            best = d
    return best


def select_mode(op: OperatingPoint, system: DriveSystem) -> ModeDecision:
    decisions = [best_in_mode(op, system, mode) for mode in system.modes]
    try:
        return pick_best(decisions)
    except NoFeasibleMode:
        raise NoFeasibleMode(
            f"no feasible mode at torque={op.torque:.3f} N*m, speed={op.speed:.3f} rad/s"
        ) from None


def lattice(torques: Sequence[float], speeds: Sequence[float]) -> list:
    """Operating points in speed-major order."""
    return [OperatingPoint(float(t), float(s)) for s in speeds for t in torques]


def parallel_map(fn, items: Sequence, threads: int = 1) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def build_loss_map(torques: Sequence[float], speeds: Sequence[float], mode: Mode,
                   system: DriveSystem, threads: int = 1) -> list:
    points = lattice(torques, speeds)
    if not points:
        raise ValueError("lattice must be non-empty")
    return parallel_map(lambda op: best_in_mode(op, system, mode), points, threads)


def _select_or_mark(op: OperatingPoint, system: DriveSystem) -> ModeDecision:
    try:
        return select_mode(op, system)
    except NoFeasibleMode as exc:
        return ModeDecision(op=op, mode=system.modes[0], vdc_set=system.vdc_nom,
                            feasible=False, reason=str(exc))


def build_decision_map(torques: Sequence[float], speeds: Sequence[float],
                       system: DriveSystem, threads: int = 1) -> list:
    points = lattice(torques, speeds)
    return parallel_map(lambda op: _select_or_mark(op, system), points, threads)


MAP_HEADER = ("torque_Nm", "speed_radps", "mode", "feasible") + LOSS_COLUMNS + ("p_total",)


def loss_map_rows(decisions: Iterable[ModeDecision], with_vdc: bool = False) -> list:
    rows = []
    for d in decisions:
        row = [repr(d.op.torque), repr(d.op.speed), d.mode.value, "1" if d.feasible else "0"]
        if d.feasible:
            row += [repr(v) for v in d.losses.values()] + [repr(d.losses.total)]
        else:
            row += [""] * (len(LOSS_COLUMNS) + 1)
        if with_vdc:
            row.append(repr(d.vdc_set) if d.feasible else "")
        rows.append(row)
    return rows


def loss_map_csv(decisions: Iterable[ModeDecision], with_vdc: bool = False) -> str:
    header = list(MAP_HEADER) + (["vdc_set_V"] if with_vdc else [])
    lines = [",".join(header)]
    lines += [",".join(r) for r in loss_map_rows(decisions, with_vdc)]
    return "\n".join(lines) + "\n"
