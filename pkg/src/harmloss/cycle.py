"""Drive-cycle ingestion, road-load model and cycle energy accounting."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, InfeasiblePoint, MalformedRow, NegativeSpeed, NoFeasibleMode, NonMonotonicTime
from .machine import OperatingPoint
from .strategy import (
    LOSS_COLUMNS,
    DriveSystem,
    LossBreakdown,
    ModeDecision,
    best_in_mode,
    lattice,
    parallel_map,
    select_mode,
)

G = 9.80665
EDRIVE_CATEGORIES = (
    ("fundamental_copper", "p_cu_f"),
    ("fundamental_iron", "p_fe_f"),
    ("harmonic_copper", "p_cu_h"),
    ("harmonic_iron", "p_fe_h"),
    ("harmonic_magnet", "p_mag_h"),
    ("inverter_conduction", "p_inv_cond"),
    ("inverter_switching", "p_inv_sw"),
    ("dcdc", "p_dcdc"),
)
VEHICLE_CATEGORIES = ("road_load", "edrive", "battery", "driveline", "auxiliary")


@dataclass(frozen=True)
class VehicleParameters:
    mass: float
    cd_a: float
    c_rr: float
    wheel_radius: float
    gear_ratio: float
    driveline_efficiency: float
    air_density: float = 1.204
    # not modeled, integrated as constant powers over the cycle
    battery_loss_power: float = 0.0
    auxiliary_power: float = 0.0

    def __post_init__(self):
        for name in ("mass", "cd_a", "c_rr", "wheel_radius", "gear_ratio",
                     "driveline_efficiency", "air_density"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"vehicle {name} must be > 0")
        if self.driveline_efficiency > 1:
            raise ConfigError("vehicle driveline_efficiency must be <= 1")
        if self.battery_loss_power < 0 or self.auxiliary_power < 0:
            raise ConfigError("constant vehicle loss powers must be >= 0")


@dataclass(frozen=True, eq=False)
class DriveCycle:
    t: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if t.shape != v.shape or t.ndim != 1 or t.size < 2:
            raise ValueError("a drive cycle needs >= 2 (t, v) samples")
        bad = np.nonzero(np.diff(t) <= 0)[0]
        if bad.size:
            raise NonMonotonicTime(f"time not strictly increasing at sample {bad[0] + 1}")
        neg = np.nonzero(v < 0)[0]
        if neg.size:
            raise NegativeSpeed(f"negative speed at sample {neg[0]}")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)

    @property
    def samples(self) -> list:
        return list(zip(self.t.tolist(), self.v.tolist()))

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def repeated(self, times: int = 2) -> "DriveCycle":
        """The cycle played ``times`` times back to back, same sample spacing
        at the seams as at the start."""
        gap = self.t[1] - self.t[0]
        span = self.t[-1] - self.t[0] + gap
        t = np.concatenate([self.t + k * span for k in range(times)])
        return DriveCycle(t, np.tile(self.v, times))


def ingest_cycle(text: str) -> DriveCycle:
    lines = text.splitlines()
    if not lines or lines[0].strip().lstrip("﻿") != "t_s,v_mps":
        raise MalformedRow(1, "expected header 't_s,v_mps'")
    t, v = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise MalformedRow(lineno, f"expected 2 fields, got {len(parts)}")
        try:
            tt, vv = float(parts[0]), float(parts[1])
        except ValueError:
            raise MalformedRow(lineno, f"non-numeric value in {line!r}") from None
        if not (math.isfinite(tt) and math.isfinite(vv)):
            raise MalformedRow(lineno, "non-finite value")
        if t and tt <= t[-1]:
            raise NonMonotonicTime(f"line {lineno}: t={tt:g} s does not increase")
        if vv < 0:
            raise NegativeSpeed(f"line {lineno}: v={vv:g} m/s")
        t.append(tt)
        v.append(vv)
    if len(t) < 2:
        raise MalformedRow(len(lines), "a drive cycle needs at least 2 rows")
    return DriveCycle(np.array(t), np.array(v))


def cycle_csv(cycle: DriveCycle) -> str:
    rows = ["t_s,v_mps"] + [f"{t!r},{v!r}" for t, v in cycle.samples]
    return "\n".join(rows) + "\n"


def accelerations(cycle: DriveCycle) -> np.ndarray:
    """Central differences inside, one-sided at both ends."""
    t, v = cycle.t, cycle.v
    a = np.empty_like(v)
    a[1:-1] = (v[2:] - v[:-2]) / (t[2:] - t[:-2])
    a[0] = (v[1] - v[0]) / (t[1] - t[0])
    a[-1] = (v[-1] - v[-2]) / (t[-1] - t[-2])
    return a


@dataclass(frozen=True)
class RoadLoad:
    force: float     # N at the wheel, traction positive
    aero: float
    rolling: float
    op: OperatingPoint


def road_load(v: float, a: float, veh: VehicleParameters) -> RoadLoad:
    if v < 0:
        raise ValueError("v must be >= 0")
    aero = 0.5 * veh.air_density * veh.cd_a * v * v
    rolling = veh.c_rr * veh.mass * G
    force = veh.mass * a + aero + rolling
    wheel_torque = force * veh.wheel_radius
    if force >= 0:
        torque = wheel_torque / (veh.gear_ratio * veh.driveline_efficiency)
    else:
        torque = wheel_torque * veh.driveline_efficiency / veh.gear_ratio
    speed = v * veh.gear_ratio / veh.wheel_radius
    return RoadLoad(force, aero, rolling, OperatingPoint(torque, speed))


def road_load_operating_point(v: float, a: float, veh: VehicleParameters) -> OperatingPoint:
    return road_load(v, a, veh).op


def trapezoid_weights(t: np.ndarray) -> np.ndarray:
    dt = np.diff(t)
    w = np.zeros_like(t)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


@dataclass
class CycleReport:
    energies_wh: dict
    edrive_shares_pct: dict
    vehicle_shares_pct: dict
    mode_time_share_pct: dict
    duration_s: float
    driving_time_s: float
    empty: bool
    interpolated: bool
    lattice_shape: Optional[tuple] = None
    exact_fallback_samples: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def edrive_total_wh(self) -> float:
        return sum(self.energies_wh[name] for name, _ in EDRIVE_CATEGORIES)

    def to_dict(self) -> dict:
        return {
            "energies_Wh": self.energies_wh,
            "edrive_total_Wh": self.edrive_total_wh,
            "edrive_shares_pct": self.edrive_shares_pct,
            "vehicle_shares_pct": self.vehicle_shares_pct,
            "mode_time_share_pct": self.mode_time_share_pct,
            "duration_s": self.duration_s,
            "driving_time_s": self.driving_time_s,
            "empty": self.empty,
            "loss_map_interpolation": self.interpolated,
            "lattice_shape": list(self.lattice_shape) if self.lattice_shape else None,
            "exact_fallback_samples": self.exact_fallback_samples,
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def long_csv(self) -> str:
        rows = ["category,energy_Wh,share_pct"]
        for name, _ in EDRIVE_CATEGORIES:
            rows.append(f"{name},{self.energies_wh[name]!r},{self.edrive_shares_pct[name]!r}")
        for name in VEHICLE_CATEGORIES:
            energy = self.edrive_total_wh if name == "edrive" else self.energies_wh[name]
            rows.append(f"vehicle.{name},{energy!r},{self.vehicle_shares_pct[name]!r}")
        return "\n".join(rows) + "\n"

    def text_table(self) -> str:
        out = io.StringIO()
        out.write(f"{'eDrive loss category':<24}{'energy [Wh]':>14}{'share [%]':>12}\n")
        for name, _ in EDRIVE_CATEGORIES:
            out.write(f"{name:<24}{self.energies_wh[name]:>14.3f}"
                      f"{self.edrive_shares_pct[name]:>12.2f}\n")
        out.write(f"{'total':<24}{self.edrive_total_wh:>14.3f}\n\n")
        out.write(f"{'vehicle category':<24}{'energy [Wh]':>14}{'share [%]':>12}\n")
        for name in VEHICLE_CATEGORIES:
            energy = self.edrive_total_wh if name == "edrive" else self.energies_wh[name]
            out.write(f"{name:<24}{energy:>14.3f}{self.vehicle_shares_pct[name]:>12.2f}\n")
        out.write("\nmode time share [%]\n")
        for mode, pct in self.mode_time_share_pct.items():
            out.write(f"  {mode:<22}{pct:>12.2f}\n")
        if self.empty:
            out.write("\n(no drive energy: cycle never leaves standstill)\n")
        return out.getvalue()


def _shares(values: dict) -> dict:
    total = sum(values.values())
    if total <= 0:
        return {k: 0.0 for k in values}
    return {k: 100.0 * v / total for k, v in values.items()}


def _axis(hi: float, n: int) -> np.ndarray:
    # a degenerate extent still needs two distinct nodes for interpolation
    return np.linspace(0.0, hi if hi > 0 else 1.0, max(n, 2))


def _cell(axis: np.ndarray, x: float) -> tuple:
    k = int(np.searchsorted(axis, x, side="right") - 1)
    k = min(max(k, 0), axis.size - 2)
    frac = (x - axis[k]) / (axis[k + 1] - axis[k])
    return k, min(max(frac, 0.0), 1.0)


class _LossMaps:
    """Per-mode loss lattices over |torque| x speed with bilinear lookup."""

    def __init__(self, system: DriveSystem, torques: np.ndarray, speeds: np.ndarray,
                 threads: int):
        self.system = system
        self.torques = torques
        self.speeds = speeds
        points = lattice(torques, speeds)
        jobs = [(mode, op) for mode in system.modes for op in points]
        results = parallel_map(lambda job: best_in_mode(job[1], system, job[0]), jobs, threads)
        nt, ns = torques.size, speeds.size
        self.values = {}
        self.feasible = {}
        for k, mode in enumerate(system.modes):
            chunk = results[k * len(points):(k + 1) * len(points)]
            vals = np.zeros((ns, nt, len(LOSS_COLUMNS)))
            ok = np.zeros((ns, nt), dtype=bool)
            for idx, d in enumerate(chunk):
                s, t = divmod(idx, nt)
                ok[s, t] = d.feasible
                if d.feasible:
                    vals[s, t] = d.losses.values()
            self.values[mode] = vals
            self.feasible[mode] = ok

    def lookup(self, torque: float, speed: float) -> Optional[tuple]:
        ti, tf = _cell(self.torques, abs(torque))
        si, sf = _cell(self.speeds, speed)
        best = None
        for mode in self.system.modes:
            ok = self.feasible[mode][si:si + 2, ti:ti + 2]
            if not ok.all():
                continue
            v = self.values[mode]
            interp = ((1 - sf) * ((1 - tf) * v[si, ti] + tf * v[si, ti + 1])
                      + sf * ((1 - tf) * v[si + 1, ti] + tf * v[si + 1, ti + 1]))
            losses = LossBreakdown(*interp.tolist())
            if best is None or losses.total < best[1].total:
                best = (mode, losses)
        return best


def simulate_cycle(
    cycle: DriveCycle,
    veh: VehicleParameters,
    system: DriveSystem,
    exact: bool = False,
    lattice_shape: Sequence[int] = (9, 9),
    threads: int = 1,
) -> CycleReport:
    """Energy per loss category over ``cycle``.

    By default losses come from bilinear interpolation on per-mode loss maps
    spanning the cycle's torque/speed envelope; samples whose surrounding
    map cells are infeasible in every mode are evaluated exactly.
    ``exact=True`` evaluates every sample through ``select_mode``.
    """
    t, v = cycle.t, cycle.v
    a = accelerations(cycle)
    w = trapezoid_weights(t)
    loads = [road_load(float(vi), float(ai), veh) for vi, ai in zip(v, a)]
    driving = np.array([not (vi == 0 and ai <= 0) for vi, ai in zip(v, a)])

    n = t.size
    edrive_power = np.zeros((n, len(LOSS_COLUMNS)))
    modes: list = [None] * n
    drive_idx = np.nonzero(driving)[0].tolist()

    def exact_eval(k: int) -> ModeDecision:
        try:
            return select_mode(loads[k].op, system)
        except NoFeasibleMode:
            op = loads[k].op
            raise InfeasiblePoint(float(t[k]), op.torque, op.speed) from None

    fallback = []
    maps = None
    if exact:
        fallback = drive_idx
    elif drive_idx:
        t_hi = max(abs(loads[k].op.torque) for k in drive_idx)
        s_hi = max(loads[k].op.speed for k in drive_idx)
        maps = _LossMaps(system, _axis(t_hi, lattice_shape[0]), _axis(s_hi, lattice_shape[1]),
                         threads)
        for k in drive_idx:
            hit = maps.lookup(loads[k].op.torque, loads[k].op.speed)
            if hit is None:
                fallback.append(k)
            else:
                modes[k] = hit[0]
                edrive_power[k] = hit[1].values()
    for k, d in zip(fallback, parallel_map(exact_eval, fallback, threads)):
        modes[k] = d.mode
        edrive_power[k] = d.losses.values()

    energies = {}
    for col, (name, _) in enumerate(EDRIVE_CATEGORIES):
        energies[name] = float(np.dot(w, edrive_power[:, col])) / 3600.0
    road = np.array([(ld.aero + ld.rolling) * vi if drv else 0.0
                     for ld, vi, drv in zip(loads, v, driving)])
    shaft = np.array([ld.op.torque * ld.op.speed for ld in loads])
    wheel = np.array([ld.force * vi for ld, vi in zip(loads, v)])
    driveline = np.where(driving, np.abs(shaft - wheel), 0.0)
    energies["road_load"] = float(np.dot(w, road)) / 3600.0
    energies["driveline"] = float(np.dot(w, driveline)) / 3600.0
    duration = cycle.duration
    energies["battery"] = veh.battery_loss_power * duration / 3600.0
    energies["auxiliary"] = veh.auxiliary_power * duration / 3600.0

    edrive = {name: energies[name] for name, _ in EDRIVE_CATEGORIES}
    edrive_total = sum(edrive.values())
    vehicle = {
        "road_load": energies["road_load"],
        "edrive": edrive_total,
        "battery": energies["battery"],
        "driveline": energies["driveline"],
        "auxiliary": energies["auxiliary"],
    }
    driving_time = float(w[driving].sum())
    mode_time = {}
    for mode in system.modes:
        share = sum(w[k] for k in drive_idx if modes[k] is mode)
        mode_time[mode.value] = 100.0 * share / driving_time if driving_time > 0 else 0.0

    return CycleReport(
        energies_wh=energies,
        edrive_shares_pct=_shares(edrive),
        vehicle_shares_pct=_shares(vehicle),
        mode_time_share_pct=mode_time,
        duration_s=duration,
        driving_time_s=driving_time,
        empty=edrive_total <= 0,
        interpolated=not exact,
        lattice_shape=tuple(int(x) for x in lattice_shape) if not exact else None,
        exact_fallback_samples=0 if exact else len(fallback),
        metadata={"modes": [m.value for m in system.modes], "samples": int(n)},
    )


def synthetic_cycle(dt: float = 1.0) -> DriveCycle:
    """Urban / suburban / highway speed trace built from trapezoidal phases.

    Not a reproduction of any standardized cycle; it starts and ends at
    standstill with idle samples at both ends.
    """
    # (cruise speed km/h, accel s, cruise s, decel s, idle s)
    phases = [
        (20, 6, 12, 6, 10), (35, 10, 30, 10, 15), (50, 14, 40, 12, 20),
        (30, 8, 20, 8, 10), (60, 16, 60, 14, 20), (45, 12, 30, 10, 15),
        (70, 20, 90, 18, 15), (90, 25, 120, 20, 20), (80, 15, 60, 20, 10),
        (110, 30, 150, 25, 20), (130, 30, 90, 35, 30),
    ]
    t_knots, v_knots = [0.0, 10.0], [0.0, 0.0]
    for vkmh, acc, cruise, dec, idle in phases:
        vt = vkmh / 3.6
        for dur, target in ((acc, vt), (cruise, vt), (dec, 0.0), (idle, 0.0)):
            t_knots.append(t_knots[-1] + dur)
            v_knots.append(target)
    t = np.arange(0.0, t_knots[-1] + dt / 2, dt)
    v = np.interp(t, t_knots, v_knots)
    return DriveCycle(t, v)
