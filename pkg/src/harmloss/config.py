"""Run configuration: a JSON document with SI units spelled out in field names.

Whole-line ``//`` comments are stripped before parsing. Every component
invariant is checked on load; errors name the offending field path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from .cycle import VehicleParameters
from .errors import ConfigError
from .inverter import BuckParameters, SwitchParameters
from .machine import HarmonicParameterTables, MotorParameters
from .modulation import Mode, PwmConfig
from .strategy import DriveSystem, ModeConstraint

SHIPPED_CONFIG = "synthetic_300kw.json"
SHIPPED_CYCLE = "synthetic_cycle.csv"


@dataclass(frozen=True)
class RunConfig:
    system: DriveSystem
    vehicle: VehicleParameters
    torque_range: tuple
    speed_range: tuple
    cycle_lattice: tuple
    output_dir: Optional[str]
    source: Optional[str] = None


class _Section:
    def __init__(self, data: Any, path: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected an object")
        self.data = data
        self.path = path

    def where(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def section(self, key: str) -> "_Section":
        if key not in self.data:
            raise ConfigError(f"{self.where(key)}: missing section")
        return _Section(self.data[key], self.where(key))

    def number(self, key: str, default: Any = ...) -> Optional[float]:
        if key not in self.data or self.data[key] is None:
            if default is ...:
                raise ConfigError(f"{self.where(key)}: missing value")
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"{self.where(key)}: expected a finite number, got {value!r}")
        return float(value)

    def integer(self, key: str, default: Any = ...) -> int:
        value = self.number(key, default)
        if value is None or value != int(value):
            raise ConfigError(f"{self.where(key)}: expected an integer, got {value!r}")
        return int(value)

    def numbers(self, key: str, length: Optional[int] = None, default: Any = ...) -> Optional[list]:
        if key not in self.data or self.data[key] is None:
            if default is ...:
                raise ConfigError(f"{self.where(key)}: missing value")
            return default
        value = self.data[key]
        if not isinstance(value, list):
            raise ConfigError(f"{self.where(key)}: expected a list of numbers")
        out = []
        for k, x in enumerate(value):
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                raise ConfigError(f"{self.where(key)}[{k}]: expected a finite number, got {x!r}")
            out.append(float(x))
        if length is not None and len(out) != length:
            raise ConfigError(f"{self.where(key)}: expected {length} values, got {len(out)}")
        return out

    def build(self, factory, **kwargs):
        try:
            return factory(**kwargs)
        except (ConfigError, ValueError) as exc:
            raise ConfigError(f"{self.path}: {exc}") from None


def _switch(s: _Section) -> SwitchParameters:
    return s.build(SwitchParameters, r_on=s.number("r_on_Ohm"), e_sw_ref=s.number("e_sw_ref_J"),
                   v_ref=s.number("v_ref_V"), i_ref=s.number("i_ref_A"))


def _mode_constraint(s: _Section) -> ModeConstraint:
    token = s.data.get("mode")
    try:
        mode = Mode.parse(str(token))
    except ValueError as exc:
        raise ConfigError(f"{s.where('mode')}: {exc}") from None
    rng = s.numbers("vdc_range_V", length=2, default=None)
    return s.build(
        ModeConstraint,
        mode=mode,
        max_phase_current=s.number("max_phase_current_A"),
        vdc_range=tuple(rng) if rng else None,
        voltage_capability_factor=s.number("voltage_capability_factor", default=None),
    )


def parse_config(data: dict, source: Optional[str] = None) -> RunConfig:
    root = _Section(data, "")
    m = root.section("motor")
    motor = m.build(
        MotorParameters,
        pole_pairs=m.integer("pole_pairs"),
        psi_pm=m.number("psi_pm_Vs"),
        ld_fund=m.number("ld_fund_H"),
        lq_fund=m.number("lq_fund_H"),
        rs=m.number("rs_Ohm"),
        i_max=m.number("i_max_A"),
        rated_power=m.number("rated_power_W"),
        iron_hyst_coeff=m.number("iron_hyst_coeff_W_per_Hz_Vs2"),
        iron_eddy_coeff=m.number("iron_eddy_coeff_W_per_Hz2_Vs2"),
    )
    h = root.section("harmonic_tables")
    tables = h.build(
        HarmonicParameterTables,
        grid=h.numbers("grid_Hz"),
        ld_h=h.numbers("ld_h_H"),
        lq_h=h.numbers("lq_h_H"),
        rcu_h=h.numbers("rcu_h_Ohm"),
        riron_h=h.numbers("riron_h_Ohm"),
        rmag_h=h.numbers("rmag_h_Ohm"),
        k_cu=h.number("k_cu"),
        k_iron=h.number("k_iron"),
        k_mag=h.number("k_mag"),
        f_min=h.number("f_min_Hz", default=2500.0),
        f_max=h.number("f_max_Hz", default=None),
    )
    switch = _switch(root.section("switch"))
    b = root.section("buck")
    buck = b.build(BuckParameters, inductor_dcr=b.number("inductor_dcr_Ohm"),
                   switch=_switch(b.section("switch")), f_sw_dc=b.number("f_sw_dc_Hz"))
    p = root.section("pwm")
    pwm = p.build(PwmConfig, f_sw=p.number("f_sw_Hz", default=10_000.0),
                  samples_per_switching_period=p.integer("samples_per_switching_period", default=128),
                  fundamental_periods=p.integer("fundamental_periods", default=1))
    dc = root.section("dc_link")
    modes_raw = data.get("modes")
    if not isinstance(modes_raw, list) or not modes_raw:
        raise ConfigError("modes: expected a non-empty list")
    constraints = [_mode_constraint(_Section(x, f"modes[{k}]")) for k, x in enumerate(modes_raw)]
    system = root.build(
        DriveSystem,
        motor=motor, tables=tables, switch=switch, buck=buck, constraints=constraints,
        vdc_nom=dc.number("vdc_nom_V"), pwm=pwm,
        dc_link_step=dc.number("step_V", default=10.0),
        dc_link_margin=dc.number("margin", default=0.05),
    )
    v = root.section("vehicle")
    vehicle = v.build(
        VehicleParameters,
        mass=v.number("mass_kg"), cd_a=v.number("cd_a_m2"), c_rr=v.number("c_rr"),
        wheel_radius=v.number("wheel_radius_m"), gear_ratio=v.number("gear_ratio"),
        driveline_efficiency=v.number("driveline_efficiency"),
        air_density=v.number("air_density_kg_m3", default=1.204),
        battery_loss_power=v.number("battery_loss_W", default=0.0),
        auxiliary_power=v.number("auxiliary_W", default=0.0),
    )
    lm = root.section("lossmap") if "lossmap" in data else _Section({}, "lossmap")
    torque_range = tuple(lm.numbers("torque_range_Nm", 2, default=[0.0, 100.0]))
    speed_range = tuple(lm.numbers("speed_range_radps", 2, default=[0.0, 500.0]))
    if speed_range[0] < 0:
        raise ConfigError("lossmap.speed_range_radps: speeds must be >= 0")
    cy = root.section("cycle") if "cycle" in data else _Section({}, "cycle")
    lat = cy.numbers("lattice", 2, default=[9, 9])
    if any(x != int(x) or x < 2 for x in lat):
        raise ConfigError("cycle.lattice: expected two integers >= 2")
    out = data.get("output_dir")
    return RunConfig(system=system, vehicle=vehicle, torque_range=torque_range,
                     speed_range=speed_range, cycle_lattice=(int(lat[0]), int(lat[1])),
                     output_dir=out, source=source)


def _strip_comments(text: str) -> str:
    return "\n".join("" if line.lstrip().startswith("//") else line
                     for line in text.splitlines())


def loads_config(text: str, source: Optional[str] = None) -> RunConfig:
    try:
        data = json.loads(_strip_comments(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source or '<config>'}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{source or '<config>'}: top level must be an object")
    return parse_config(data, source)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"{path}: config file not found") from None
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        return loads_config(text, str(path))
    except ConfigError as exc:
        msg = str(exc)
        raise ConfigError(msg if msg.startswith(str(path)) else f"{path}: {msg}") from None


def shipped_text(name: str) -> str:
    return resources.files("harmloss").joinpath("data", name).read_text(encoding="utf-8")


def default_config() -> RunConfig:
    return loads_config(shipped_text(SHIPPED_CONFIG), f"<shipped {SHIPPED_CONFIG}>")
