"""Command-line front end.

    harmloss spectrum --modes B6_2L --torque 100 --speed 300
    harmloss lossmap  --modes TNPC_3L --grid 5x5
    harmloss compare  --modes b6_2l,tnpc_3l --grid 5x5
    harmloss optimize --torque 20:200 --speed 100:800 --grid 4x4
    harmloss cycle    --cycle my_cycle.csv

Exit codes: 0 success, 1 configuration error, 2 infeasible operating point,
3 I/O error, 64 usage error (including an unknown command).
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .config import SHIPPED_CYCLE, RunConfig, default_config, load_config, shipped_text
from .cycle import ingest_cycle, simulate_cycle
from .errors import BandEmpty, BandOutsideTables, ConfigError, CycleError, Infeasible, Overmodulation
from .machine import OperatingPoint
from .modulation import Mode, TopologyMode, synthesize_waveform, waveform_csv
from .spectrum import park_transform, ripple_spectrum, spectrum_csv
from .strategy import (
    best_in_mode,
    build_decision_map,
    build_loss_map,
    loss_map_csv,
    select_mode,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3
EXIT_USAGE = 64

COMMANDS = ("spectrum", "lossmap", "compare", "optimize", "cycle")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would collide with the
    # infeasibility code
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="JSON run configuration (default: shipped synthetic set)")
    p.add_argument("--out", metavar="DIR", help="output directory (default: config output_dir)")
    p.add_argument("--modes", metavar="LIST", help="comma-separated topology modes")
    p.add_argument("--grid", metavar="RxC", default="5x5", help="torque x speed lattice size")
    p.add_argument("--torque", metavar="T|A:B", help="torque in N*m, value or range")
    p.add_argument("--speed", metavar="W|A:B", help="shaft speed in rad/s, value or range")
    p.add_argument("--threads", type=int, default=1, metavar="N")
    p.add_argument("--stamp", action="store_true", help="add a UTC timestamp to JSON outputs")


def build_parser() -> _Parser:
    parser = _Parser(prog="harmloss", description="Harmonic motor loss evaluation for traction drives.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    helps = {
        "spectrum": "waveform and ripple spectrum of one mode at one point",
        "lossmap": "loss map of one mode over a torque-speed grid",
        "compare": "side-by-side loss maps of several modes",
        "optimize": "minimum-loss mode selection per point",
        "cycle": "drive-cycle energy report",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name], description=helps[name])
        _common(p)
        if name == "cycle":
            p.add_argument("--cycle", metavar="PATH", help="cycle CSV t_s,v_mps (default: shipped cycle)")
            p.add_argument("--exact", action="store_true", help="evaluate every sample, no map interpolation")
    return parser


def parse_grid(text: str) -> tuple:
    try:
        r, c = text.lower().split("x")
        r, c = int(r), int(c)
    except ValueError:
        raise UsageError(f"--grid expects RxC, got {text!r}") from None
    if r < 1 or c < 1:
        raise UsageError("--grid sizes must be >= 1")
    return r, c


def parse_axis(text: Optional[str], default: tuple, n: int, name: str) -> list:
    """A single value, or ``a:b`` expanded to ``n`` evenly spaced values."""
    try:
        if text is None:
            lo, hi = default
        elif ":" in text:
            lo, hi = (float(x) for x in text.split(":"))
        else:
            return [float(text)]
    except ValueError:
        raise UsageError(f"--{name} expects a number or a:b, got {text!r}") from None
    if n == 1:
        return [float(lo)]
    return [float(x) for x in np.linspace(lo, hi, n)]


def parse_modes(text: Optional[str], cfg: RunConfig) -> list:
    if text is None:
        return list(cfg.system.modes)
    modes = []
    for token in text.split(","):
        try:
            mode = Mode.parse(token.strip())
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if mode not in cfg.system.modes:
            raise ConfigError(f"mode {mode.value} is not configured")
        modes.append(mode)
    return modes


def _single_mode(args, cfg: RunConfig) -> Mode:
    modes = parse_modes(args.modes, cfg)
    if args.modes is not None and len(modes) != 1:
        raise UsageError(f"{args.command} takes exactly one mode")
    return modes[0]


def _stamp(doc: dict, args) -> dict:
    if args.stamp:
        doc["generated_utc"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return doc


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _scalar(text: Optional[str], name: str) -> float:
    if text is None:
        raise UsageError(f"--{name} is required")
    values = parse_axis(text, (0.0, 0.0), 1, name)
    return values[0]


def cmd_spectrum(args, cfg: RunConfig, out: Path) -> int:
    mode = _single_mode(args, cfg)
    op = OperatingPoint(_scalar(args.torque, "torque"), _scalar(args.speed, "speed"))
    d = best_in_mode(op, cfg.system, mode)
    if not d.feasible:
        raise Infeasible(d.reason)
    system = cfg.system
    topo = TopologyMode(mode, d.vdc_set if mode is Mode.BUCK_2L else None)
    f_e = op.speed * system.motor.pole_pairs / (2.0 * np.pi)
    wave = synthesize_waveform(topo, system.vdc_nom, d.voltages, f_e, system.pwm)
    spec = ripple_spectrum(park_transform(wave), d.voltages, system.tables, system.pwm.f_sw)
    tag = mode.value.lower()
    _write(out, f"waveform_{tag}.csv", waveform_csv(wave))
    _write(out, f"spectrum_{tag}.csv", spectrum_csv(spec))
    doc = {
        "mode": mode.value,
        "torque_Nm": op.torque,
        "speed_radps": op.speed,
        "vdc_V": d.vdc_set,
        "i_d_A": d.currents.d,
        "i_q_A": d.currents.q,
        "u_d_V": d.voltages.d,
        "u_q_V": d.voltages.q,
        "losses_W": d.losses.as_dict(),
        "p_total_W": d.losses.total,
        "waveform": {k: v for k, v in wave.metadata.items()},
        "spectrum": spec.metadata(),
    }
    _write(out, f"point_{tag}.json", json.dumps(_stamp(doc, args), indent=2) + "\n")
    print(f"{mode.value}: f_e={wave.f_e_used:.3f} Hz, {spec.f_h.size} bins, "
          f"harmonic losses {d.losses.harmonic:.3f} W, total {d.losses.total:.3f} W")
    return EXIT_OK


def _grid_axes(args, cfg: RunConfig) -> tuple:
    r, c = parse_grid(args.grid)
    torques = parse_axis(args.torque, cfg.torque_range, r, "torque")
    speeds = parse_axis(args.speed, cfg.speed_range, c, "speed")
    if min(speeds) < 0:
        raise UsageError("--speed must be >= 0")
    return torques, speeds


def cmd_lossmap(args, cfg: RunConfig, out: Path) -> int:
    mode = _single_mode(args, cfg)
    torques, speeds = _grid_axes(args, cfg)
    decisions = build_loss_map(torques, speeds, mode, cfg.system, args.threads)
    path = _write(out, f"lossmap_{mode.value.lower()}.csv",
                  loss_map_csv(decisions, with_vdc=mode is Mode.BUCK_2L))
    n_ok = sum(d.feasible for d in decisions)
    print(f"{mode.value}: {n_ok}/{len(decisions)} feasible points -> {path}")
    return EXIT_OK


def _ratio(a, b) -> str:
    return repr(a / b) if b > 0 else ""


def cmd_compare(args, cfg: RunConfig, out: Path) -> int:
    modes = parse_modes(args.modes, cfg)
    if len(modes) < 2:
        raise UsageError("compare needs at least two modes")
    torques, speeds = _grid_axes(args, cfg)
    maps = {}
    for mode in modes:
        maps[mode] = build_loss_map(torques, speeds, mode, cfg.system, args.threads)
        _write(out, f"lossmap_{mode.value.lower()}.csv",
               loss_map_csv(maps[mode], with_vdc=mode is Mode.BUCK_2L))
    base = modes[0]
    header = ["torque_Nm", "speed_radps", "mode", "ratio_p_fe_h", "ratio_p_harmonic", "ratio_p_total"]
    lines = [",".join(header)]
    summary = []
    for mode in modes[1:]:
        fe_ratios = []
        for d0, d1 in zip(maps[base], maps[mode]):
            row = [repr(d0.op.torque), repr(d0.op.speed), mode.value]
            if d0.feasible and d1.feasible:
                row += [_ratio(d1.losses.fe_h, d0.losses.fe_h),
                        _ratio(d1.losses.harmonic, d0.losses.harmonic),
                        _ratio(d1.losses.total, d0.losses.total)]
                if d0.losses.fe_h > 0:
                    fe_ratios.append(d1.losses.fe_h / d0.losses.fe_h)
            else:
                row += ["", "", ""]
            lines.append(",".join(row))
        if fe_ratios:
            summary.append(f"{mode.value} vs {base.value}: harmonic iron ratio "
                           f"min {min(fe_ratios):.3f}, mean {np.mean(fe_ratios):.3f}, "
                           f"max {max(fe_ratios):.3f} over {len(fe_ratios)} common points")
        else:
            summary.append(f"{mode.value} vs {base.value}: no common feasible points")
    _write(out, "compare_ratios.csv", "\n".join(lines) + "\n")
    print("\n".join(summary))
    return EXIT_OK


def cmd_optimize(args, cfg: RunConfig, out: Path) -> int:
    system = cfg.system.with_modes(parse_modes(args.modes, cfg))
    single = (args.torque is not None and ":" not in args.torque
              and args.speed is not None and ":" not in args.speed)
    if single:
        op = OperatingPoint(_scalar(args.torque, "torque"), _scalar(args.speed, "speed"))
        decisions = [select_mode(op, system)]
    else:
        torques, speeds = _grid_axes(args, cfg)
        decisions = build_decision_map(torques, speeds, system, args.threads)
    path = _write(out, "decisions.csv", loss_map_csv(decisions, with_vdc=True))
    if single:
        d = decisions[0]
        print(f"{d.mode.value} at vdc={d.vdc_set:.1f} V, total {d.losses.total:.3f} W")
    else:
        counts = {}
        for d in decisions:
            key = d.mode.value if d.feasible else "infeasible"
            counts[key] = counts.get(key, 0) + 1
        print(", ".join(f"{k}: {v}" for k, v in counts.items()) + f" -> {path}")
    return EXIT_OK


def cmd_cycle(args, cfg: RunConfig, out: Path) -> int:
    system = cfg.system.with_modes(parse_modes(args.modes, cfg))
    if args.cycle is None:
        text, source = shipped_text(SHIPPED_CYCLE), f"<shipped {SHIPPED_CYCLE}>"
    else:
        source = args.cycle
        text = Path(args.cycle).read_text(encoding="utf-8")
    try:
        cycle = ingest_cycle(text)
    except CycleError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    report = simulate_cycle(cycle, cfg.vehicle, system, exact=args.exact,
                            lattice_shape=cfg.cycle_lattice, threads=args.threads)
    doc = report.to_dict()
    doc["cycle"] = source
    _write(out, "cycle_report.json", json.dumps(_stamp(doc, args), indent=2) + "\n")
    _write(out, "cycle_report.txt", report.text_table())
    _write(out, "cycle_long.csv", report.long_csv())
    print(report.text_table(), end="")
    return EXIT_OK


HANDLERS = {
    "spectrum": cmd_spectrum,
    "lossmap": cmd_lossmap,
    "compare": cmd_compare,
    "optimize": cmd_optimize,
    "cycle": cmd_cycle,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv or (argv[0] not in COMMANDS and not argv[0].startswith("-")):
        if argv:
            print(f"harmloss: unknown command {argv[0]!r}", file=sys.stderr)
        print(parser.format_usage(), end="", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        print(parser.format_usage(), end="", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if args.command is None:
        print(parser.format_usage(), end="", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        cfg = default_config() if args.config is None else load_config(args.config)
        out = Path(args.out or cfg.output_dir or "out")
        return HANDLERS[args.command](args, cfg, out)
    except UsageError as exc:
        print(f"harmloss: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, BandEmpty, BandOutsideTables) as exc:
        print(f"harmloss: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (Infeasible, Overmodulation) as exc:
        print(f"harmloss: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        name = f" {exc.filename}" if exc.filename else ""
        print(f"harmloss: I/O error{name}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
