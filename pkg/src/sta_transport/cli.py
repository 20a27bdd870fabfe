"""Command-line front end.

    sta-transport waveform  [--config PATH] [--out PATH] [--samples N]
    sta-transport trace     [--config PATH] [--out PATH] [--summary PATH] [--samples N]
    sta-transport sweep     --tf-min S --tf-max S [--points N] [--log] [--p-rf W]
    sta-transport optimize  --objective {e_cs,e_ps,e_ps_f0} [--table] [--grid N]
    sta-transport verify    [--no-compensation]

Exit codes: 0 success, 2 configuration or usage error, 3 optimization
failure, 4 physics failure (ion escaped), 1 quadratic-model check failed.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cs_energetics, dynamics_oracle, electrostatics, optimizer, ps_energetics
from .errors import ContractError, EscapeError, OptimizationError, TransportError
from .model import (
    COLUMN_UNITS, POWER_TRACE_COLUMNS, DEFAULT_RESISTANCE, TABLE_RESISTANCE, FilterCircuit,
    IonSpecies, ReferenceTrap, Setup, TrapGeometry, TransportSpec, default_parameters,
)
from .powertrace import sample_trace
from .trajectory import make_quintic, make_septic_si

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_OPTIMIZATION, EXIT_PHYSICS = 0, 1, 2, 3, 4

QUADRATIC_EXCITATION_FLOOR = 1e-10  # in units of m omega^2 d^2


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _default_config() -> dict:
    geom, ion, trap, filt, spec = default_parameters()
    return {
        "amplitude_a": geom.amplitude_a,
        "width_c_m": geom.width_c,
        "spacing_d_m": geom.spacing_d,
        "mass_kg": ion.mass,
        "charge_C": ion.charge,
        "omega_rad_s": trap.omega,
        "resistance_R_ohm": filt.resistance_R,
        "capacitance_C_F": filt.capacitance_C,
        "duration_tf_s": spec.duration_tf,
        "polynomial": "quintic",
        "samples": 1001,
        "p_rf_W": 1.0,
    }


@dataclass
class RunConfig:
    setup: Setup
    samples: int = 1001
    p_rf: float = 1.0
    out: Path | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        known = _default_config()
        unknown = set(values) - set(known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
        cfg = {**known, **values}
        try:
            geom = TrapGeometry(float(cfg["amplitude_a"]), float(cfg["width_c_m"]), float(cfg["spacing_d_m"]))
            poly = _polynomial(cfg["polynomial"], geom.spacing_d)
            setup = Setup(
                geometry=geom,
                ion=IonSpecies(float(cfg["mass_kg"]), float(cfg["charge_C"])),
                trap=ReferenceTrap(float(cfg["omega_rad_s"])),
                filter=FilterCircuit(float(cfg["resistance_R_ohm"]), float(cfg["capacitance_C_F"])),
                transport=TransportSpec(float(cfg["duration_tf_s"]), geom.spacing_d, poly),
            )
        except (ContractError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc
        samples = cfg["samples"]
        if not isinstance(samples, int) or samples < 2:
            raise ConfigError(f"samples must be an integer >= 2, got {samples!r}")
        p_rf = float(cfg["p_rf_W"])
        if not p_rf >= 0:
            raise ConfigError(f"p_rf_W must be non-negative, got {p_rf!r}")
        return cls(setup=setup, samples=samples, p_rf=p_rf)


def _polynomial(value, distance):
    if value == "quintic":
        return make_quintic()
    if isinstance(value, dict) and value.get("kind") == "septic":
        return make_septic_si(float(value.get("a6_m", 0.0)), float(value.get("a7_m", 0.0)), distance)
    raise ConfigError(f"polynomial must be 'quintic' or {{'kind': 'septic', 'a6_m': .., 'a7_m': ..}}, got {value!r}")


def load_config(args) -> RunConfig:
    values = {}
    if args.config:
        try:
            values = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError("config must be a JSON object")
    if args.preset == "table":
        values.setdefault("resistance_R_ohm", TABLE_RESISTANCE)
    overrides = {
        "samples": args.samples,
        "duration_tf_s": args.tf,
        "p_rf_W": args.p_rf,
        "resistance_R_ohm": args.resistance,
    }
    if args.septic is not None:
        overrides["polynomial"] = {"kind": "septic", "a6_m": args.septic[0], "a7_m": args.septic[1]}
    values.update({k: v for k, v in overrides.items() if v is not None})
    config = RunConfig.from_mapping(values)
    config.out = Path(args.out) if args.out else None
    return config


# -- output helpers ---------------------------------------------------------

def _csv_text(header, columns) -> str:
    buf = io.StringIO()
    np.savetxt(buf, np.column_stack(columns) + 0.0, fmt="%.17g", delimiter=",", header=",".join(header), comments="")
    return buf.getvalue()


def _emit(text: str, path: Path | None):
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def _is_quintic(setup: Setup) -> bool:
    c = setup.polynomial.coefficients
    q = make_quintic().coefficients
    return c[: len(q)] == q and not any(c[len(q):])


# -- subcommands ------------------------------------------------------------

def cmd_waveform(config: RunConfig, args) -> int:
    setup = config.setup
    t = np.linspace(0.0, setup.duration, config.samples)
    pair = electrostatics.voltages(setup, t)
    header = ["time_s", "U1_V", "U2_V", "U1_rate_Vps", "U2_rate_Vps"]
    _emit(_csv_text(header, [t, pair.U1, pair.U2, pair.U1_rate, pair.U2_rate]), config.out)
    return EXIT_OK


def trace_summary(setup: Setup, trace) -> dict:
    quintic = _is_quintic(setup)
    return {
        "duration_tf_s": setup.duration,
        "E_PS_J": ps_energetics.e_ps_consumption(setup),
        "E_PS_f0_J": ps_energetics.e_ps_consumption(setup, use_shift=False),
        "E_CS_J": cs_energetics.e_cs_consumption(setup),
        "P_PS_abs_at_0_W": float(abs(trace["P_PS"][0])),
        "P_CS_rectified_at_0_W": float(trace["P_CS_rectified"][0]),
        "P_PS_peak_W": float(np.max(np.abs(trace["P_PS"]))),
        "P_CS_peak_W": float(np.max(trace["P_CS_rectified"])),
        "P_PS_peak_closed_form_W": ps_energetics.p_ps_peak(setup.ion, setup.transport) if quintic else None,
        "P_CS_peak_closed_form_W": cs_energetics.cs_peak_closed_form(setup) if quintic else None,
    }


def cmd_trace(config: RunConfig, args) -> int:
    setup = config.setup
    trace = sample_trace(setup, config.samples)
    header = ["time_s"] + [f"{k}_{COLUMN_UNITS[k]}" for k in POWER_TRACE_COLUMNS]
    _emit(_csv_text(header, [trace.times] + [trace[k] for k in POWER_TRACE_COLUMNS]), config.out)
    summary = _json_text(trace_summary(setup, trace))
    if args.summary:
        Path(args.summary).write_text(summary)
    elif config.out is not None:
        sys.stdout.write(summary)
    else:
        sys.stderr.write(summary)
    return EXIT_OK


def sweep_row(setup: Setup, tf: float, p_rf: float) -> list:
    s = setup.with_duration(tf)
    if _is_quintic(s):
        p_ps_peak = ps_energetics.p_ps_peak(s.ion, s.transport)
        p_cs_peak = cs_energetics.cs_peak_closed_form(s)
    else:
        p_ps_peak = abs(float(ps_energetics.p_ps(s, 0.0)))
        p_cs_peak = cs_energetics.cs_power(s.filter, electrostatics.voltages(s, 0.0)).signed_total
    return [
        tf,
        ps_energetics.e_ps_consumption(s),
        cs_energetics.e_cs_consumption(s),
        cs_energetics.rf_energy(p_rf, tf),
        p_ps_peak,
        p_cs_peak,
    ]


def cmd_sweep(config: RunConfig, args) -> int:
    if args.tf_min is None or args.tf_max is None:
        raise ConfigError("sweep needs --tf-min and --tf-max")
    if not 0 < args.tf_min < args.tf_max:
        raise ConfigError(f"need 0 < tf-min < tf-max, got {args.tf_min}, {args.tf_max}")
    if args.points < 3:
        raise ConfigError(f"sweep needs at least 3 points, got {args.points}")
    space = np.geomspace if args.log else np.linspace
    durations = [float(t) for t in space(args.tf_min, args.tf_max, args.points)]
    setups = [config.setup] * len(durations)
    powers = [config.p_rf] * len(durations)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(sweep_row, setups, durations, powers))
    else:
        rows = list(map(sweep_row, setups, durations, powers))
    header = ["tf_s", "E_PS_J", "E_CS_J", "E_rf_J", "P_PS_peak_W", "P_CS_peak_W"]
    _emit(_csv_text(header, list(np.array(rows).T)), config.out)
    return EXIT_OK


def cmd_optimize(config: RunConfig, args) -> int:
    if args.objective is None:
        raise ConfigError("optimize needs --objective")
    try:
        kind = optimizer.Objective(args.objective)
    except ValueError:
        raise ConfigError(f"unknown objective {args.objective!r}; choose e_cs, e_ps or e_ps_f0") from None
    setup = config.setup
    try:
        result = optimizer.optimize(kind, setup, grid=args.grid)
        payload = {
            "resistance_R_ohm": setup.filter.resistance_R,
            "duration_tf_s": setup.duration,
            "optimization": result.as_dict(),
        }
        if args.table:
            table = optimizer.evaluate_table(setup, grid=args.grid)
            payload["table"] = table.as_dict()
    except OptimizationError as exc:
        sys.stderr.write(f"optimization failed: {exc}\n")
        for row in exc.trace:
            sys.stderr.write(f"  {row}\n")
        return EXIT_OPTIMIZATION
    _emit(_json_text(payload), config.out)
    return EXIT_OK


def _verdict_dict(setup, verdict):
    return {
        "final_position_m": verdict.final_position,
        "final_velocity_mps": verdict.final_velocity,
        "excitation_energy_J": verdict.excitation_energy,
        "relative_excitation": verdict.relative_excitation(setup),
        "max_tracking_error_m": verdict.max_tracking_error,
    }


def cmd_verify(config: RunConfig, args) -> int:
    setup = config.setup
    m, w, d = setup.ion.mass, setup.trap.omega, setup.geometry.spacing_d
    floor = QUADRATIC_EXCITATION_FLOOR * m * w * w * d * d
    quadratic = dynamics_oracle.simulate_quadratic(setup)
    full = dynamics_oracle.simulate_full(setup, compensate=not args.no_compensation)
    passed = quadratic.excitation_energy < floor
    payload = {
        "passed": passed,
        "excitation_floor_J": floor,
        "compensated": not args.no_compensation,
        "quadratic": _verdict_dict(setup, quadratic),
        "full": _verdict_dict(setup, full),
    }
    _emit(_json_text(payload), config.out)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


COMMANDS = {
    "waveform": cmd_waveform,
    "trace": cmd_trace,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sta-transport", description="Energy accounting for shortcut ion transport.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON configuration file (SI units, unit-suffixed keys)")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--summary", help="trace: write the JSON summary here")
    parser.add_argument("--preset", choices=("figures", "table"), default="figures",
                        help=f"filter resistance preset: figures = {DEFAULT_RESISTANCE:g} Ohm, "
                             f"table = {TABLE_RESISTANCE:g} Ohm (config keys still win)")
    parser.add_argument("--samples", type=int)
    parser.add_argument("--tf", type=float, help="protocol duration in s")
    parser.add_argument("--resistance", type=float, help="filter resistance in Ohm")
    parser.add_argument("--septic", type=float, nargs=2, metavar=("A6_M", "A7_M"),
                        help="use the septic transport function with these free coefficients (m)")
    parser.add_argument("--tf-min", type=float)
    parser.add_argument("--tf-max", type=float)
    parser.add_argument("--points", type=int, default=30)
    parser.add_argument("--log", action="store_true", help="log-spaced sweep durations")
    parser.add_argument("--p-rf", type=float, help="constant rf power in W")
    parser.add_argument("--jobs", type=int, default=1, help="sweep worker processes")
    parser.add_argument("--objective")
    parser.add_argument("--table", action="store_true", help="optimize: also emit the 12-cell table")
    parser.add_argument("--grid", type=int, default=5, help="optimize: multi-start lattice size per axis")
    parser.add_argument("--no-compensation", action="store_true",
                        help="verify: drive the full model without the compensating force")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        config = load_config(args)
        return COMMANDS[args.command](config, args)
    except ConfigError as exc:
        sys.stderr.write(f"sta-transport: {exc}\n")
        return EXIT_USAGE
    except EscapeError as exc:
        sys.stderr.write(f"sta-transport: {exc}\n")
        return EXIT_PHYSICS
    except TransportError as exc:
        sys.stderr.write(f"sta-transport: {exc}\n")
        return EXIT_PHYSICS if not isinstance(exc, ContractError) else EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"sta-transport: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
