"""Command-line front end, config-file parsing, and bit-exact serializers.

Subcommands: `bloch` (trajectory dump), `gp` (single geometric-phase value),
`surface` (phase over an angle grid), `compare` (coupling-strategy report),
`verify` (cross-validation suite).  Exit status: 0 success, 1 usage or
configuration error, 2 numerical/refinement error (also used by `verify`
when a check fails).

File config: flat `key=value` lines, `#` comments, keys identical to the
long flag names; explicit flags override file values which override
defaults.  Reals serialize with 17 significant digits so parsing the output
reproduces every double bit-exactly; CSV uses `\n` line endings and prints
missing cells as `nan` (JSON mirrors the same rows with null).  Angle inputs
are radians.  The env var FRUSTRA_GP_THREADS (positive integer) caps worker
parallelism; output bytes never depend on the thread count.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

from .dynamics import BlochTrajectory, TimeGrid, bloch_trajectory
from .errors import (
    ConfigError,
    DimensionCapError,
    IndeterminatePhaseError,
    OracleError,
    PreconditionError,
    ResolutionError,
    UsageError,
)
from .experiments import (
    AngleGrid,
    GpSurface,
    StrategyReport,
    auto_time_grid,
    gp_surface,
    strategy_compare,
    verify_suite,
)
from .model import InitialStateAngles, SystemConfig, validate_config
from .oracle import OracleLimits
from .phase import (
    GpResult,
    gp_closed_form,
    gp_discrete_holonomy,
    gp_south_pole,
    polar_track,
)

THREADS_ENV = "FRUSTRA_GP_THREADS"
SURFACE_CSV_HEADER = "theta,phi,gp_principal,gp_unwrapped,singular_count"
BLOCH_CSV_HEADER = "t,x,y,z"
COMPARE_CSV_HEADER = (
    "label,omega,alpha1,alpha2,bath_size,mean_abs_gp,mean_dist_to_unitary,"
    "min_gp,max_gp,missing_cells"
)

_PI = format(math.pi, ".17g")
_HALF_PI = format(math.pi / 2.0, ".17g")
_THETA_MAX = format(math.pi - 0.05, ".17g")

_GP_METHODS = ("closed_form", "south_pole", "discrete_holonomy")
_METRICS = ("mean_dist_to_unitary", "mean_abs_gp")
_MODES = ("physical", "literal")
_DEFAULT_COUPLINGS = "1,0;0,1;0.25,0.25;0.5,0.5"

# ---------------------------------------------------------------------------
# value converters (single validation path for flags and config files)


def _conv_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("must be finite")
    return value


def _conv_pos_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError("must be a positive integer")
    return value


def _conv_int(text: str) -> int:
    return int(text)


def _conv_steps(text: str):
    if text == "auto":
        return None
    value = int(text)
    if value < 2:
        raise ValueError("must be 'auto' or an integer >= 2")
    return value


def _conv_choice(*options: str):
    def convert(text: str) -> str:
        if text not in options:
            raise ValueError("must be one of " + ", ".join(options))
        return text

    return convert


def _conv_couplings(text: str) -> tuple:
    pairs = []
    for part in text.split(";"):
        part = part.strip()
        bits = part.split(",")
        if len(bits) != 2:
            raise ValueError(f"bad coupling pair '{part}'; expected 'a1,a2;...'")
        pairs.append((_conv_float(bits[0]), _conv_float(bits[1])))
    if len(pairs) < 2:
        raise ValueError("need at least two coupling pairs")
    return tuple(pairs)


def _conv_str(text: str) -> str:
    return text


_CONVERTERS = {
    "omega": _conv_float,
    "alpha1": _conv_float,
    "alpha2": _conv_float,
    "bath-size": _conv_pos_int,
    "theta": _conv_float,
    "phi": _conv_float,
    "t-end": _conv_float,
    "steps": _conv_steps,
    "sampling-factor": _conv_pos_int,
    "n-theta": _conv_pos_int,
    "n-phi": _conv_pos_int,
    "theta-min": _conv_float,
    "theta-max": _conv_float,
    "mode": _conv_choice(*_MODES),
    "method": _conv_choice(*_GP_METHODS),
    "metric": _conv_choice(*_METRICS),
    "couplings": _conv_couplings,
    "max-bath-size": _conv_pos_int,
    "seed": _conv_int,
    "out": _conv_str,
}

# per-subcommand defaults; None marks a required key
_PHYS = (("omega", "2.0"), ("alpha1", "0.0"), ("alpha2", "0.0"), ("bath-size", None))
_GRID = (
    ("n-theta", "61"),
    ("n-phi", "61"),
    ("theta-min", "0.05"),
    ("theta-max", _THETA_MAX),
)

_DEFAULTS: dict[str, dict[str, str | None]] = {
    "bloch": dict(
        _PHYS
        + (
            ("theta", _HALF_PI),
            ("phi", "0.0"),
            ("t-end", _PI),
            ("steps", "auto"),
            ("format", "csv"),
            ("out", "-"),
        )
    ),
    "gp": dict(
        _PHYS
        + (
            ("theta", _HALF_PI),
            ("phi", "0.0"),
            ("t-end", _PI),
            ("steps", "auto"),
            ("method", "closed_form"),
            ("format", "text"),
            ("out", "-"),
        )
    ),
    "surface": dict(
        _PHYS
        + _GRID
        + (
            ("t-end", _PI),
            ("steps", "auto"),
            ("sampling-factor", "40"),
            ("mode", "physical"),
            ("format", "csv"),
            ("out", "-"),
        )
    ),
    "compare": dict(
        (("omega", "2.0"), ("bath-size", None))
        + _GRID
        + (
            ("t-end", _PI),
            ("steps", "auto"),
            ("sampling-factor", "40"),
            ("couplings", _DEFAULT_COUPLINGS),
            ("metric", "mean_dist_to_unitary"),
            ("format", "csv"),
            ("out", "-"),
        )
    ),
    "verify": {"max-bath-size": "4", "seed": "20260814", "out": "verify_report.json"},
}

_FORMAT_CHOICES = {
    "bloch": ("csv", "json"),
    "gp": ("text", "json"),
    "surface": ("csv", "json"),
    "compare": ("csv", "json"),
}

SUBCOMMANDS = tuple(_DEFAULTS)


def _converter_for(subcommand: str, key: str):
    if key == "format":
        return _conv_choice(*_FORMAT_CHOICES[subcommand])
    return _CONVERTERS[key]


# ---------------------------------------------------------------------------
# run configuration


@dataclass
class RunConfig:
    """A fully resolved invocation: subcommand plus raw string values.

    values maps flag names (without dashes) to their raw textual form;
    provenance records where each value came from (default, file, flag) and
    is excluded from equality.
    """

    subcommand: str
    values: dict
    provenance: dict = field(compare=False, default_factory=dict)


def serialize_config(cfg: RunConfig) -> str:
    """Textual form accepted by load_config; keys sorted, Nones omitted."""
    lines = [f"subcommand={cfg.subcommand}"]
    for key in sorted(cfg.values):
        value = cfg.values[key]
        if value is not None:
            lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def _parse_config_text(text: str):
    """Yield (lineno, key, value) triples; malformed lines raise ConfigError."""
    triples = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got '{raw.strip()}'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: missing key before '='")
        triples.append((lineno, key, value))
    return triples


def load_config(path, subcommand: str | None = None) -> RunConfig:
    """Parse a key=value config file into a RunConfig.

    The file may carry a `subcommand=` line; if both the file and the caller
    name one, they must agree.  Unknown keys, duplicates, and unparsable
    values are rejected with their line number.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    triples = _parse_config_text(text)

    sub = subcommand
    seen: dict[str, int] = {}
    for lineno, key, value in triples:
        if key in seen:
            raise ConfigError(
                f"line {lineno}: duplicate key '{key}' (first set on line {seen[key]})"
            )
        seen[key] = lineno
        if key == "subcommand":
            if value not in SUBCOMMANDS:
                raise ConfigError(f"line {lineno}: unknown subcommand '{value}'")
            if subcommand is not None and value != subcommand:
                raise ConfigError(
                    f"line {lineno}: config file is for subcommand '{value}',"
                    f" not '{subcommand}'"
                )
            sub = value
    if sub is None:
        raise ConfigError(
            "config file does not declare a subcommand and none was supplied"
        )

    values = dict(_DEFAULTS[sub])
    provenance = {key: "default" for key in values}
    for lineno, key, value in triples:
        if key == "subcommand":
            continue
        if key not in values:
            raise ConfigError(
                f"line {lineno}: unknown key '{key}' for subcommand '{sub}'"
            )
        try:
            _converter_for(sub, key)(value)
        except ValueError as exc:
            raise ConfigError(
                f"line {lineno}: invalid value for {key}: '{value}' ({exc})"
            ) from exc
        values[key] = value
        provenance[key] = "file"
    return RunConfig(subcommand=sub, values=values, provenance=provenance)


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage problems as UsageError."""

    def error(self, message):
        raise UsageError(message)


_FLAG_HELP = {
    "omega": "qubit level splitting (rad/time)",
    "alpha1": "coupling to the x-axis bath (>= 0)",
    "alpha2": "coupling to the y-axis bath (>= 0)",
    "bath-size": "spins per bath, N >= 1 (required)",
    "theta": "initial polar angle in [0, pi] (radians)",
    "phi": "initial azimuth (radians)",
    "t-end": "evolution time (> 0)",
    "steps": "time-grid nodes, or 'auto' to choose from the fastest sector",
    "sampling-factor": "auto grid: samples per fastest-sector period",
    "n-theta": "grid nodes along theta",
    "n-phi": "grid nodes along phi ([0, 2pi), endpoint excluded)",
    "theta-min": "smallest grid theta (strictly inside (0, pi))",
    "theta-max": "largest grid theta (strictly inside (0, pi))",
    "mode": "polarization source: physical | literal",
    "method": "gp route: closed_form | south_pole | discrete_holonomy",
    "metric": "ranking metric: mean_dist_to_unitary | mean_abs_gp",
    "couplings": "semicolon-separated a1,a2 pairs to compare",
    "max-bath-size": "oracle dimension cap (<= 6)",
    "seed": "seed for the randomized verification draws",
    "format": "output format",
    "out": "output path, '-' for stdout",
}

_SUBCOMMAND_HELP = {
    "bloch": "dump the reduced Bloch trajectory on a uniform time grid",
    "gp": "compute one geometric-phase value",
    "surface": "geometric phase over a (theta, phi) grid at fixed time",
    "compare": "rank coupling allocations against the decoupled reference",
    "verify": "run the built-in cross-validation suite",
}


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(
        prog="frustra-gp",
        description="Central-spin decoherence dynamics and mixed-state"
        " geometric phase for a qubit coupled to two spin baths.",
    )
    subparsers = top.add_subparsers(dest="subcommand", metavar="COMMAND")
    subparsers.required = True
    for name in SUBCOMMANDS:
        sub = subparsers.add_parser(name, help=_SUBCOMMAND_HELP[name])
        for key in _DEFAULTS[name]:
            sub.add_argument(
                f"--{key}",
                default=None,
                metavar="V",
                help=_FLAG_HELP[key],
            )
        sub.add_argument(
            "--config",
            default=None,
            metavar="PATH",
            help="key=value config file; explicit flags override it",
        )
    return top


def _resolve(namespace: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file, then explicit flags into a RunConfig."""
    sub = namespace.subcommand
    if namespace.config is not None:
        cfg = load_config(namespace.config, subcommand=sub)
    else:
        values = dict(_DEFAULTS[sub])
        cfg = RunConfig(
            subcommand=sub,
            values=values,
            provenance={key: "default" for key in values},
        )
    for key in _DEFAULTS[sub]:
        flag_value = getattr(namespace, key.replace("-", "_"))
        if flag_value is not None:
            cfg.values[key] = flag_value
            cfg.provenance[key] = "flag"
    missing = [key for key, value in cfg.values.items() if value is None]
    if missing:
        flags = ", ".join(f"--{key}" for key in sorted(missing))
        raise UsageError(f"{flags} is required for '{sub}'")
    return cfg


def _materialize(cfg: RunConfig) -> dict:
    """Convert raw strings to typed values via the shared converters."""
    params = {}
    for key, raw in cfg.values.items():
        try:
            params[key.replace("-", "_")] = _converter_for(cfg.subcommand, key)(raw)
        except ValueError as exc:
            raise ConfigError(f"invalid value for {key}: '{raw}' ({exc})") from exc
    return params


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        value = int(raw)
        if value < 1:
            raise ValueError
    except ValueError:
        raise UsageError(
            f"{THREADS_ENV} must be a positive integer, got '{raw}'"
        ) from None
    return value


# ---------------------------------------------------------------------------
# serializers


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_surface_csv(surface: GpSurface, sink) -> int:
    """Emit the canonical CSV (theta outer, phi inner); returns bytes written."""
    written = 0

    def emit(line: str) -> None:
        nonlocal written
        sink.write(line)
        written += len(line.encode("utf-8"))

    emit(SURFACE_CSV_HEADER + "\n")
    thetas = surface.grid.thetas()
    phis = surface.grid.phis()
    for i in range(surface.grid.n_theta):
        theta_txt = _fmt(thetas[i])
        for j in range(surface.grid.n_phi):
            emit(
                f"{theta_txt},{_fmt(phis[j])},{_fmt(surface.gamma[i, j])},"
                f"{_fmt(surface.gamma_unwrapped[i, j])},"
                f"{int(surface.singular_count[i, j])}\n"
            )
    return written


def surface_to_json(surface: GpSurface) -> dict:
    """Row-for-row JSON mirror of the CSV; missing cells become null."""
    thetas = surface.grid.thetas()
    phis = surface.grid.phis()
    rows = []
    for i in range(surface.grid.n_theta):
        for j in range(surface.grid.n_phi):
            gp = float(surface.gamma[i, j])
            unw = float(surface.gamma_unwrapped[i, j])
            rows.append(
                [
                    float(thetas[i]),
                    float(phis[j]),
                    None if math.isnan(gp) else gp,
                    None if math.isnan(unw) else unw,
                    int(surface.singular_count[i, j]),
                ]
            )
    return {
        "columns": SURFACE_CSV_HEADER.split(","),
        "mode": surface.mode,
        "t": surface.t,
        "time_steps": surface.time_steps,
        "rows": rows,
    }


def write_bloch_csv(trajectory: BlochTrajectory, sink) -> int:
    """Emit t,x,y,z rows with 17 significant digits; returns bytes written."""
    written = 0

    def emit(line: str) -> None:
        nonlocal written
        sink.write(line)
        written += len(line.encode("utf-8"))

    emit(BLOCH_CSV_HEADER + "\n")
    times = trajectory.grid.times()
    for k in range(times.size):
        x, y, z = trajectory.points[k]
        emit(f"{_fmt(times[k])},{_fmt(x)},{_fmt(y)},{_fmt(z)}\n")
    return written


def write_compare_csv(report: StrategyReport, sink) -> int:
    """Ranked strategy table, prefixed by metric/winner comment lines."""
    written = 0

    def emit(line: str) -> None:
        nonlocal written
        sink.write(line)
        written += len(line.encode("utf-8"))

    emit(f"# metric={report.metric}\n")
    emit(f"# winner={report.winner}\n")
    emit(COMPARE_CSV_HEADER + "\n")
    by_label = {entry.label: entry for entry in report.entries}
    for label in report.ranking:
        e = by_label[label]
        emit(
            f"{e.label},{_fmt(e.config.omega)},{_fmt(e.config.alpha1)},"
            f"{_fmt(e.config.alpha2)},{e.config.bath_size},{_fmt(e.mean_abs_gp)},"
            f"{_fmt(e.mean_dist_to_unitary)},{_fmt(e.min_gp)},{_fmt(e.max_gp)},"
            f"{e.missing_cells}\n"
        )
    return written


def _write_out(out: str, writer) -> None:
    if out == "-":
        writer(sys.stdout)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            writer(fh)


# ---------------------------------------------------------------------------
# subcommand handlers


def _system_config(p: dict) -> SystemConfig:
    cfg = SystemConfig(
        omega=p["omega"],
        alpha1=p["alpha1"],
        alpha2=p["alpha2"],
        bath_size=p["bath_size"],
    )
    validate_config(cfg)
    return cfg


def _time_grid(cfg: SystemConfig, p: dict, min_steps: int) -> TimeGrid:
    if p["steps"] is None:
        return auto_time_grid(cfg, p["t_end"], min_steps=min_steps)
    return TimeGrid(0.0, p["t_end"], p["steps"])


def _cmd_bloch(p: dict, run_cfg: RunConfig) -> int:
    cfg = _system_config(p)
    angles = InitialStateAngles(theta=p["theta"], phi=p["phi"])
    traj = bloch_trajectory(cfg, angles, _time_grid(cfg, p, min_steps=201))
    if p["format"] == "csv":
        _write_out(p["out"], lambda sink: write_bloch_csv(traj, sink))
    else:
        payload = {
            "columns": BLOCH_CSV_HEADER.split(","),
            "rows": [
                [float(t), *map(float, point)]
                for t, point in zip(traj.grid.times(), traj.points)
            ],
        }
        _write_out(p["out"], lambda sink: sink.write(json.dumps(payload) + "\n"))
    return 0


def _compute_gp(p: dict) -> GpResult:
    cfg = _system_config(p)
    angles = InitialStateAngles(theta=p["theta"], phi=p["phi"])
    traj = bloch_trajectory(cfg, angles, _time_grid(cfg, p, min_steps=4001))
    if p["method"] == "closed_form":
        return gp_closed_form(polar_track(traj), angles)
    if p["method"] == "south_pole":
        return gp_south_pole(polar_track(traj))
    return gp_discrete_holonomy(traj)


def _cmd_gp(p: dict, run_cfg: RunConfig) -> int:
    result = _compute_gp(p)
    if p["format"] == "text":
        _write_out(p["out"], lambda sink: sink.write(_fmt(result.gamma) + "\n"))
    else:
        d = result.diagnostics
        payload = {
            "gamma": result.gamma,
            "gamma_unwrapped": result.gamma_unwrapped,
            "method": result.method,
            "n_steps": d.n_steps,
            "singular_nodes": d.singular_nodes,
            "unwrap_jumps": d.unwrap_jumps,
            "lambda_plus_end": d.lambda_plus_end,
            "min_step_overlap": d.min_step_overlap,
        }
        _write_out(p["out"], lambda sink: sink.write(json.dumps(payload) + "\n"))
    return 0


def _angle_grid(p: dict) -> AngleGrid:
    return AngleGrid(
        n_theta=p["n_theta"],
        n_phi=p["n_phi"],
        theta_min=p["theta_min"],
        theta_max=p["theta_max"],
    )


def _cmd_surface(p: dict, run_cfg: RunConfig) -> int:
    cfg = _system_config(p)
    surface = gp_surface(
        cfg,
        _angle_grid(p),
        p["t_end"],
        mode=p["mode"],
        time_steps=p["steps"],
        sampling_factor=p["sampling_factor"],
        threads=_thread_count(),
    )
    if p["format"] == "csv":
        _write_out(p["out"], lambda sink: write_surface_csv(surface, sink))
    else:
        payload = surface_to_json(surface)
        _write_out(p["out"], lambda sink: sink.write(json.dumps(payload) + "\n"))
    return 0


def _cmd_compare(p: dict, run_cfg: RunConfig) -> int:
    pairs = []
    for a1, a2 in p["couplings"]:
        label = f"alpha1={a1:g} alpha2={a2:g}"
        pairs.append(
            (
                label,
                SystemConfig(
                    omega=p["omega"], alpha1=a1, alpha2=a2, bath_size=p["bath_size"]
                ),
            )
        )
    progress = sys.stderr.isatty()
    if progress:
        print(f"comparing {len(pairs)} strategies...", file=sys.stderr)
    report = strategy_compare(
        pairs,
        _angle_grid(p),
        p["t_end"],
        metric=p["metric"],
        time_steps=p["steps"],
        sampling_factor=p["sampling_factor"],
        threads=_thread_count(),
    )
    if p["format"] == "csv":
        _write_out(p["out"], lambda sink: write_compare_csv(report, sink))
    else:
        _write_out(
            p["out"], lambda sink: sink.write(json.dumps(report.to_dict()) + "\n")
        )
    return 0


def _cmd_verify(p: dict, run_cfg: RunConfig) -> int:
    limits = OracleLimits(max_bath_size=p["max_bath_size"])
    report = verify_suite(limits, seed=p["seed"])
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        print(
            f"{status} {check.name}: measured={check.measured:.3e}"
            f" tolerance={check.tolerance:.1e} ({check.detail})"
        )
    _write_out(
        p["out"],
        lambda sink: sink.write(json.dumps(report.to_dict(), indent=2) + "\n"),
    )
    if p["out"] != "-":
        print(f"report written to {p['out']}")
    return 0 if report.all_passed else 2


_HANDLERS = {
    "bloch": _cmd_bloch,
    "gp": _cmd_gp,
    "surface": _cmd_surface,
    "compare": _cmd_compare,
    "verify": _cmd_verify,
}


# ---------------------------------------------------------------------------
# entry points


def run(argv=None) -> int:
    """Execute one invocation; returns the process exit status."""
    if argv is None:
        argv = sys.argv[1:]
    try:
        try:
            namespace = build_parser().parse_args(argv)
        except SystemExit as exc:  # --help exits argparse directly
            return int(exc.code or 0)
        run_cfg = _resolve(namespace)
        params = _materialize(run_cfg)
        return _HANDLERS[run_cfg.subcommand](params, run_cfg)
    except (UsageError, ConfigError) as exc:
        print(f"frustra-gp: error: {exc}", file=sys.stderr)
        return 1
    except (
        DimensionCapError,
        ResolutionError,
        IndeterminatePhaseError,
        PreconditionError,
        OracleError,
    ) as exc:
        print(f"frustra-gp: numerical error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


__all__ = [
    "RunConfig",
    "SUBCOMMANDS",
    "SURFACE_CSV_HEADER",
    "THREADS_ENV",
    "build_parser",
    "load_config",
    "main",
    "run",
    "serialize_config",
    "surface_to_json",
    "write_bloch_csv",
    "write_compare_csv",
    "write_surface_csv",
]
