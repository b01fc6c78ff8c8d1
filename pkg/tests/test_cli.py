"""End-to-end tests of the command-line interface.

Everything runs in-process through `run(argv)` except one smoke test of the
installed console script.  Output contracts under test: exact CSV headers,
17-significant-digit floats that re-parse bit-exactly, principal/unwrapped
consistency, JSON mirrors, config-file precedence, and thread-count
independence of the output bytes.
"""

import io
import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from frustra_gp import SystemConfig, angular_distance, gp_surface, principal_value
from frustra_gp.cli import (
    SURFACE_CSV_HEADER,
    THREADS_ENV,
    RunConfig,
    load_config,
    run,
    serialize_config,
    write_surface_csv,
)
from frustra_gp.errors import ConfigError
from frustra_gp.experiments import AngleGrid

SURFACE_ARGS = [
    "surface",
    "--bath-size", "2",
    "--alpha1", "0.6",
    "--alpha2", "0.3",
    "--t-end", "5",
    "--steps", "301",
    "--n-theta", "7",
    "--n-phi", "6",
    "--theta-min", "0.3",
    "--theta-max", "2.8",
]


def test_gp_default_invocation_prints_reference_phase(capsys):
    # omega=2, no coupling, theta=pi/2, one full period: gamma = -pi
    assert run(["gp", "--bath-size", "1"]) == 0
    out = capsys.readouterr().out.strip()
    assert angular_distance(float(out), -math.pi) < 1e-4


def test_gp_json_diagnostics(capsys):
    code = run(["gp", "--bath-size", "1", "--format", "json", "--steps", "2001"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["method"] == "closed_form"
    assert payload["n_steps"] == 2001
    assert payload["gamma"] == principal_value(payload["gamma_unwrapped"])
    assert payload["singular_nodes"] == 0
    assert payload["min_step_overlap"] is None


def test_gp_discrete_holonomy_method(capsys):
    code = run(
        ["gp", "--bath-size", "1", "--method", "discrete_holonomy", "--format", "json"]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["method"] == "discrete_holonomy"
    assert payload["min_step_overlap"] > 0.99
    assert angular_distance(payload["gamma"], -math.pi) < 1e-4


def test_missing_required_flag_is_usage_error(capsys):
    assert run(["gp"]) == 1
    err = capsys.readouterr().err
    assert "frustra-gp: error:" in err and "--bath-size" in err


def test_unknown_flag_is_usage_error(capsys):
    assert run(["gp", "--bath-size", "1", "--frequency", "3"]) == 1
    assert "frustra-gp: error:" in capsys.readouterr().err


def test_invalid_angle_is_config_error(capsys):
    assert run(["gp", "--bath-size", "1", "--theta", "9"]) == 1
    assert "theta" in capsys.readouterr().err


def test_south_pole_method_off_pole_is_numerical_error(capsys):
    code = run(["gp", "--bath-size", "1", "--theta", "1.0", "--method", "south_pole"])
    assert code == 2
    assert "numerical error" in capsys.readouterr().err


def test_coarse_grid_is_numerical_error(capsys):
    assert run(["gp", "--bath-size", "1", "--steps", "3"]) == 2
    assert "refine" in capsys.readouterr().err


def test_bloch_csv_contract(capsys):
    assert run(["bloch", "--bath-size", "1", "--steps", "5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,x,y,z"
    assert len(lines) == 6
    first = [float(s) for s in lines[1].split(",")]
    # defaults theta=pi/2, phi=0 start at (0, 1, 0)
    assert np.allclose(first, [0.0, 0.0, 1.0, 0.0], atol=1e-15)


def test_bloch_rejects_nonpositive_horizon(capsys):
    assert run(["bloch", "--bath-size", "1", "--t-end", "0"]) == 1


def test_bloch_json_rows(capsys):
    assert run(["bloch", "--bath-size", "1", "--steps", "4", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["columns"] == ["t", "x", "y", "z"]
    assert len(payload["rows"]) == 4
    assert payload["rows"][0][0] == 0.0


def test_surface_csv_contract(tmp_path):
    out = tmp_path / "surface.csv"
    assert run(SURFACE_ARGS + ["--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == SURFACE_CSV_HEADER
    assert len(lines) == 1 + 7 * 6
    prins, unws = [], []
    for line in lines[1:]:
        fields = line.split(",")
        assert len(fields) == 5
        for text in fields[:4]:
            assert format(float(text), ".17g") == text  # bit-exact round trip
        prins.append(float(fields[2]))
        unws.append(float(fields[3]))
        int(fields[4])
    assert np.array_equal(principal_value(np.array(unws)), np.array(prins))


def test_write_surface_csv_returns_byte_count():
    cfg = SystemConfig(omega=2.0, alpha1=0.6, alpha2=0.3, bath_size=2)
    grid = AngleGrid(n_theta=4, n_phi=3, theta_min=0.3, theta_max=2.8)
    surface = gp_surface(cfg, grid, 5.0, time_steps=301)
    sink = io.StringIO()
    written = write_surface_csv(surface, sink)
    assert written == len(sink.getvalue().encode("utf-8"))
    assert sink.getvalue().endswith("\n")


def test_surface_json_mirrors_csv(tmp_path):
    csv_path = tmp_path / "s.csv"
    json_path = tmp_path / "s.json"
    assert run(SURFACE_ARGS + ["--out", str(csv_path)]) == 0
    assert run(SURFACE_ARGS + ["--format", "json", "--out", str(json_path)]) == 0
    payload = json.loads(json_path.read_text())
    assert payload["columns"] == SURFACE_CSV_HEADER.split(",")
    assert payload["time_steps"] == 301
    csv_rows = [line.split(",") for line in csv_path.read_text().splitlines()[1:]]
    assert len(payload["rows"]) == len(csv_rows)
    for json_row, csv_row in zip(payload["rows"], csv_rows):
        assert json_row[0] == float(csv_row[0])
        assert json_row[2] == float(csv_row[2])
        assert json_row[4] == int(csv_row[4])


def test_config_file_reproduces_flag_run(tmp_path):
    flag_out = tmp_path / "flags.csv"
    cfg_out = tmp_path / "config.csv"
    assert run(SURFACE_ARGS + ["--out", str(flag_out)]) == 0
    cfg_text = "\n".join(
        [
            "subcommand=surface",
            "bath-size=2",
            "alpha1=0.6",
            "alpha2=0.3",
            "t-end=5",
            "steps=301  # comment survives",
            "n-theta=7",
            "n-phi=6",
            "theta-min=0.3",
            "theta-max=2.8",
        ]
    )
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text(cfg_text + "\n")
    assert run(["surface", "--config", str(cfg_path), "--out", str(cfg_out)]) == 0
    assert flag_out.read_bytes() == cfg_out.read_bytes()


def test_flags_override_config_file(tmp_path, capsys):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("subcommand=bloch\nbath-size=1\nsteps=9\n")
    assert run(["bloch", "--config", str(cfg_path), "--steps", "5"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 6  # header + 5, not + 9


def test_config_file_error_reporting(tmp_path):
    bad = tmp_path / "bad.cfg"

    bad.write_text("subcommand=gp\nomega=abc\n")
    with pytest.raises(ConfigError, match=r"line 2: invalid value for omega"):
        load_config(bad)

    bad.write_text("subcommand=gp\nomega=1.0\nomega=2.0\n")
    with pytest.raises(ConfigError, match=r"line 3: duplicate key 'omega'"):
        load_config(bad)

    bad.write_text("subcommand=gp\nvolume=3\n")
    with pytest.raises(ConfigError, match=r"line 2: unknown key 'volume'"):
        load_config(bad)

    bad.write_text("subcommand=gp\njust a line\n")
    with pytest.raises(ConfigError, match=r"line 2: expected key=value"):
        load_config(bad)

    bad.write_text("omega=1.0\n")
    with pytest.raises(ConfigError, match="does not declare a subcommand"):
        load_config(bad)


def test_config_subcommand_mismatch(tmp_path, capsys):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("subcommand=bloch\nbath-size=1\n")
    with pytest.raises(ConfigError, match="is for subcommand 'bloch'"):
        load_config(cfg_path, subcommand="gp")
    assert run(["gp", "--config", str(cfg_path)]) == 1
    assert "frustra-gp: error:" in capsys.readouterr().err


def test_run_config_round_trip(tmp_path):
    src = tmp_path / "src.cfg"
    src.write_text("subcommand=gp\nbath-size=3\ntheta=1.25\n")
    cfg = load_config(src)
    assert cfg.provenance["theta"] == "file"
    assert cfg.provenance["omega"] == "default"
    copy = tmp_path / "copy.cfg"
    copy.write_text(serialize_config(cfg))
    reloaded = load_config(copy)
    assert reloaded == cfg  # provenance excluded from equality
    assert reloaded is not cfg
    assert isinstance(cfg, RunConfig)


def test_threads_env_rejected_when_invalid(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "0")
    assert run(SURFACE_ARGS + ["--out", str(tmp_path / "x.csv")]) == 1
    assert THREADS_ENV in capsys.readouterr().err
    monkeypatch.setenv(THREADS_ENV, "soon")
    assert run(SURFACE_ARGS + ["--out", str(tmp_path / "y.csv")]) == 1


def test_threads_env_does_not_change_output_bytes(tmp_path, monkeypatch):
    one = tmp_path / "one.csv"
    three = tmp_path / "three.csv"
    monkeypatch.setenv(THREADS_ENV, "1")
    assert run(SURFACE_ARGS + ["--out", str(one)]) == 0
    monkeypatch.setenv(THREADS_ENV, "3")
    assert run(SURFACE_ARGS + ["--out", str(three)]) == 0
    assert one.read_bytes() == three.read_bytes()


def test_compare_csv_contract(tmp_path):
    args = [
        "compare",
        "--bath-size", "2",
        "--t-end", "5",
        "--steps", "301",
        "--n-theta", "7",
        "--n-phi", "6",
        "--theta-min", "0.3",
        "--theta-max", "2.8",
    ]
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    assert run(args + ["--out", str(first)]) == 0
    assert run(args + ["--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    lines = first.read_text().splitlines()
    assert lines[0] == "# metric=mean_dist_to_unitary"
    assert lines[1].startswith("# winner=")
    assert lines[2].startswith("label,omega,alpha1,alpha2,bath_size,")
    assert len(lines) == 3 + 4  # default couplings carry four strategies
    winner = lines[1].split("=", 1)[1]
    assert lines[3].split(",")[0] == winner


def test_compare_json_report(tmp_path):
    out = tmp_path / "report.json"
    args = [
        "compare",
        "--bath-size", "1",
        "--t-end", "4",
        "--steps", "201",
        "--n-theta", "5",
        "--n-phi", "4",
        "--theta-min", "0.4",
        "--theta-max", "2.7",
        "--couplings", "1,0;0.5,0.5",
        "--format", "json",
    ]
    assert run(args + ["--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert set(payload["ranking"]) == {"alpha1=1 alpha2=0", "alpha1=0.5 alpha2=0.5"}
    assert payload["winner"] == payload["ranking"][0]
    assert len(payload["entries"]) == 2
    assert payload["time_steps"] == [201, 201]


def test_compare_rejects_single_coupling(capsys):
    assert run(["compare", "--bath-size", "1", "--couplings", "1,0"]) == 1
    assert "at least two" in capsys.readouterr().err


def test_verify_cli(tmp_path, capsys):
    out = tmp_path / "verify.json"
    assert run(["verify", "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert stdout.count("PASS") == 6
    assert "FAIL" not in stdout
    assert f"report written to {out}" in stdout
    payload = json.loads(out.read_text())
    assert payload["all_passed"] is True
    assert len(payload["checks"]) == 6


def test_console_script_help_runs():
    exe = shutil.which("frustra-gp")
    assert exe is not None, "console script frustra-gp not installed"
    proc = subprocess.run(
        [exe, "--help"], capture_output=True, text=True, timeout=60
    )
    assert proc.returncode == 0
    assert "COMMAND" in proc.stdout
