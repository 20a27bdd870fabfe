import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from sta_transport import cli, dynamics_oracle, optimizer
from sta_transport.errors import OptimizationError
from sta_transport.numerics import loglog_slope


def run(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], np.array(rows[1:], dtype=float)
    return {name: data[:, i] for i, name in enumerate(header)}


def test_waveform(tmp_path, capsys):
    out = tmp_path / "w.csv"
    code, _, _ = run(["waveform", "--out", str(out), "--samples", "1001"], capsys)
    assert code == 0
    cols = read_csv(out)
    assert list(cols) == ["time_s", "U1_V", "U2_V", "U1_rate_Vps", "U2_rate_Vps"]
    assert cols["U1_V"][0] == pytest.approx(-8.65, rel=5e-3)
    assert cols["U2_V"][0] == 0.0
    np.testing.assert_allclose(cols["U1_V"][::-1], cols["U2_V"], atol=1e-6)


def test_samples_must_be_two_or_more(capsys):
    code, _, err = run(["waveform", "--samples", "1"], capsys)
    assert code == 2 and "samples" in err


def test_trace_summary(tmp_path, capsys):
    out, summary = tmp_path / "t.csv", tmp_path / "t.json"
    code, _, _ = run(["trace", "--out", str(out), "--summary", str(summary)], capsys)
    assert code == 0
    report = json.loads(summary.read_text())
    assert report["P_CS_rectified_at_0_W"] == pytest.approx(1.45, rel=2e-2)
    assert report["P_PS_abs_at_0_W"] == pytest.approx(4.28e-12, rel=1e-2)


def test_trace_table_preset_energy(capsys, tmp_path):
    code, out, _ = run(["trace", "--preset", "table", "--out", str(tmp_path / "t.csv")], capsys)
    assert code == 0
    assert json.loads(out)["E_CS_J"] == pytest.approx(1.882e-7, rel=1e-2)


def test_summary_rederivable_from_csv(tmp_path, capsys):
    out, summary = tmp_path / "t.csv", tmp_path / "t.json"
    assert run(["trace", "--out", str(out), "--summary", str(summary)], capsys)[0] == 0
    c, s = read_csv(out), json.loads(summary.read_text())
    t = c["time_s"]
    derived = {
        "duration_tf_s": t[-1],
        "E_PS_J": np.trapezoid(np.abs(c["P_PS_W"]), t),
        "E_PS_f0_J": np.trapezoid(np.abs(c["P_PS_f0_W"]), t),
        "E_CS_J": np.trapezoid(c["P_CS_rectified_W"], t),
        "P_PS_abs_at_0_W": abs(c["P_PS_W"][0]),
        "P_CS_rectified_at_0_W": c["P_CS_rectified_W"][0],
        "P_PS_peak_W": np.max(np.abs(c["P_PS_W"])),
        "P_CS_peak_W": np.max(c["P_CS_rectified_W"]),
        "P_PS_peak_closed_form_W": abs(c["P_PS_W"][0]),
        "P_CS_peak_closed_form_W": c["P_CS_signed_W"][0],
    }
    assert set(derived) == set(s)
    for key, value in derived.items():
        assert s[key] == pytest.approx(value, rel=5e-3), key


def test_csv_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run(["trace", "--samples", "301", "--out", str(path)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_degenerate_config_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"spacing_d_m": 0.0}))
    code, _, err = run(["trace", "--config", str(cfg)], capsys)
    assert code == 2 and "spacing" in err


@pytest.mark.parametrize("payload", [{"width_cm": 1.0}, [1, 2], {"polynomial": "cubic"}])
def test_bad_config_documents(tmp_path, capsys, payload):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(payload))
    assert run(["waveform", "--config", str(cfg)], capsys)[0] == 2


def test_missing_config_file(tmp_path, capsys):
    assert run(["waveform", "--config", str(tmp_path / "nope.json")], capsys)[0] == 2


def test_config_septic_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"polynomial": {"kind": "septic", "a6_m": -0.0094, "a7_m": 0.0027},
                               "resistance_R_ohm": 3.0, "duration_tf_s": 1e-6}))
    code, out, _ = run(["trace", "--config", str(cfg), "--tf", "4.18e-7", "--out", str(tmp_path / "t.csv")], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["duration_tf_s"] == 4.18e-7
    assert report["E_CS_J"] == pytest.approx(1.572e-7, rel=1e-2)
    assert report["P_CS_peak_closed_form_W"] is None


def test_sweep(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(["sweep", "--tf-min", "0.05e-6", "--tf-max", "1e-6", "--points", "30", "--log",
                      "--out", str(out)], capsys)
    assert code == 0
    c = read_csv(out)
    assert list(c) == ["tf_s", "E_PS_J", "E_CS_J", "E_rf_J", "P_PS_peak_W", "P_CS_peak_W"]
    assert loglog_slope(c["tf_s"], c["E_PS_J"]) == pytest.approx(-2.0, abs=0.1)
    np.testing.assert_allclose(c["E_rf_J"], c["tf_s"] * 1.0)


def test_sweep_peak_row(capsys):
    code, out, _ = run(["sweep", "--tf-min", "1e-7", "--tf-max", "1e-6", "--points", "3"], capsys)
    assert code == 0
    first = out.splitlines()[1].split(",")
    assert float(first[0]) == 1e-7
    assert float(first[5]) == pytest.approx(6455.0, rel=1e-2)
    assert float(first[4]) == pytest.approx(3.13e-10, rel=1e-2)


def test_sweep_parallel_matches_serial(capsys):
    args = ["sweep", "--tf-min", "1e-7", "--tf-max", "1e-6", "--points", "4"]
    serial = run(args, capsys)[1]
    parallel = run(args + ["--jobs", "2"], capsys)[1]
    assert serial == parallel


@pytest.mark.parametrize("args", [
    ["--tf-min", "1e-7", "--tf-max", "1e-6", "--points", "2"],
    ["--tf-min", "1e-6", "--tf-max", "1e-7"],
    ["--tf-min", "1e-7"],
])
def test_sweep_usage_errors(capsys, args):
    assert run(["sweep"] + args, capsys)[0] == 2


def test_optimize_e_cs(capsys):
    code, out, _ = run(["optimize", "--objective", "e_cs", "--preset", "table", "--grid", "2"], capsys)
    assert code == 0
    report = json.loads(out)["optimization"]
    assert report["E_CS_J"] == pytest.approx(1.572e-7, rel=1e-2)
    assert report["a6_m"] == pytest.approx(-0.0094, abs=2e-3)


def test_optimize_bad_objective(capsys):
    assert run(["optimize", "--objective", "bogus"], capsys)[0] == 2
    assert run(["optimize"], capsys)[0] == 2


def test_optimize_failure_exit_code(capsys, monkeypatch):
    def fail(*args, **kwargs):
        raise OptimizationError("no start converged", [{"start": (0.0, 0.0), "converged": False}])

    monkeypatch.setattr(optimizer, "optimize", fail)
    code, _, err = run(["optimize", "--objective", "e_ps"], capsys)
    assert code == 3 and "converged" in err


def test_verify(capsys):
    code, out, _ = run(["verify"], capsys)
    report = json.loads(out)
    assert code == 0 and report["passed"]
    assert report["quadratic"]["excitation_energy_J"] < report["excitation_floor_J"]


def test_verify_slow_protocol(capsys):
    code, out, _ = run(["verify", "--tf", "1e-5"], capsys)
    assert code == 0
    assert json.loads(out)["full"]["relative_excitation"] < 1e-4


def test_verify_without_compensation(capsys):
    code, out, _ = run(["verify", "--no-compensation"], capsys)
    report = json.loads(out)
    assert code == 0
    assert report["full"]["excitation_energy_J"] > 1e6 * max(report["quadratic"]["excitation_energy_J"], 1e-60)


def test_verify_escape_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(dynamics_oracle, "initial_minimum", lambda s, c=True: 0.0)
    monkeypatch.setattr(dynamics_oracle, "_axial_force", lambda s, x, t, c: 1e-12)
    code, _, err = run(["verify"], capsys)
    assert code == 4 and "trapping region" in err


def test_unknown_command(capsys):
    assert run(["plot"], capsys)[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sta_transport", "waveform", "--samples", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "time_s,U1_V,U2_V,U1_rate_Vps,U2_rate_Vps"
