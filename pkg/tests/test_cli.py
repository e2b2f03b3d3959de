import json
import math

import numpy as np
import pytest

from wavefront.cli import main


@pytest.fixture
def local_model_file(tmp_path):
    cfg = {"family": "local_delayed_rd", "c": 2.5, "L": 2.0, "delay": 0.0,
           "nonlinearity": {"kind": "logistic", "rate": 2.0, "carrying": 1.0}}
    p = tmp_path / "model.json"
    p.write_text(json.dumps(cfg))
    return p


def write_model(tmp_path, **overrides):
    cfg = {"family": "local_delayed_rd", "c": 2.5, "L": 2.0, "delay": 0.0,
           "nonlinearity": {"kind": "logistic", "rate": 2.0, "carrying": 1.0}}
    cfg.update(overrides)
    p = tmp_path / "model.json"
    p.write_text(json.dumps(cfg))
    return p


def read_json(path):
    return json.loads(path.read_text())


def test_analyze_writes_spectral_data(local_model_file, tmp_path):
    out = tmp_path / "out"
    rc = main(["analyze", "--model", str(local_model_file), "--out", str(out)])
    assert rc == 0
    data = read_json(out / "spectral.json")
    assert data["lambda_l"] == pytest.approx(0.5, abs=1e-8)
    assert data["lambda_r"] == pytest.approx(2.0, abs=1e-8)
    assert data["critical"] is False
    assert "version" in data and "config_hash" in data
    trace = (out / "chi_trace.csv").read_text().splitlines()
    assert trace[0] == "x,chi"
    assert len(trace) > 100


def test_analyze_no_roots_exit_code(tmp_path, capsys):
    model = write_model(tmp_path, c=1.0)
    out = tmp_path / "out"
    rc = main(["analyze", "--model", str(model), "--out", str(out)])
    assert rc == 1
    err = capsys.readouterr().err
    assert "no positive zero" in err
    assert "no semi-wavefront" in err
    data = read_json(out / "spectral.json")
    assert data["no_roots"] is True


def test_malformed_model_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    rc = main(["analyze", "--model", str(bad), "--out", str(tmp_path / "o")])
    assert rc == 64
    assert "invalid input" in capsys.readouterr().err


def test_missing_key_is_usage_error(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"family": "local_delayed_rd"}))
    rc = main(["analyze", "--model", str(p), "--out", str(tmp_path / "o")])
    assert rc == 64


def test_speed_command(local_model_file, tmp_path):
    out = tmp_path / "out"
    rc = main(["speed", "--model", str(local_model_file), "--out", str(out)])
    assert rc == 0
    data = read_json(out / "speed.json")
    assert data["c_star"] == pytest.approx(2.0, abs=1e-6)
    assert data["z_star"] == pytest.approx(1.0, abs=1e-6)


def test_speed_command_delayed(tmp_path):
    model = write_model(tmp_path, delay=1.0)
    out = tmp_path / "out"
    rc = main(["speed", "--model", str(model), "--out", str(out)])
    assert rc == 0
    data = read_json(out / "speed.json")
    assert data["c_star"] == pytest.approx(math.sqrt(math.log(2.0)), abs=1e-8)


def test_solve_command(local_model_file, tmp_path):
    out = tmp_path / "out"
    rc = main(["solve", "--model", str(local_model_file), "--out", str(out),
               "--grid=-60,40,2048", "--tol", "1e-8"])
    assert rc == 0
    meta = read_json(out / "solve.json")
    assert meta["plateau"] == pytest.approx(0.5, abs=1e-6)
    assert meta["convergence"]["residual"] < 1e-5
    rows = np.loadtxt(out / "profile.csv", delimiter=",", skiprows=1)
    kappa = meta["plateau"]
    assert rows[0, 1] < 1e-3 * kappa
    assert abs(rows[-1, 1] - kappa) < 1e-4


def test_solve_below_c_star_reports_no_wave(tmp_path, capsys):
    model = write_model(tmp_path, c=1.0)
    out = tmp_path / "out"
    rc = main(["solve", "--model", str(model), "--out", str(out),
               "--grid=-60,40,1024", "--max-iter", "400"])
    assert rc == 1
    data = read_json(out / "solve.json")
    assert "error" in data


def test_scan_command(local_model_file, tmp_path):
    out = tmp_path / "out"
    rc = main(["scan", "--model", str(local_model_file), "--out", str(out),
               "--y-max", "50", "--density", "40"])
    assert rc == 0
    data = read_json(out / "scan.json")
    assert data["pass"] is True
    assert data["min_abs_chi"] > 1e-3


def test_verify_command(tmp_path):
    model = write_model(tmp_path, c=2.5)
    out = tmp_path / "out"
    rc = main(["verify", "--model", str(model), "--out", str(out),
               "--grid=-60,40,2048", "--tol", "1e-8"])
    assert rc == 0
    data = read_json(out / "verify.json")
    assert data["verdict"] == "pass"
    names = [c["name"] for c in data["checks"]]
    assert "mollison" in names and "uniqueness_probe" in names
    text = (out / "verify.txt").read_text()
    assert "verdict: PASS" in text


def test_verify_command_critical_records_decay_order(tmp_path):
    model = write_model(tmp_path, c=2.0)
    out = tmp_path / "out"
    rc = main(["verify", "--model", str(model), "--out", str(out),
               "--grid=-60,40,2048", "--tol", "1e-7", "--max-iter", "40000"])
    assert rc == 0
    data = read_json(out / "verify.json")
    probe = [c for c in data["checks"] if c["name"] == "uniqueness_probe"][0]
    assert probe["details"]["classification"] == "critical"
    assert probe["details"]["decay_orders"] == [1, 1]


def test_outputs_are_deterministic(local_model_file, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["scan", "--model", str(local_model_file), "--out", str(out),
                     "--seed", "7"]) == 0
    assert (out1 / "scan.json").read_bytes() == (out2 / "scan.json").read_bytes()


def test_analyze_with_tabulated_kernel(tmp_path):
    ts = np.linspace(-8.0, 8.0, 801)
    vals = np.exp(-ts * ts / 2.0) / math.sqrt(2 * math.pi)
    csv = tmp_path / "J.csv"
    csv.write_text("# t,value\n" + "\n".join(f"{t},{v}" for t, v in zip(ts, vals)))
    cfg = {"family": "nonlocal_kpp", "c": 3.0,
           "kernel": {"shape": "tabulated", "path": str(csv)},
           "nonlinearity": {"kind": "logistic", "rate": 2.0, "carrying": 1.0}}
    model = tmp_path / "m.json"
    model.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    rc = main(["analyze", "--model", str(model), "--out", str(out)])
    assert rc == 0
    data = read_json(out / "spectral.json")
    # the tabulated dispersal is a close surrogate of the analytic one
    assert data["lambda_l"] == pytest.approx(0.7880, abs=5e-3)


def test_cli_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "wavefront" in capsys.readouterr().out
