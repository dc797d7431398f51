import json
import subprocess
import sys

import numpy as np
import pytest

from qwrecur import cli
from qwrecur import coins as C
from qwrecur.formats import read_series_csv, save_coin


def run(*args):
    return cli.main([str(a) for a in args])


def test_walk_outputs(tmp_path, capsys):
    out = tmp_path / "w"
    assert run("walk", "--coin", "grover", "--state", "psi_S", "--t-max", 80,
               "--snapshots", "0,10", "--out-dir", out) == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "series.csv", "snapshot_t0.csv", "snapshot_t10.csv", "summary.json"]
    s = read_series_csv(out / "series.csv")
    assert s.t[-1] == 80 and len(s) == 41
    summary = json.loads((out / "summary.json").read_text())
    assert summary["engine"] == "direct" and summary["norm_deviation"] < 1e-12
    assert "grover" in capsys.readouterr().out


def test_deterministic(tmp_path):
    for d in ("a", "b"):
        assert run("walk", "--coin", "fourier", "--state", "e1", "--t-max", 60, "--out-dir", tmp_path / d) == 0
    for name in ("series.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"coin": "grover", "state": "psi_G", "t_max": 20, "out_dir": str(tmp_path / "o")}))
    assert run("walk", "--config", cfg, "--t-max", 30) == 0
    assert read_series_csv(tmp_path / "o" / "series.csv").t[-1] == 30
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    np.testing.assert_allclose(np.array(summary["state"])[:, 0], [0.5, -0.5, -0.5, 0.5])


def test_bad_config_exit_codes(tmp_path, capsys):
    assert run("walk", "--coin", "nope", "--out-dir", tmp_path) == 2
    assert run("walk", "--coin", "hadamard", "--state", "psi_S", "--out-dir", tmp_path) == 2
    assert run("walk", "--coin", "fourier", "--state", "psi_F", "--out-dir", tmp_path) == 2
    assert run("walk", "--config", tmp_path / "missing.json") == 2
    assert list(tmp_path.iterdir()) == []
    assert "error" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        run("frobnicate")


def test_memory_cap_exit(tmp_path, monkeypatch):
    monkeypatch.setenv("QWRECUR_MEM_CAP_BYTES", "1000")
    assert run("walk", "--coin", "grover", "--t-max", 50, "--out-dir", tmp_path / "m") == 1
    assert not (tmp_path / "m").exists() or list((tmp_path / "m").iterdir()) == []


def test_partial_outputs_removed(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr(cli, "write_json", boom)
    out = tmp_path / "p"
    assert run("walk", "--coin", "hadamard", "--t-max", 20, "--out-dir", out) == 1
    assert list(out.iterdir()) == []


def test_polya_tensor(tmp_path):
    assert run("polya", "--tensor-hadamard", "-d", 3, "--t-max", 200, "--out-dir", tmp_path) == 0
    r = json.loads((tmp_path / "polya.json").read_text())
    assert r["engine"] == "product" and r["estimate"] == pytest.approx(0.128414630889, abs=1e-12)
    assert set(r["cutoff_sensitivity"]) == {"100", "200"}


def test_polya_classical(tmp_path):
    assert run("polya", "--classical", "-d", 2, "--out-dir", tmp_path) == 0
    r = json.loads((tmp_path / "polya.json").read_text())
    assert r["polya"] == 1.0 and r["divergent"]


def test_polya_surface(tmp_path):
    assert run("polya", "--surface", "fourier", "--terms", 10, "--a-step", 0.25,
               "--phi-points", 8, "--out-dir", tmp_path) == 0
    summary = json.loads((tmp_path / "surface_summary.json").read_text())
    assert summary["n_terms"] == 10 and summary["min"]["a"] == 0.5
    lines = (tmp_path / "surface.csv").read_text().splitlines()
    assert lines[0] == "a,phi,polya" and len(lines) == 1 + 4 * 8
    assert (tmp_path / "k_model.csv").read_text().startswith("t,K1,K2\n2,1,")


def test_spectral(tmp_path, capsys):
    assert run("spectral", "--coin", "grover", "--state", "psi_G", "-N", 64, "--out-dir", tmp_path) == 0
    r = json.loads((tmp_path / "saddles.json").read_text())
    assert r["flat_band_overlap"]["verdict"] == "not localized by flat bands"
    assert r["predicted_exponent"] == 2.0 and len(r["points"]) == 8
    assert (tmp_path / "bands.csv").read_text().startswith("k1,k2,band,omega\n")


def test_spectral_1d_alpha(tmp_path):
    assert run("spectral", "--coin", "hadamard1d", "--alpha", 0.7, "-N", 128, "--out-dir", tmp_path) == 0
    r = json.loads((tmp_path / "saddles.json").read_text())
    ks = sorted({round(p["k"][0], 9) for p in r["points"]})
    assert ks == sorted(round(float(np.angle(np.exp(1j * (0.7 + s * np.pi / 2)))), 9) for s in (1, -1))


def test_sweep(tmp_path):
    assert run("sweep", "--coin", "fourier", "--state", "psi_F", "--sweep-a", "0.2,0.5",
               "--sweep-phi", "0:3:3", "--t-max", 20, "--out-dir", tmp_path) == 0
    index = json.loads((tmp_path / "index.json").read_text())
    assert len(index["points"]) == 6
    assert all((tmp_path / p["file"]).exists() for p in index["points"])
    assert index["points"][1]["params"] == {"a": 0.2, "phi": 1.5}


def test_sweep_validates_before_running(tmp_path):
    assert run("sweep", "--coin", "fourier", "--state", "psi_F", "--sweep-a", "0.2,0.9",
               "--phi", 0.0, "--t-max", 10, "--out-dir", tmp_path) == 2
    assert list(tmp_path.iterdir()) == []


def test_coin_file(tmp_path):
    save_coin(tmp_path / "c.json", C.unbiased_coin_1d(0.3, 0.1), C.basis_state(2, 1))
    assert run("walk", "--coin", tmp_path / "c.json", "--t-max", 10, "--out-dir", tmp_path / "o") == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["state"] == [[0.0, 0.0], [1.0, 0.0]]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qwrecur", "polya", "--classical", "-d", "3",
                           "--t-max", "100", "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0 and "classical d=3" in proc.stdout
