import json

import numpy as np
import pytest

from ionhom.cli import main
from ionhom.configfile import load_preset_raw
from ionhom.output import read_csv, read_report


def test_hom_outputs(tmp_path):
    assert main(["hom", "--config", "ca-like", "--out", str(tmp_path), "--phi", "0,45,90"]) == 0
    meta, cols = read_csv(tmp_path / "hom_phi90.csv")
    assert cols["g2tot"][0] == 0.5
    assert len(meta["config_hash"]) == 40
    _, scan = read_csv(tmp_path / "polarization_scan.csv")
    assert np.allclose(scan["g2tot0"], scan["half_sin2"], atol=1e-12)
    rep = read_report(tmp_path / "contrast.txt")
    assert float(rep["contrast_ideal"]) == pytest.approx(1.0, abs=1e-9)


def test_correlations_and_spectrum(tmp_path):
    assert main(["correlations", "--config", "ba-like", "--out", str(tmp_path)]) == 0
    _, g2 = read_csv(tmp_path / "g2.csv")
    assert g2["value"][0] <= 1e-9
    assert main(["spectrum", "--config", "ba-like", "--out", str(tmp_path), "--points", "5"]) == 0
    _, sp = read_csv(tmp_path / "spectrum_red.csv")
    assert sp["p_population"].shape == (5,)


def test_simulate_then_correlate(tmp_path):
    out = str(tmp_path)
    assert main(["simulate", "--config", "ca-like", "--out", out, "--phi", "90", "--duration", "0.002"]) == 0
    f = tmp_path / "sim_phi90.homtag"
    side = json.loads((tmp_path / "sim_phi90.homtag.json").read_text())
    assert side["duration_s"] == 0.002 and side["phi_deg"] == 90.0
    assert main(["correlate", str(f), "--out", out]) == 0
    meta, cols = read_csv(tmp_path / "sim_phi90_corr.csv")
    assert meta["config_hash"] == side["config_hash"]
    assert cols["tau_ns"].size == 101


def test_exit_codes(tmp_path):
    out = str(tmp_path)
    assert main(["hom", "--config", str(tmp_path / "missing.json"), "--out", out]) == 4
    (tmp_path / "broken.json").write_text("{")
    assert main(["hom", "--config", str(tmp_path / "broken.json"), "--out", out]) == 2
    assert main(["hom", "--config", "ca-like", "--out", out, "--phi", "120"]) == 2
    bad = tmp_path / "bad.homtag"
    bad.write_bytes(b"garbage!")
    assert main(["correlate", str(bad), "--out", out]) == 4
    assert main(["correlate", str(tmp_path / "missing.homtag"), "--out", out]) == 4
    assert main(["correlate", str(bad), "--out", out, "--bin", "1", "--window", "2.5"]) == 2
    raw = load_preset_raw("ca-like")
    raw["lasers"][0]["rabi_mhz"] = 0.0
    raw["lasers"][1]["rabi_mhz"] = 0.0
    raw["field"]["gauss"] = 0.0
    p = tmp_path / "dark.json"
    p.write_text(json.dumps(raw))
    assert main(["hom", "--config", str(p), "--out", out]) == 3
