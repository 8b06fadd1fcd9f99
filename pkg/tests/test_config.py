import copy
import json

import numpy as np
import pytest

from ionhom.config import InvalidConfig
from ionhom.configfile import config_hash, load_config, load_preset_raw, parse_config


@pytest.fixture
def raw():
    return load_preset_raw("ca-like")


def test_presets_load():
    for name in ("ba-like", "ca-like", "Ba_like"):
        rc = load_config(name)
        assert rc.system.scheme.dim == 8
        assert len(rc.config_hash) == 40


def test_hash_is_canonical(raw):
    shuffled = json.loads(json.dumps(dict(reversed(list(raw.items())))))
    assert config_hash(raw) == config_hash(shuffled)
    other = copy.deepcopy(raw)
    other["simulation"]["seed"] = 3
    assert config_hash(raw) != config_hash(other)


def test_file_round_trip(tmp_path, raw):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(raw))
    a, b = load_config(p), parse_config(raw)
    assert a.config_hash == b.config_hash
    assert a.system == b.system


@pytest.mark.parametrize("path,value,field", [
    (("scheme", "gamma_mhz"), -1.0, "scheme.gamma_mhz"),
    (("scheme", "branching_s"), 1.5, "scheme.branching_s"),
    (("lasers", 0, "rabi_mhz"), "x", "rabi_mhz"),
    (("lasers", 1, "transition"), ["S12", "D32"], "lasers[1]"),
    (("detection", "quantum_efficiency"), 0.0, "detection"),
    (("simulation", "seed"), -4, "simulation.seed"),
    (("simulation", "collection_weights"), [1, 0], "collection_weights"),
])
def test_invalid_fields_are_named(raw, path, value, field):
    node = raw
    for k in path[:-1]:
        node = node[k]
    node[path[-1]] = value
    with pytest.raises(InvalidConfig, match=field.replace("[", r"\[").replace("]", r"\]")):
        parse_config(raw)


def test_laser_count_enforced(raw):
    raw["lasers"] = raw["lasers"][:1]
    with pytest.raises(InvalidConfig):
        parse_config(raw)


def test_bad_json_and_unknown_preset(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(InvalidConfig):
        load_config(p)
    with pytest.raises(InvalidConfig):
        load_preset_raw("sr-like")


def test_tau_grid(raw):
    rc = parse_config(raw)
    tau = rc.simulation.tau
    assert tau[0] == 0 and tau[-1] == pytest.approx(200.0)
    assert np.allclose(np.diff(tau), 0.05)


def test_background_fraction(raw):
    raw["detection"]["stray_fraction"] = 0.0151
    raw["detection"]["dark_rate_cps"] = 100.0
    rc = parse_config(raw)
    s = 10000.0
    stray = s * 0.0151 / (1 - 0.0151)
    assert rc.background(s).fraction == pytest.approx((stray + 100.0) / (s + stray + 100.0))
