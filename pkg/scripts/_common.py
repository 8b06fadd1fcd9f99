"""Helpers shared by the figure scripts: run CLI subcommands and bin-average analytic curves."""
import copy
import json
from pathlib import Path

import numpy as np

from ionhom.cli import main
from ionhom.configfile import load_preset_raw


def run(*args) -> None:
    code = main([str(a) for a in args])
    if code != 0:
        raise SystemExit(code)


def bright_config(preset: str, out: Path, **detection) -> Path:
    """Preset with unit collection efficiency, so a short Monte Carlo run has plenty of photons."""
    raw = copy.deepcopy(load_preset_raw(preset))
    raw["detection"].update(solid_angle_fraction=1.0, fiber_coupling=1.0, optical_transmission=1.0,
                            quantum_efficiency=1.0, **detection)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{preset}_bright.json"
    path.write_text(json.dumps(raw, indent=1))
    return path


def bin_average(tau, values, centers, width):
    t = np.concatenate([-tau[:0:-1], tau])
    y = np.concatenate([values[:0:-1], values])
    fine = np.linspace(-0.5, 0.5, 201) * width
    return np.array([np.mean(np.interp(c + fine, t, y)) for c in centers])
