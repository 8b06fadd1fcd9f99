"""Excitation spectrum while scanning the red laser, showing the dark resonance.

    python3 scripts/spectrum.py --preset ca-like --out results/spectrum
"""
import argparse
from pathlib import Path

import numpy as np

from _common import run
from ionhom.output import read_csv

p = argparse.ArgumentParser()
p.add_argument("--preset", default="ca-like")
p.add_argument("--out", default="results/spectrum")
p.add_argument("--scan", choices=("green", "red"), default="red")
args = p.parse_args()

out = Path(args.out)
run("spectrum", "--config", args.preset, "--out", out, "--scan", args.scan, "--start", -100, "--stop", 100,
    "--points", 401)
meta, s = read_csv(out / f"spectrum_{args.scan}.csv")
rate = s["count_rate_cps"]
i = int(np.argmax(rate))
# dark resonance: deepest local minimum
interior = np.flatnonzero((rate[1:-1] < rate[:-2]) & (rate[1:-1] <= rate[2:])) + 1
print(f"maximum {rate[i]:.0f} counts/s at {s['detuning_mhz'][i]:.1f} MHz")
if interior.size:
    j = interior[np.argmin(rate[interior])]
    print(f"dark resonance at {s['detuning_mhz'][j]:.1f} MHz ({rate[j]:.0f} counts/s); "
          f"other laser detuned by {float(meta['fixed_detuning_mhz']):.2f} MHz")
