"""Zero-delay coincidence level versus polarization angle, analytic and simulated.

    python3 scripts/fig5_polarization.py --out results/fig5
"""
import argparse
from pathlib import Path

import numpy as np

from _common import bright_config, run
from ionhom.output import read_csv, write_csv

ANGLES = "0,26,47,64,90"

p = argparse.ArgumentParser()
p.add_argument("--preset", default="ca-like")
p.add_argument("--out", default="results/fig5")
p.add_argument("--duration", type=float, default=0.12)
p.add_argument("--seed", type=int, default=11)
p.add_argument("--bin", type=float, default=0.2, help="ns; narrow bins keep the binning bias small")
args = p.parse_args()

out = Path(args.out)
cfg = bright_config(args.preset, out, response_fwhm_ns=0.0, stray_fraction=0.0)
run("hom", "--config", cfg, "--out", out, "--phi", ANGLES)
run("simulate", "--config", cfg, "--out", out, "--phi", ANGLES, "--duration", args.duration, "--seed", args.seed)
files = [out / f"sim_phi{a}.homtag" for a in ANGLES.split(",")]
run("correlate", *files, "--out", out, "--bin", args.bin, "--window", 10 * args.bin)

phis, sim, err = [], [], []
for a in ANGLES.split(","):
    _, h = read_csv(out / f"sim_phi{a}_corr.csv")
    mid = h["tau_ns"].size // 2
    phis.append(float(a))
    sim.append(h["g2"][mid])
    err.append(h["stderr"][mid])
phis, sim, err = map(np.array, (phis, sim, err))
law = 0.5 * np.sin(np.radians(phis)) ** 2
write_csv(out / "fig5_simulated.csv", {"bin_ns": args.bin}, ["phi_deg", "g2tot0_sim", "stderr", "half_sin2"],
          [phis, sim, err, law])
_, scan = read_csv(out / "polarization_scan.csv")
for row in zip(phis, scan["g2tot0"], sim, err):
    print("phi = {:4.0f}  analytic {:.4f}  simulated {:.4f} +- {:.4f}".format(*row))
print(f"reduced chi2 against sin^2(phi)/2: {np.mean(((sim - law) / err) ** 2):.2f}")
