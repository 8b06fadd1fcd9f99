"""Single-ion intensity correlation with timing response and background (antibunching and nutation).

    python3 scripts/fig3_inset.py --preset ba-like --out results/fig3_inset
"""
import argparse
from pathlib import Path

from _common import run
from ionhom.output import read_csv, read_report

p = argparse.ArgumentParser()
p.add_argument("--preset", default="ba-like")
p.add_argument("--out", default="results/fig3_inset")
args = p.parse_args()

out = Path(args.out)
run("correlations", "--config", args.preset, "--out", out)
run("hom", "--config", args.preset, "--out", out)
meta, g2m = read_csv(out / "g2_measured.csv")
rep = read_report(out / "contrast.txt")
print(f"measured g2(0) = {g2m['value'][0]:.4f} (background fraction {float(meta['background_fraction']):.4f})")
print(f"first nutation maximum: g2 = {float(rep['g2_peak_value']):.2f} at {float(rep['g2_peak_tau_ns']):.2f} ns")
