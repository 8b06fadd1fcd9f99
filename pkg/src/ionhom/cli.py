"""Command-line entry point: ``ionhom <subcommand> --config FILE --out DIR ...``.

Exit codes: 0 ok, 2 config or flag error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import output
from .config import InvalidConfig, mhz
from .configfile import RunConfig, load_config
from .correlator import HistogramConfig, NoData, correlate_tags
from .dynamics import DegenerateSteadyState, NoSignal, excitation_spectrum
from .interference import UndefinedContrast, polarization_scan
from .montecarlo import IntegrationFailure
from .pipeline import analytic, simulate
from .timetags import FormatError, read_timetags, write_timetags

log = logging.getLogger("ionhom")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _phis(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--phi: expected a comma-separated list of degrees, got {text!r}") from None
    if not vals:
        raise UsageError("--phi: empty list")
    for v in vals:
        if not 0.0 <= v <= 90.0:
            raise UsageError(f"--phi: {v} outside [0, 90] degrees")
    return vals


def _phi_tag(phi: float) -> str:
    return f"{phi:g}".replace(".", "p")


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _meta(args, rc: RunConfig, **extra) -> dict:
    return {"command": args.command, "config": str(args.config), "config_hash": rc.config_hash,
            "preset": rc.name, **extra}


def cmd_spectrum(args) -> list[Path]:
    rc = load_config(args.config)
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    grid_mhz = np.linspace(args.start, args.stop, args.points)
    spec = excitation_spectrum(rc.system, args.scan, mhz(grid_mhz))
    # detected counts/s per unit P1/2 population, as in effective_count_rate
    ch = rc.system.scheme.channel("P12", "S12")
    scale = ch.rate * ch.branching * 1e6 * rc.chain.efficiency * rc.detector.quantum_efficiency
    fixed = rc.system.laser({"green": "D32", "red": "S12"}[args.scan])  # the laser not being scanned
    path = output.write_csv(_out(args) / f"spectrum_{args.scan}.csv",
                            _meta(args, rc, scan=args.scan, fixed_detuning_mhz=fixed.detuning / mhz(1.0)),
                            ["detuning_mhz", "p_population", "count_rate_cps", "degenerate"],
                            [grid_mhz, spec.values, spec.values * scale, spec.degenerate.astype(int)])
    return [path]


def cmd_correlations(args) -> list[Path]:
    rc = load_config(args.config)
    run = analytic(rc)
    out = _out(args)
    meta = _meta(args, rc)
    g2m = run.measured(run.g2)
    paths = [
        output.write_series(out / "g1.csv", run.g1, meta),
        output.write_series(out / "g2.csv", run.g2, meta),
        output.write_series(out / "g2_measured.csv", g2m,
                            {**meta, "response_fwhm_ns": rc.detector.response_fwhm,
                             "background_fraction": run.background.fraction}),
    ]
    return paths


def cmd_hom(args) -> list[Path]:
    rc = load_config(args.config)
    phis = _phis(args.phi)
    run = analytic(rc)
    out = _out(args)
    paths = []
    for phi in phis:
        ideal, meas = run.hom(phi)
        meta = _meta(args, rc, phi_deg=phi, response_fwhm_ns=rc.detector.response_fwhm,
                     background_fraction=run.background.fraction)
        paths.append(output.write_csv(out / f"hom_phi{_phi_tag(phi)}.csv", meta,
                                      ["tau_ns", "g2tot", "g2tot_measured"],
                                      [ideal.tau, ideal.values, meas.values]))
    scan = polarization_scan(run.g1, run.g2, phis)
    meas0 = [run.hom(phi)[1].values[0] for phi in phis]
    paths.append(output.write_csv(out / "polarization_scan.csv", _meta(args, rc),
                                  ["phi_deg", "g2tot0", "g2tot0_measured", "half_sin2"],
                                  [np.array([p for p, _ in scan]), np.array([v for _, v in scan]),
                                   np.array(meas0), 0.5 * np.sin(np.radians(phis)) ** 2]))
    report = {"config_hash": rc.config_hash, **run.summary()}
    paths.append(output.write_report(out / "contrast.txt", report))
    return paths


def cmd_simulate(args) -> list[Path]:
    rc = load_config(args.config)
    phis = _phis(args.phi)
    seed = rc.simulation.seed if args.seed is None else args.seed
    duration = rc.simulation.duration if args.duration is None else args.duration
    if not duration > 0:
        raise UsageError("--duration must be > 0")
    if not 0 <= seed < 2**64:
        raise UsageError("--seed must be in [0, 2^64)")
    run = analytic(rc)
    out = _out(args)
    paths = []
    for phi, (i3, i4) in simulate(run, phis, seed, duration).items():
        path = out / f"sim_phi{_phi_tag(phi)}.homtag"
        meta = {"format": "HOMTAG1", "duration_s": duration, "seed": seed, "phi_deg": phi,
                "config_hash": rc.config_hash, "config": str(args.config),
                "counts": {"I3": len(i3), "I4": len(i4)}}
        write_timetags(path, i3.times, i4.times, meta)
        log.info("%s: I3=%d I4=%d", path.name, len(i3), len(i4))
        paths.append(path)
    return paths


def cmd_correlate(args) -> list[Path]:
    try:
        cfg = HistogramConfig(args.bin, args.window, args.mode, args.start)
    except ValueError as e:
        raise UsageError(str(e)) from None
    out = _out(args)
    paths = []
    for f in args.files:
        f = Path(f)
        tags = read_timetags(f)
        hist = correlate_tags(tags, cfg)
        src = tags.meta
        meta = {"command": "correlate", "source": f.name, "config_hash": src.get("config_hash", "unknown"),
                "seed": src.get("seed", "unknown"), "phi_deg": src.get("phi_deg", "unknown"),
                "start_channel": args.start}
        paths.append(output.write_histogram(out / f"{f.stem}_corr.csv", hist, meta))
    return paths


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ionhom", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="config JSON or preset name (ba-like, ca-like)")
        sp.add_argument("--out", default=".", help="output directory")

    sp = sub.add_parser("spectrum", help="excitation spectrum (P1/2 population vs detuning)")
    common(sp)
    sp.add_argument("--scan", choices=("green", "red"), default="red")
    sp.add_argument("--start", type=float, default=-100.0, help="first detuning, MHz")
    sp.add_argument("--stop", type=float, default=100.0, help="last detuning, MHz")
    sp.add_argument("--points", type=int, default=201)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("correlations", help="single-ion g1 and g2")
    common(sp)
    sp.set_defaults(func=cmd_correlations)

    sp = sub.add_parser("hom", help="two-ion g2_tot(tau, phi) and contrast report")
    common(sp)
    sp.add_argument("--phi", default="0,90", help="comma-separated polarization angles, degrees")
    sp.set_defaults(func=cmd_hom)

    sp = sub.add_parser("simulate", help="Monte Carlo time-tag files")
    common(sp)
    sp.add_argument("--phi", default="0,90")
    sp.add_argument("--duration", type=float, default=None, help="seconds (default from config)")
    sp.add_argument("--seed", type=int, default=None, help="default from config")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("correlate", help="coincidence histograms from time-tag files")
    common(sp, config=False)
    sp.add_argument("files", nargs="+")
    sp.add_argument("--bin", type=float, default=1.0, help="bin width, ns")
    sp.add_argument("--window", type=float, default=50.0, help="lag range +-ns")
    sp.add_argument("--mode", choices=("multistop", "tac"), default="multistop")
    sp.add_argument("--start", choices=("I3", "I4"), default="I3", help="start channel")
    sp.set_defaults(func=cmd_correlate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        for path in args.func(args):
            print(path)
    except (FormatError, OSError) as e:
        print(f"ionhom: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (InvalidConfig, UsageError) as e:
        print(f"ionhom: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateSteadyState, NoSignal, IntegrationFailure, UndefinedContrast, NoData,
            np.linalg.LinAlgError) as e:
        print(f"ionhom: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"ionhom: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
