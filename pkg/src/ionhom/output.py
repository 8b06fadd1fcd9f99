"""CSV and report writers. Every file starts with ``# key=value`` metadata lines."""
from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .correlator import HistogramResult
from .dynamics import CorrelationSeries


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".12g")
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def write_csv(path, meta: Mapping, columns: Sequence[str], data: Sequence[np.ndarray]) -> Path:
    path = Path(path)
    lines = [f"# {k}={_fmt(v)}" for k, v in meta.items()]
    lines.append(",".join(columns))
    cols = [np.asarray(c) for c in data]
    for row in zip(*cols):
        lines.append(",".join(_fmt(x.item() if hasattr(x, "item") else x) for x in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Inverse of :func:`write_csv` for numeric columns."""
    meta, header, rows = {}, None, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append([float(x) for x in line.split(",")])
    arr = np.array(rows, dtype=float).reshape(-1, len(header))
    return meta, {name: arr[:, i] for i, name in enumerate(header)}


def write_series(path, series: CorrelationSeries, meta: Mapping) -> Path:
    meta = {**meta, "kind": series.kind, "normalized": series.normalized}
    if series.kind == "G1":
        return write_csv(path, meta, ["tau_ns", "re", "im"],
                         [series.tau, series.values.real, series.values.imag])
    return write_csv(path, meta, ["tau_ns", "value"], [series.tau, series.values])


def write_histogram(path, hist: HistogramResult, meta: Mapping) -> Path:
    meta = {**meta, "mode": hist.mode, "bin_ns": hist.bin_width,
            "window_ns": float(np.max(np.abs(hist.bin_centers))),
            "rate_start_cps": hist.rates["start"], "rate_stop_cps": hist.rates["stop"],
            "duration_s": hist.duration, "tau": "t(stop) - t(start)"}
    for flag in hist.flags:
        meta = {**meta, "flag": flag}
    cols = ["tau_ns", "counts", "g2", "stderr"]
    data = [hist.bin_centers, hist.counts, hist.g2, hist.stderr]
    if hist.g2_plateau is not None:
        cols += ["g2_plateau", "stderr_plateau"]
        data += [hist.g2_plateau, hist.stderr_plateau]
    return write_csv(path, meta, cols, data)


def write_report(path, values: Mapping) -> Path:
    path = Path(path)
    path.write_text("".join(f"{k}={_fmt(v)}\n" for k, v in values.items()))
    return path


def read_report(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        k, _, v = line.partition("=")
        out[k] = v
    return out
