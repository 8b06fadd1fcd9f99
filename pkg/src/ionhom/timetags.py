"""HOMTAG1 time-tag files.

Layout: 8-byte magic ``HOMTAG1\\0`` followed by packed little-endian records
of 9 bytes, ``u8 channel`` (0 = I3, 1 = I4) then ``u64 time`` in ps. A JSON
sidecar ``<file>.json`` carries duration, seed and config hash.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"HOMTAG1\0"
RECORD = np.dtype([("channel", "u1"), ("time", "<u8")])
assert RECORD.itemsize == 9


class FormatError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass
class TimeTags:
    i3: np.ndarray  # int64 ps, sorted
    i4: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def counts(self) -> dict[str, int]:
        return {"I3": int(self.i3.size), "I4": int(self.i4.size)}


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_timetags(path, i3: np.ndarray, i4: np.ndarray, meta: dict | None = None) -> None:
    i3 = np.asarray(i3, dtype=np.int64)
    i4 = np.asarray(i4, dtype=np.int64)
    if (i3.size and i3.min() < 0) or (i4.size and i4.min() < 0):
        raise ValueError("time tags must be non-negative")
    times = np.concatenate([i3, i4])
    chans = np.concatenate([np.zeros(i3.size, np.uint8), np.ones(i4.size, np.uint8)])
    order = np.lexsort((chans, times))
    rec = np.empty(times.size, dtype=RECORD)
    rec["channel"] = chans[order]
    rec["time"] = times[order]
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(rec.tobytes())
    if meta is not None:
        sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_timetags(path) -> TimeTags:
    """Read and validate a HOMTAG1 file; streams come back split by channel."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < len(MAGIC) or raw[:len(MAGIC)] != MAGIC:
        raise FormatError("bad magic, not a HOMTAG1 file", 0)
    body = memoryview(raw)[len(MAGIC):]
    n, rem = divmod(len(body), RECORD.itemsize)
    if rem:
        raise FormatError(f"truncated record ({rem} trailing bytes)", len(MAGIC) + n * RECORD.itemsize)
    rec = np.frombuffer(body, dtype=RECORD, count=n)
    chans = rec["channel"]
    bad = np.flatnonzero(chans > 1)
    if bad.size:
        raise FormatError(f"invalid channel {chans[bad[0]]}", len(MAGIC) + int(bad[0]) * RECORD.itemsize)
    times = rec["time"]
    if n and times.max() > np.iinfo(np.int64).max:
        raise FormatError("time tag overflows int64", len(MAGIC))
    times = times.astype(np.int64)
    streams = []
    for ch in (0, 1):
        idx = np.flatnonzero(chans == ch)
        t = times[idx]
        back = np.flatnonzero(np.diff(t) < 0)
        if back.size:
            k = int(idx[back[0] + 1])
            raise FormatError(f"time regression on channel {ch}", len(MAGIC) + k * RECORD.itemsize)
        streams.append(t)
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text())
    return TimeTags(streams[0], streams[1], meta)
