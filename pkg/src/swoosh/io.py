"""File formats: heatmaps as 16-bit PGM plus JSON sidecar or CSV grids, traces and summaries as CSV."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import astuple
from pathlib import Path
from typing import Iterable

import numpy as np

from .heatmap import Heatmap
from .optim import SummaryRow

__all__ = [
    "write_pgm",
    "read_pgm",
    "write_heatmap_csv",
    "read_heatmap_csv",
    "write_trace_csv",
    "write_summary",
    "format_summary_table",
    "dump_json",
]

PGM_MAXVAL = 65535


def dump_json(obj, path: Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_pgm(h: Heatmap, path) -> Path:
    """Write a binary 16-bit PGM; the value range goes to ``<path>.json``.

    Returns the sidecar path.
    """
    path = Path(path)
    v = h.values
    lo, hi = float(v.min()), float(v.max())
    if hi > lo:
        q = np.rint((v - lo) / (hi - lo) * PGM_MAXVAL)
    else:
        q = np.zeros_like(v)
    header = f"P5\n{h.width} {h.height}\n{PGM_MAXVAL}\n".encode("ascii")
    path.write_bytes(header + q.astype(">u2").tobytes())
    sidecar = path.with_suffix(path.suffix + ".json")
    dump_json({"width": h.width, "height": h.height, "min": lo, "max": hi, "maxval": PGM_MAXVAL}, sidecar)
    return sidecar


def _pgm_tokens(data: bytes, count: int):
    tokens, pos = [], 0
    while len(tokens) < count:
        while data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def read_pgm(path) -> Heatmap:
    """Read a PGM written by :func:`write_pgm`, rescaled via its sidecar when present."""
    path = Path(path)
    data = path.read_bytes()
    (magic, w, h, maxval), offset = _pgm_tokens(data, 4)
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = int(w), int(h), int(maxval)
    dtype = ">u2" if maxval > 255 else "u1"
    q = np.frombuffer(data, dtype=dtype, count=w * h, offset=offset).reshape(h, w).astype(float)
    sidecar = path.with_suffix(path.suffix + ".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        lo, hi = meta["min"], meta["max"]
        return Heatmap(lo + q / maxval * (hi - lo))
    return Heatmap(q / maxval)


def write_heatmap_csv(h: Heatmap, path) -> None:
    # %.17g round-trips every float64 exactly
    np.savetxt(path, h.values, fmt="%.17g", delimiter=",")


def read_heatmap_csv(path) -> Heatmap:
    return Heatmap(np.loadtxt(path, delimiter=",", ndmin=2))


TRACE_HEADER = ["step", "total", "mse_pair", "disp1", "disp2"]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_trace_csv(trace, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for r in trace.records:
            w.writerow([_fmt(r.step), _fmt(r.total), _fmt(r.mse_pair), _fmt(r.disp1), _fmt(r.disp2)])


def write_summary(rows: Iterable, csv_path, txt_path=None) -> None:
    rows = list(rows)
    with open(csv_path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(SummaryRow.header())
        for r in rows:
            w.writerow([_fmt(v) for v in astuple(r)])
    if txt_path is not None:
        Path(txt_path).write_text(format_summary_table(rows))


def format_summary_table(rows) -> str:
    header = SummaryRow.header()
    body = []
    for r in rows:
        cells = []
        for v in astuple(r):
            if isinstance(v, bool):
                cells.append("yes" if v else "no")
            elif isinstance(v, float):
                cells.append(f"{v:.6g}")
            else:
                cells.append(str(v))
        body.append(cells)
    widths = [max(len(h), *(len(c[i]) for c in body)) if body else len(h) for i, h in enumerate(header)]
    out = io.StringIO()
    out.write("  ".join(h.ljust(wd) for h, wd in zip(header, widths)).rstrip() + "\n")
    out.write("  ".join("-" * wd for wd in widths) + "\n")
    for cells in body:
        out.write("  ".join(c.ljust(wd) for c, wd in zip(cells, widths)).rstrip() + "\n")
    return out.getvalue()
