"""Deterministic CSV emission for signals, grids, maps, and metric sweeps.

Floats are written with ``repr`` (shortest round-trip form) and files use
LF newlines, so identical data always produces byte-identical output.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: str | Path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def write_complex_series(path, values) -> Path:
    """index, re, im rows for a 1-D complex sequence."""
    values = np.asarray(values)
    rows = ((i, float(v.real), float(v.imag)) for i, v in enumerate(values))
    return write_csv(path, ["index", "re", "im"], rows)


def write_grid(path, cells) -> Path:
    """l, k, re, im rows for a 2-D complex grid."""
    cells = np.asarray(cells)
    rows = (
        (l, k, float(cells[l, k].real), float(cells[l, k].imag))
        for l in range(cells.shape[0])
        for k in range(cells.shape[1])
    )
    return write_csv(path, ["l", "k", "re", "im"], rows)


def write_ddm(path, ddm) -> Path:
    """l, k, magnitude_db rows (peak-normalized) for a delay-Doppler map."""
    db = ddm.magnitude_db()
    rows = (
        (l, k, float(db[l, k]))
        for l in range(db.shape[0])
        for k in range(db.shape[1])
    )
    return write_csv(path, ["l", "k", "magnitude_db"], rows)


def write_af_surface(path, cells, floor_db: float = -300.0) -> Path:
    """l, k, re, im, magnitude_db rows for an ambiguity surface."""
    cells = np.asarray(cells)
    mag = np.abs(cells)
    peak = mag.max() if mag.size else 0.0
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag / peak) if peak > 0 else np.full(mag.shape, floor_db)
    db = np.maximum(db, floor_db)
    rows = (
        (l, k, float(cells[l, k].real), float(cells[l, k].imag), float(db[l, k]))
        for l in range(cells.shape[0])
        for k in range(cells.shape[1])
    )
    return write_csv(path, ["l", "k", "re", "im", "magnitude_db"], rows)


METRIC_COLUMNS = [
    "snr_db",
    "po",
    "algorithm",
    "preset",
    "pslr_db",
    "image_snr_db",
    "pd",
    "ber",
    "trials",
]


def write_metric_rows(path, rows) -> Path:
    return write_csv(path, METRIC_COLUMNS, rows)
