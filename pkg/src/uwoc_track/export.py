"""Byte-stable result files: time-series CSV, metrics JSON, contour grid.

Floats are written with 17 significant digits so every double survives a
text round trip; lines end in LF regardless of platform.  Non-finite values
appear as ``inf``, ``-inf`` and ``nan`` in CSV and as strings in JSON.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Iterable, Sequence

import numpy as np

from .config import RunConfig, serialize
from .optics import OpticalLink, bit_rate_array
from .sim import RunRecord

CSV_COLUMNS = ("t", "x", "y", "rho", "u", "v", "r", "x_ref", "y_ref", "rho_ref",
               "tau1", "tau2", "tau3", "d", "psi", "log10_bitrate", "inside_cone", "lyapunov_v")
FLOAT_FMT = "%.17g"


class ExportError(OSError):
    """Writing an output file failed."""


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ExportError(f"cannot write {path!r}: {exc.strerror or exc}") from None


def _lines(table: np.ndarray) -> str:
    # printf-style "%.17g" is locale-free and platform-stable
    fmt = ",".join([FLOAT_FMT] * table.shape[1])
    return "\n".join(fmt % tuple(row) for row in table.tolist())


def timeseries_table(record: RunRecord) -> np.ndarray:
    rows = record.rows
    with np.errstate(divide="ignore", invalid="ignore"):
        log_rate = np.log10(np.asarray(rows["bit_rate"], dtype=float))
    cols = []
    for name in CSV_COLUMNS:
        if name == "log10_bitrate":
            cols.append(log_rate)
        elif name == "inside_cone":
            cols.append(np.asarray(rows[name], dtype=bool).astype(float))
        else:
            cols.append(np.asarray(rows[name], dtype=float))
    return np.column_stack(cols)


def timeseries_text(record: RunRecord) -> str:
    return ",".join(CSV_COLUMNS) + "\n" + _lines(timeseries_table(record)) + "\n"


def export_timeseries(record: RunRecord, path: str) -> None:
    """One row per step, columns in :data:`CSV_COLUMNS` order; ``inside_cone`` is 0/1."""
    _write(path, timeseries_text(record))


def config_hash(config: RunConfig) -> str:
    return hashlib.sha256(serialize(config).encode("utf-8")).hexdigest()


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def metrics_document(entries: Iterable[tuple[RunConfig, RunRecord]]) -> dict:
    runs = []
    for config, record in entries:
        sc = record.scenario
        runs.append({
            "name": sc.name,
            "controller": sc.controller.kind,
            "config_sha256": config_hash(config),
            "seed": config.seed,
            "config": serialize(config),
            "cone": {"slant_height": record.cone.slant_height, "height": record.cone.height,
                     "half_angle": record.cone.half_angle},
            "rows": len(record),
            "metrics": record.metrics.as_dict(),
        })
    return {"format": "uwoc-track-metrics/1", "runs": _jsonable(runs)}


def metrics_text(entries: Iterable[tuple[RunConfig, RunRecord]]) -> str:
    doc = metrics_document(entries)
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def export_metrics(entries: Sequence[tuple[RunConfig, RunRecord]], path: str) -> None:
    """Metrics of one or more runs, each with its config text, hash and seed."""
    _write(path, metrics_text(entries))


def load_metrics(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ExportError(f"cannot read {path!r}: {exc.strerror or exc}") from None


def contour_grid(link: OpticalLink, offsets: np.ndarray, depths: np.ndarray,
                 target_ber: float) -> np.ndarray:
    """``log10`` bit rate on a ``(len(depths), len(offsets))`` grid.

    The receiver looks straight down; a transmitter at horizontal offset
    ``o`` and depth ``h`` sits at range ``sqrt(o^2 + h^2)``.  Outside the FOV
    the rate is zero (``-inf``); the apex itself is ``nan``.
    """
    o, h = np.meshgrid(np.asarray(offsets, float), np.asarray(depths, float))
    rate = bit_rate_array(link, np.hypot(o, h), h, target_ber)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log10(rate)


def contour_text(link: OpticalLink, offsets: np.ndarray, depths: np.ndarray,
                 target_ber: float) -> str:
    grid = contour_grid(link, offsets, depths, target_ber)
    head = [
        "# log10 bit rate [bit/s]; rows: depth [m], columns: horizontal offset [m]",
        f"# target_ber={FLOAT_FMT % target_ber}",
        f"# offsets: n={len(offsets)} min={FLOAT_FMT % offsets[0]} max={FLOAT_FMT % offsets[-1]}",
        f"# depths: n={len(depths)} min={FLOAT_FMT % depths[0]} max={FLOAT_FMT % depths[-1]}",
        "depth\\offset," + ",".join(FLOAT_FMT % o for o in offsets),
    ]
    table = np.column_stack([np.asarray(depths, float), grid])
    return "\n".join(head) + "\n" + _lines(table) + "\n"


def export_contour(link: OpticalLink, offsets, depths, target_ber: float, path: str) -> None:
    _write(path, contour_text(link, np.asarray(offsets, float), np.asarray(depths, float),
                              target_ber))
