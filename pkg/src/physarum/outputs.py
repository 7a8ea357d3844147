"""File emitters: density CSV, PGM images, the JSON summary, and the config
echo.  All writes are atomic (temp file in the target directory, then rename),
and the text formats are byte-stable so golden-file tests can pin them.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .configfile import format_config
from .experiment import RunRecord
from .lattice import ArenaMask, build_tube_arena
from .measurement import RunSummary, SpaceTimeMatrix


def _atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".",
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_density_csv(spacetime: SpaceTimeMatrix, path) -> None:
    """Density matrix as CSV: header ``step,c0,...``, one row per sample."""
    if len(spacetime) == 0:
        raise ValueError("cannot write an empty space-time matrix")
    header = "step," + ",".join(f"c{i}" for i in range(spacetime.width))
    lines = [header]
    steps = spacetime.steps
    counts = spacetime.counts
    for i in range(len(spacetime)):
        lines.append(str(int(steps[i])) + "," +
                     ",".join(str(int(c)) for c in counts[i]))
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


def _to_gray(values: np.ndarray, all_equal_fill: int) -> np.ndarray:
    """Min-max normalize to 0..255, rounding half up; a constant input
    renders as ``all_equal_fill``."""
    a = np.asarray(values, dtype=np.float64)
    lo = a.min()
    hi = a.max()
    if hi == lo:
        return np.full(a.shape, all_equal_fill, dtype=np.uint8)
    return np.floor((a - lo) / (hi - lo) * 255.0 + 0.5).astype(np.uint8)


def _write_pgm(gray: np.ndarray, path) -> None:
    height, width = gray.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    _atomic_write_bytes(path, header + gray.tobytes())


def render_spacetime(spacetime: SpaceTimeMatrix, path) -> None:
    """Space-time plot as binary PGM: one row per sample, earliest at the
    top, densities min-max normalized over the whole matrix (128 when
    constant)."""
    if len(spacetime) == 0:
        raise ValueError("cannot render an empty space-time matrix")
    _write_pgm(_to_gray(spacetime.counts, 128), path)


def render_snapshot(trail: np.ndarray, agents_xy, mask: ArenaMask, path) -> None:
    """Arena snapshot as binary PGM: trail min-max normalized, inhabitable
    cells forced to 0, agent cells saturated to 255.

    ``agents_xy`` is an ``(x, y)`` pair of coordinate arrays.
    """
    gray = _to_gray(trail, 0)
    gray[~mask.habitable] = 0
    xs, ys = agents_xy
    if len(xs):
        cx = np.floor(np.asarray(xs)).astype(np.int64)
        cy = np.floor(np.asarray(ys)).astype(np.int64)
        gray[cy, cx] = 255
    _write_pgm(gray, path)


def _json_float(value):
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def write_summary_json(summary: RunSummary, config_hash: str, path) -> None:
    """Run statistics as a flat JSON object (missing statistics are null)."""
    payload = {
        "contrast_peak": _json_float(summary.contrast_peak),
        "contrast_peak_step": summary.contrast_peak_step,
        "recovery_step": summary.recovery_step,
        "onset_columns": [int(c) for c in summary.onset_columns],
        "baseline_cv": _json_float(summary.baseline_cv),
        "config_hash": config_hash,
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    _atomic_write_bytes(path, text.encode("ascii"))


def write_config_echo(config, path) -> None:
    """The effective configuration, re-parseable by parse_config."""
    _atomic_write_bytes(path, format_config(config).encode("ascii"))


def write_bundle(record: RunRecord, outdir, figures: bool = True) -> dict:
    """Write the full output bundle for a finished run.

    Produces density.csv, spacetime.pgm, summary.json, config_echo.cfg,
    snapshots/step_<k>.pgm per captured snapshot, and (unless ``figures`` is
    false) rendered report figures under figures/.  Returns name -> Path.
    """
    outdir = Path(outdir)
    paths = {
        "density.csv": outdir / "density.csv",
        "spacetime.pgm": outdir / "spacetime.pgm",
        "summary.json": outdir / "summary.json",
        "config_echo.cfg": outdir / "config_echo.cfg",
    }
    write_density_csv(record.spacetime, paths["density.csv"])
    render_spacetime(record.spacetime, paths["spacetime.pgm"])
    write_summary_json(record.summary, record.config_hash,
                       paths["summary.json"])
    write_config_echo(record.config, paths["config_echo.cfg"])

    if record.snapshots:
        arena = record.config.arena
        mask = build_tube_arena(arena.width, arena.height, arena.border_rows)
        for snap in record.snapshots:
            name = f"snapshots/step_{snap.step}.pgm"
            paths[name] = outdir / name
            render_snapshot(snap.trail, (snap.x, snap.y), mask, paths[name])

    if figures:
        from . import figures as figures_mod
        paths.update(figures_mod.render_report(record, outdir / "figures"))
    return paths
