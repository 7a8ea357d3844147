"""Observables: per-column density profiles, the space-time matrix, and the
statistics built on them (contrast, uniformity, recovery, onset columns).

Density is always raw particle counts per x-column; normalization happens
only at render time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

# Samples in steps [500, 1000) define a run's own pre-stimulus baseline.
BASELINE_WINDOW = (500, 1000)
# Recovery: CV at or below factor * baseline for this many consecutive samples.
RECOVERY_FACTOR = 1.5
RECOVERY_PERSISTENCE = 50
# Onset: change is integrated over this many steps from the stimulus start.
ONSET_WINDOW = 500


@dataclass(frozen=True)
class DensityProfile:
    """Particle count per x-column at one sampled step."""

    step: int
    counts: np.ndarray


class SpaceTimeMatrix:
    """Density profiles stacked over time, one row per sample, earliest first.

    Consecutive rows are exactly ``sample_interval`` steps apart.
    """

    def __init__(self, sample_interval: int, width: int):
        sample_interval = int(sample_interval)
        if sample_interval < 1:
            raise ValueError(f"sample_interval must be >= 1, got {sample_interval}")
        if width < 1:
            raise ValueError(f"width must be >= 1, got {width}")
        self.sample_interval = sample_interval
        self.width = int(width)
        self._steps: list = []
        self._rows: list = []

    def add_row(self, step: int, counts: np.ndarray) -> None:
        counts = np.asarray(counts)
        if counts.shape != (self.width,):
            raise ValueError(
                f"profile has shape {counts.shape}, expected ({self.width},)")
        if (counts < 0).any():
            raise ValueError("negative density count")
        if self._steps and step != self._steps[-1] + self.sample_interval:
            raise ValueError(
                f"rows must be {self.sample_interval} steps apart; "
                f"got step {step} after {self._steps[-1]}")
        self._steps.append(int(step))
        self._rows.append(counts.astype(np.int64))

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def steps(self) -> np.ndarray:
        return np.asarray(self._steps, dtype=np.int64)

    @property
    def counts(self) -> np.ndarray:
        """All rows as one (samples, width) int array."""
        if not self._rows:
            return np.zeros((0, self.width), dtype=np.int64)
        return np.vstack(self._rows)

    def profile(self, index: int) -> DensityProfile:
        return DensityProfile(self._steps[index], self._rows[index])

    def rows_in_steps(self, lo: int, hi: int):
        """(steps, counts) restricted to sampled steps in [lo, hi]."""
        steps = self.steps
        sel = (steps >= lo) & (steps <= hi)
        return steps[sel], self.counts[sel]


@dataclass
class RunSummary:
    """Derived statistics for one run.

    ``steps`` aligns the ``contrast`` and ``uniformity`` series; scalars are
    None when the run was too short to define them.
    """

    steps: np.ndarray
    contrast: np.ndarray
    uniformity: np.ndarray
    baseline_cv: Optional[float]
    recovery_step: Optional[int]
    onset_columns: list = field(default_factory=list)
    contrast_peak: Optional[float] = None
    contrast_peak_step: Optional[int] = None


def column_density(agents, width: int) -> np.ndarray:
    """Particle count per x-column: counts[k] = #{agents with floor(x) = k}."""
    xs = np.asarray(getattr(agents, "x", agents), dtype=np.float64)
    if xs.size == 0:
        return np.zeros(int(width), dtype=np.int64)
    cols = np.floor(xs).astype(np.int64)
    if cols.min() < 0 or cols.max() >= width:
        raise ValueError("agent x outside [0, width)")
    return np.bincount(cols, minlength=int(width)).astype(np.int64)


def _split_means(counts: np.ndarray, inside_columns) -> tuple:
    counts = np.asarray(counts, dtype=np.float64)
    width = counts.shape[-1]
    inside = np.zeros(width, dtype=bool)
    inside[np.asarray(inside_columns, dtype=np.int64)] = True
    if not inside.any() or inside.all():
        raise ValueError(
            "inside columns must be a non-empty strict subset of all columns")
    return counts[..., inside].mean(axis=-1), counts[..., ~inside].mean(axis=-1)


def contrast_index(profile: DensityProfile, inside_columns) -> float:
    """Mean count inside the given columns over mean count outside.

    +inf when only the outside is empty; NaN when both means are zero.
    """
    inside_mean, outside_mean = _split_means(profile.counts, inside_columns)
    if outside_mean == 0.0:
        return float("inf") if inside_mean > 0 else float("nan")
    return float(inside_mean / outside_mean)


def uniformity_cv(profile: DensityProfile) -> float:
    """Population standard deviation of the profile over its mean."""
    counts = np.asarray(profile.counts, dtype=np.float64)
    mean = counts.mean()
    if mean <= 0:
        raise ValueError("uniformity is undefined for a zero-mean profile")
    return float(counts.std() / mean)


def _cv_series(rows: np.ndarray) -> np.ndarray:
    means = rows.mean(axis=1)
    if (means <= 0).any():
        raise ValueError("uniformity is undefined for a zero-mean profile")
    return rows.std(axis=1) / means


def recovery_step(spacetime: SpaceTimeMatrix, stimulus_end: int,
                  baseline_cv: float, factor: float,
                  persistence: int = RECOVERY_PERSISTENCE) -> Optional[int]:
    """Earliest sampled step >= stimulus_end whose uniformity CV is at or
    below factor * baseline_cv and stays there for ``persistence``
    consecutive samples.  None when that never happens (or too little of the
    run remains to confirm it).
    """
    if factor < 1.0:
        raise ValueError(f"factor must be >= 1, got {factor!r}")
    if persistence < 1:
        raise ValueError(f"persistence must be >= 1, got {persistence}")
    steps = spacetime.steps
    if steps.size == 0:
        return None
    ok = _cv_series(spacetime.counts.astype(np.float64)) <= factor * baseline_cv
    for idx in np.flatnonzero(steps >= stimulus_end):
        if idx + persistence <= ok.size and ok[idx:idx + persistence].all():
            return int(steps[idx])
    return None


def _circular_local_maxima(values: np.ndarray) -> list:
    """(value, start_column) for every strict local maximum of a circular
    signal; a plateau counts once, at its circular start."""
    n = values.size
    starts = [i for i in range(n) if values[i] != values[i - 1]]
    if not starts:
        return []
    maxima = []
    m = len(starts)
    for k, s in enumerate(starts):
        nxt = starts[(k + 1) % m]
        v = values[s]
        if v > values[s - 1] and v > values[nxt]:
            maxima.append((v, s))
    return maxima


def onset_columns(spacetime: SpaceTimeMatrix, onset_step: int,
                  window: int) -> list:
    """Columns where density starts changing after a stimulus switches on.

    Sums absolute inter-sample change per column over sampled steps in
    [onset_step, onset_step + window], then returns the columns of the top
    two local maxima of that signal (ascending; fewer when the signal has
    fewer maxima, empty for a constant matrix).
    """
    _, rows = spacetime.rows_in_steps(onset_step, onset_step + window)
    if rows.shape[0] < 2:
        raise ValueError(
            f"window [{onset_step}, {onset_step + window}] covers "
            f"{rows.shape[0]} samples; need at least 2")
    change = np.abs(np.diff(rows, axis=0)).sum(axis=0)
    maxima = _circular_local_maxima(change)
    maxima.sort(key=lambda vc: (-vc[0], vc[1]))
    return sorted(int(c) for _, c in maxima[:2])


def sample_if_due(world, step: int, spacetime: SpaceTimeMatrix,
                  interval: int) -> None:
    """Append the current density profile when ``step`` is a sampling step."""
    if interval < 1:
        raise ValueError(f"interval must be >= 1, got {interval}")
    if step % interval == 0:
        spacetime.add_row(step, column_density(world.population, spacetime.width))


def summarize_run(spacetime: SpaceTimeMatrix, inside_columns,
                  stimulus_start: Optional[int],
                  stimulus_end: Optional[int]) -> RunSummary:
    """Assemble the RunSummary for a finished run.

    ``inside_columns`` is the column set contrast is measured against
    (normally the stimulus region's columns).  Statistics that need samples
    the run does not have come out None/empty rather than failing.
    """
    steps = spacetime.steps
    rows = spacetime.counts.astype(np.float64)

    try:
        inside_mean, outside_mean = _split_means(rows, inside_columns)
        with np.errstate(divide="ignore", invalid="ignore"):
            contrast = inside_mean / outside_mean
        contrast[(outside_mean == 0) & (inside_mean > 0)] = np.inf
        contrast[(outside_mean == 0) & (inside_mean == 0)] = np.nan
    except ValueError:
        contrast = np.full(steps.shape, np.nan)

    uniformity = _cv_series(rows) if len(spacetime) else np.zeros(0)

    lo, hi = BASELINE_WINDOW
    base_sel = (steps >= lo) & (steps < hi)
    baseline_cv = float(uniformity[base_sel].mean()) if base_sel.any() else None

    recovery = None
    if baseline_cv is not None and stimulus_end is not None:
        recovery = recovery_step(spacetime, stimulus_end, baseline_cv,
                                 RECOVERY_FACTOR)

    onset: list = []
    if stimulus_start is not None:
        onset_rows = spacetime.rows_in_steps(
            stimulus_start, stimulus_start + ONSET_WINDOW)[1]
        if onset_rows.shape[0] >= 2:
            onset = onset_columns(spacetime, stimulus_start, ONSET_WINDOW)

    finite = np.isfinite(contrast)
    if finite.any():
        values = np.where(finite, contrast, -np.inf)
        peak_idx = int(values.argmax())
        contrast_peak = float(contrast[peak_idx])
        contrast_peak_step = int(steps[peak_idx])
    else:
        contrast_peak = None
        contrast_peak_step = None

    return RunSummary(
        steps=steps,
        contrast=contrast,
        uniformity=uniformity,
        baseline_cv=baseline_cv,
        recovery_step=recovery,
        onset_columns=onset,
        contrast_peak=contrast_peak,
        contrast_peak_step=contrast_peak_step,
    )
