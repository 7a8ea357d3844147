"""Report figures rendered headlessly with matplotlib.

These are human-oriented companions to the machine-readable outputs: density
cross-sections at representative steps, the space-time matrix as an annotated
image, and the contrast/uniformity series.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiment import RunRecord  # noqa: E402

_DPI = 150


def _nearest_row(spacetime, step: int) -> int:
    steps = spacetime.steps
    return int(np.abs(steps - step).argmin())


def _section_steps(record: RunRecord) -> list:
    """Representative steps: start, pre-stimulus, during, at removal, end."""
    total = record.config.total_steps
    events = record.config.schedule.events
    if events:
        start, end = events[0].start_step, events[0].end_step
        wanted = [0, max(start - record.config.sample_interval, 0),
                  (start + end) // 2, min(end, total), total]
    else:
        wanted = [0, total // 4, total // 2, (3 * total) // 4, total]
    rows = sorted({_nearest_row(record.spacetime, s) for s in wanted})
    return rows


def save_cross_sections(record: RunRecord, path) -> None:
    """Column density profiles at a handful of representative steps."""
    spacetime = record.spacetime
    counts = spacetime.counts
    steps = spacetime.steps
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for row in _section_steps(record):
        ax.plot(counts[row], label=f"step {int(steps[row])}", linewidth=1.0)
    for ev in record.config.schedule.events:
        cols = ev.region.columns()
        ax.axvspan(cols.min(), cols.max(), color="0.85", zorder=0,
                   label=f"{ev.kind} region")
    ax.set_xlabel("column")
    ax.set_ylabel("particles per column")
    ax.set_title("Density cross-sections")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_spacetime_figure(record: RunRecord, path) -> None:
    """The space-time matrix as an image, time progressing downwards."""
    spacetime = record.spacetime
    steps = spacetime.steps
    fig, ax = plt.subplots(figsize=(6, 8))
    im = ax.imshow(spacetime.counts, aspect="auto", cmap="gray",
                   origin="upper",
                   extent=(0, spacetime.width, steps[-1], steps[0]))
    for ev in record.config.schedule.events:
        for bound in (ev.start_step, ev.end_step):
            if steps[0] <= bound <= steps[-1]:
                ax.axhline(bound, color="tab:red", linewidth=0.8,
                           linestyle="--")
    ax.set_xlabel("column")
    ax.set_ylabel("step")
    ax.set_title("Space-time density")
    fig.colorbar(im, ax=ax, label="particles per column")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_series_figure(record: RunRecord, path) -> None:
    """Contrast index and uniformity CV over the run."""
    summary = record.summary
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    finite = np.isfinite(summary.contrast)
    ax1.plot(summary.steps[finite], summary.contrast[finite],
             color="tab:blue", linewidth=1.0)
    ax1.axhline(1.0, color="0.5", linewidth=0.8)
    ax1.set_ylabel("contrast index")
    ax1.set_title("Contrast and uniformity")

    ax2.plot(summary.steps, summary.uniformity, color="tab:orange",
             linewidth=1.0)
    if summary.baseline_cv is not None:
        ax2.axhline(summary.baseline_cv, color="0.5", linewidth=0.8,
                    label="baseline CV")
        ax2.legend(fontsize=8)
    ax2.set_xlabel("step")
    ax2.set_ylabel("uniformity CV")

    for ev in record.config.schedule.events:
        for ax in (ax1, ax2):
            ax.axvspan(ev.start_step, ev.end_step, color="0.9", zorder=0)
    if summary.recovery_step is not None:
        ax2.axvline(summary.recovery_step, color="tab:green", linewidth=0.8)

    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_report(record: RunRecord, outdir) -> dict:
    """Render every report figure into ``outdir``; returns name -> Path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "figures/cross_sections.png": outdir / "cross_sections.png",
        "figures/spacetime.png": outdir / "spacetime.png",
        "figures/series.png": outdir / "series.png",
    }
    save_cross_sections(record, paths["figures/cross_sections.png"])
    save_spacetime_figure(record, paths["figures/spacetime.png"])
    save_series_figure(record, paths["figures/series.png"])
    return paths
