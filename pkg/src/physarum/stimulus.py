"""Timed spatial stimuli.

Each scheduler step first projects a uniform background of attractant over
every habitable cell, then applies whichever events are active at that step:
attractant events add concentration inside their region, light events scale
the trail down inside theirs.  Light additionally attenuates agent sensors,
which is handled at sensing time from the region this module reports back.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .lattice import ArenaMask, Region, TrailLattice, add_to_region, scale_region

ATTRACTANT = "attractant"
LIGHT = "light"
EVENT_KINDS = (ATTRACTANT, LIGHT)


@dataclass(frozen=True)
class StimulusEvent:
    """One timed stimulus over a fixed region, active on steps
    [start_step, end_step).

    ``magnitude`` is the per-cell, per-step attractant addition; light events
    ignore it (light strength lives in the model parameters).
    """

    kind: str
    region: Region
    start_step: int
    end_step: int
    magnitude: float = 0.0

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ConfigError(f"unknown stimulus kind {self.kind!r}")
        if not self.start_step < self.end_step:
            raise ConfigError(
                f"stimulus window must satisfy start < end, got "
                f"[{self.start_step}, {self.end_step})"
            )
        if self.region.cell_count == 0:
            raise ConfigError("stimulus region is empty")
        if self.magnitude < 0:
            raise ConfigError(f"stimulus magnitude must be >= 0, got {self.magnitude!r}")

    def active_at(self, step: int) -> bool:
        return self.start_step <= step < self.end_step


@dataclass(frozen=True)
class StimulusSchedule:
    """Ordered stimulus events plus the ever-present background projection."""

    events: tuple = ()
    background_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if self.background_rate < 0:
            raise ConfigError(
                f"background_rate must be >= 0, got {self.background_rate!r}"
            )


def middle_third_region(mask: ArenaMask) -> Region:
    """Habitable cells whose column lies in [width/3, 2*width/3).

    For width 300 that is columns 100..199.
    """
    width = mask.width
    lo = (width + 2) // 3        # ceil(width / 3)
    hi = (2 * width + 2) // 3    # ceil(2 * width / 3)
    selected = np.zeros((mask.height, width), dtype=bool)
    selected[:, lo:hi] = True
    return Region(selected & mask.habitable)


def active_events(schedule: StimulusSchedule, step: int) -> list:
    return [ev for ev in schedule.events if ev.active_at(step)]


def apply_stimuli(trail: TrailLattice, mask: ArenaMask, schedule: StimulusSchedule,
                  params, step: int) -> Region:
    """Mutate the trail with everything scheduled for this step.

    Order: background projection, attractant additions, light scaling.
    Returns the union of the active light regions, empty when none is active;
    sensing consumes it for the rest of the step.
    """
    if schedule.background_rate > 0:
        add_to_region(trail, _habitable_region(mask), schedule.background_rate)
    light = None
    for ev in active_events(schedule, step):
        if ev.kind == ATTRACTANT:
            add_to_region(trail, ev.region, ev.magnitude)
        else:
            scale_region(trail, ev.region, params.light_trail_factor)
            light = ev.region if light is None else light.union(ev.region)
    if light is None:
        return _empty_region(mask)
    return light


# Per-mask region caches: apply_stimuli runs every scheduler step, so the
# background and no-light regions are built once per arena and reused.
_habitable_regions: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()
_empty_regions: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _habitable_region(mask: ArenaMask) -> Region:
    region = _habitable_regions.get(mask)
    if region is None:
        region = Region(mask.habitable)
        _habitable_regions[mask] = region
    return region


def _empty_region(mask: ArenaMask) -> Region:
    region = _empty_regions.get(mask)
    if region is None:
        region = Region.empty(mask.habitable.shape)
        _empty_regions[mask] = region
    return region
