"""Timed stimulus events, the background projection, and region selection."""

import numpy as np
import pytest

from physarum.agents import ModelParams
from physarum.errors import ConfigError
from physarum.lattice import Region, TrailLattice, build_tube_arena
from physarum.stimulus import (StimulusEvent, StimulusSchedule, active_events,
                               apply_stimuli, middle_third_region)


def make_event(**overrides):
    region = overrides.pop("region", Region.from_cells((20, 40), [(5, 10)]))
    fields = dict(kind="attractant", region=region, start_step=10, end_step=40,
                  magnitude=0.5)
    fields.update(overrides)
    return StimulusEvent(**fields)


# --- events and schedule ---

def test_event_window_half_open():
    event = make_event(start_step=1000, end_step=4000)
    assert not event.active_at(999)
    assert event.active_at(1000)
    assert event.active_at(3999)
    assert not event.active_at(4000)


def test_event_validation():
    with pytest.raises(ConfigError):
        make_event(kind="magnet")
    with pytest.raises(ConfigError):
        make_event(start_step=40, end_step=40)
    with pytest.raises(ConfigError):
        make_event(start_step=50, end_step=40)
    with pytest.raises(ConfigError):
        make_event(magnitude=-0.1)
    with pytest.raises(ConfigError):
        make_event(region=Region.empty((20, 40)))


def test_schedule_validation_and_active_selection():
    with pytest.raises(ConfigError):
        StimulusSchedule(events=(), background_rate=-1.0)
    early = make_event(start_step=0, end_step=20)
    late = make_event(start_step=15, end_step=30)
    schedule = StimulusSchedule(events=[early, late], background_rate=0.0)
    assert isinstance(schedule.events, tuple)
    assert active_events(schedule, 5) == [early]
    assert active_events(schedule, 17) == [early, late]
    assert active_events(schedule, 25) == [late]
    assert active_events(schedule, 30) == []


# --- middle third ---

def test_middle_third_columns_for_paper_arena():
    mask = build_tube_arena(300, 100, 10)
    region = middle_third_region(mask)
    cols = region.columns()
    assert cols.min() == 100 and cols.max() == 199
    # habitable rows only: 100 columns x 80 rows
    assert region.cell_count == 100 * 80


def test_middle_third_excludes_walls():
    mask = build_tube_arena(30, 12, 2)
    region = middle_third_region(mask)
    assert not region.mask[0].any()
    assert not region.mask[-1].any()
    assert region.columns().tolist() == list(range(10, 20))


# --- apply_stimuli ---

def test_background_projection_total(small_arena):
    trail = TrailLattice.zeros(small_arena)
    schedule = StimulusSchedule(events=(), background_rate=0.01)
    light = apply_stimuli(trail, small_arena, schedule, ModelParams(), 0)
    habitable = int(small_arena.habitable.sum())
    assert trail.total_mass() == pytest.approx(0.01 * habitable)
    assert light.cell_count == 0


def test_attractant_adds_inside_region_only(small_arena):
    trail = TrailLattice.zeros(small_arena)
    region = middle_third_region(small_arena)
    event = StimulusEvent(kind="attractant", region=region, start_step=0,
                          end_step=10, magnitude=0.5)
    schedule = StimulusSchedule(events=(event,), background_rate=0.0)
    apply_stimuli(trail, small_arena, schedule, ModelParams(), 3)
    assert np.all(trail.values[region.mask] == 0.5)
    assert trail.total_mass() == pytest.approx(0.5 * region.cell_count)
    # outside the window nothing is added
    trail2 = TrailLattice.zeros(small_arena)
    apply_stimuli(trail2, small_arena, schedule, ModelParams(), 10)
    assert trail2.total_mass() == 0.0


def test_light_scales_and_reports_region(small_arena):
    trail = TrailLattice.zeros(small_arena)
    trail.values[small_arena.habitable] = 4.0
    region = middle_third_region(small_arena)
    event = StimulusEvent(kind="light", region=region, start_step=0,
                          end_step=10)
    schedule = StimulusSchedule(events=(event,), background_rate=0.0)
    light = apply_stimuli(trail, small_arena, schedule, ModelParams(), 0)
    assert light == region
    assert np.all(trail.values[region.mask] == pytest.approx(3.6))
    outside = small_arena.habitable & ~region.mask
    assert np.all(trail.values[outside] == 4.0)


def test_light_never_raises_trail(small_arena, random_trail):
    region = middle_third_region(small_arena)
    event = StimulusEvent(kind="light", region=region, start_step=0, end_step=5)
    schedule = StimulusSchedule(events=(event,), background_rate=0.0)
    before = random_trail.values.copy()
    apply_stimuli(random_trail, small_arena, schedule, ModelParams(), 0)
    assert np.all(random_trail.values <= before)


def test_overlapping_attractants_are_additive(small_arena):
    a = Region.from_cells((20, 40), [(10, 10), (11, 10)])
    b = Region.from_cells((20, 40), [(11, 10), (12, 10)])
    events = (
        StimulusEvent(kind="attractant", region=a, start_step=0, end_step=5,
                      magnitude=1.0),
        StimulusEvent(kind="attractant", region=b, start_step=0, end_step=5,
                      magnitude=2.0),
    )
    schedule = StimulusSchedule(events=events, background_rate=0.0)
    trail = TrailLattice.zeros(small_arena)
    apply_stimuli(trail, small_arena, schedule, ModelParams(), 0)
    assert trail.values[10, 10] == 1.0
    assert trail.values[10, 11] == 3.0
    assert trail.values[10, 12] == 2.0


def test_two_light_events_report_their_union(small_arena):
    a = Region.from_cells((20, 40), [(10, 10)])
    b = Region.from_cells((20, 40), [(12, 10)])
    events = (
        StimulusEvent(kind="light", region=a, start_step=0, end_step=5),
        StimulusEvent(kind="light", region=b, start_step=0, end_step=5),
    )
    schedule = StimulusSchedule(events=events, background_rate=0.0)
    trail = TrailLattice.zeros(small_arena)
    light = apply_stimuli(trail, small_arena, schedule, ModelParams(), 0)
    assert light.cell_count == 2
    assert light.mask[10, 10] and light.mask[10, 12]


def test_stimulus_order_background_then_add_then_scale(small_arena):
    # background 1.0 then +2.0 then x0.9 on the same cell: (0+1+2)*0.9
    region = Region.from_cells((20, 40), [(10, 10)])
    events = (
        StimulusEvent(kind="attractant", region=region, start_step=0,
                      end_step=5, magnitude=2.0),
        StimulusEvent(kind="light", region=region, start_step=0, end_step=5),
    )
    schedule = StimulusSchedule(events=events, background_rate=1.0)
    trail = TrailLattice.zeros(small_arena)
    apply_stimuli(trail, small_arena, schedule, ModelParams(), 0)
    assert trail.values[10, 10] == pytest.approx(3.0 * 0.9)


def test_bounded_mass_with_background_and_decay(small_arena):
    """Closed system: background input balances decay into a bounded band."""
    from physarum.lattice import diffuse_and_decay
    trail = TrailLattice.zeros(small_arena)
    schedule = StimulusSchedule(events=(), background_rate=0.01)
    params = ModelParams()
    masses = []
    for step in range(700):
        apply_stimuli(trail, small_arena, schedule, params, step)
        trail = diffuse_and_decay(trail, small_arena, params.decay)
        masses.append(trail.total_mass())
    tail = masses[500:]
    assert max(tail) - min(tail) < 0.01 * max(tail)
    ceiling = 0.01 * small_arena.habitable.sum() / params.decay
    assert max(tail) <= ceiling
