"""Experiment configuration, validation, the two presets, and the run loop.

A run is a pure function of its :class:`ExperimentConfig`: identical configs
give bit-identical :class:`RunRecord` contents, which is the package's
flagship property.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .agents import (BLOCKED_MODES, STAGE_ORDERS, ModelParams, World,
                     init_population, scheduler_step)
from .errors import ConfigError
from .lattice import ArenaMask, TrailLattice, build_tube_arena
from .measurement import (RunSummary, SpaceTimeMatrix, sample_if_due,
                          summarize_run)
from .rng import Rng
from .stimulus import (ATTRACTANT, LIGHT, StimulusEvent, StimulusSchedule,
                       middle_third_region)

DEFAULT_SEED = 42


@dataclass(frozen=True)
class ArenaSpec:
    """Tube arena dimensions in cells."""

    width: int
    height: int
    border_rows: int

    @property
    def capacity(self) -> int:
        """Habitable cell count of the tube this spec describes."""
        return self.width * max(self.height - 2 * self.border_rows, 0)


@dataclass
class ExperimentConfig:
    arena: ArenaSpec
    population: int
    model: ModelParams
    schedule: StimulusSchedule
    total_steps: int
    sample_interval: int
    snapshot_interval: int
    seed: int


@dataclass(frozen=True)
class Violation:
    """One validation finding: a machine-readable code plus a message."""

    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass
class Snapshot:
    """Lattice and particle positions captured between steps."""

    step: int
    trail: np.ndarray
    x: np.ndarray
    y: np.ndarray


@dataclass
class RunRecord:
    """Everything a finished run produced."""

    config: ExperimentConfig
    spacetime: SpaceTimeMatrix
    summary: RunSummary
    snapshots: list
    config_hash: str


def _preset(kind: str) -> ExperimentConfig:
    arena = ArenaSpec(width=300, height=100, border_rows=10)
    mask = build_tube_arena(arena.width, arena.height, arena.border_rows)
    params = ModelParams()
    event = StimulusEvent(
        kind=kind,
        region=middle_third_region(mask),
        start_step=1000,
        end_step=4000,
        magnitude=params.stimulus_rate if kind == ATTRACTANT else 0.0,
    )
    schedule = StimulusSchedule(events=(event,),
                                background_rate=params.background_rate)
    return ExperimentConfig(
        arena=arena,
        population=8000,
        model=params,
        schedule=schedule,
        total_steps=20000,
        sample_interval=10,
        snapshot_interval=1000,
        seed=DEFAULT_SEED,
    )


def preset_li() -> ExperimentConfig:
    """Attractant projected into the middle third during steps [1000, 4000)."""
    return _preset(ATTRACTANT)


def preset_la() -> ExperimentConfig:
    """Same arena and window as preset_li, with light instead of attractant."""
    return _preset(LIGHT)


def _check(violations: list, code: str, condition: bool, message: str) -> None:
    if not condition:
        violations.append(Violation(code, message))


def _finite_in(violations, code, value, lo, hi, name) -> None:
    try:
        v = float(value)
    except (TypeError, ValueError):
        violations.append(Violation(code, f"{name} is not a number: {value!r}"))
        return
    ok = np.isfinite(v) and v >= lo and (hi is None or v <= hi)
    if not ok:
        bound = f"[{lo}, {hi}]" if hi is not None else f">= {lo}"
        violations.append(Violation(code, f"{name} must be {bound}, got {value!r}"))


def validate(config: ExperimentConfig) -> list:
    """Every invariant violation in the config; empty list iff it is valid."""
    v: list = []
    arena = config.arena
    _check(v, "arena.width", arena.width >= 3,
           f"arena width must be >= 3, got {arena.width}")
    _check(v, "arena.height", arena.height >= 3,
           f"arena height must be >= 3, got {arena.height}")
    _check(v, "arena.border_rows", arena.border_rows >= 0,
           f"border_rows must be >= 0, got {arena.border_rows}")
    band = arena.height - 2 * arena.border_rows
    _check(v, "arena.band", band >= 1,
           f"no habitable band remains: height {arena.height} with "
           f"{arena.border_rows} border rows top and bottom")

    _check(v, "population.positive", config.population >= 1,
           f"population must be >= 1, got {config.population}")
    if band >= 1:
        _check(v, "population.capacity", config.population <= arena.capacity,
               f"population {config.population} exceeds habitable capacity "
               f"{arena.capacity}")

    m = config.model
    _finite_in(v, "model.sensor_angle", m.sensor_angle, 0.0, None, "sensor_angle")
    _finite_in(v, "model.rotation_angle", m.rotation_angle, 0.0, None,
               "rotation_angle")
    _finite_in(v, "model.sensor_offset", m.sensor_offset, 0.0, None,
               "sensor_offset")
    _finite_in(v, "model.step_size", m.step_size, 0.0, None, "step_size")
    try:
        _check(v, "model.sensor_offset", float(m.sensor_offset) >= float(m.step_size),
               f"sensor_offset {m.sensor_offset!r} must be >= step_size "
               f"{m.step_size!r}")
    except (TypeError, ValueError):
        pass
    _finite_in(v, "model.deposit", m.deposit, 0.0, None, "deposit")
    _finite_in(v, "model.decay", m.decay, 0.0, 1.0, "decay")
    _finite_in(v, "model.light_sensor_attenuation", m.light_sensor_attenuation,
               0.0, 1.0, "light_sensor_attenuation")
    _finite_in(v, "model.light_trail_factor", m.light_trail_factor, 0.0, 1.0,
               "light_trail_factor")
    _finite_in(v, "model.background_rate", m.background_rate, 0.0, None,
               "background_rate")
    _finite_in(v, "model.stimulus_rate", m.stimulus_rate, 0.0, None,
               "stimulus_rate")
    _check(v, "model.stage_order", m.stage_order in STAGE_ORDERS,
           f"stage_order must be one of {STAGE_ORDERS}, got {m.stage_order!r}")
    _check(v, "model.blocked_reorient", m.blocked_reorient in BLOCKED_MODES,
           f"blocked_reorient must be one of {BLOCKED_MODES}, "
           f"got {m.blocked_reorient!r}")

    _finite_in(v, "schedule.background_rate", config.schedule.background_rate,
               0.0, None, "schedule background_rate")
    for idx, ev in enumerate(config.schedule.events):
        _check(v, "schedule.event.window", ev.start_step >= 0,
               f"event {idx} starts at negative step {ev.start_step}")
        _check(v, "schedule.event.region",
               ev.region.mask.shape == (arena.height, arena.width),
               f"event {idx} region shape {ev.region.mask.shape} does not "
               f"match the arena {arena.height}x{arena.width}")

    _check(v, "run.total_steps", config.total_steps >= 1,
           f"total_steps must be >= 1, got {config.total_steps}")
    _check(v, "run.sample_interval", config.sample_interval >= 1,
           f"sample_interval must be >= 1, got {config.sample_interval}")
    _check(v, "run.snapshot_interval", config.snapshot_interval >= 0,
           f"snapshot_interval must be >= 0 (0 = off), got "
           f"{config.snapshot_interval}")
    _check(v, "run.seed", 0 <= config.seed < 1 << 64,
           f"seed must be in [0, 2**64), got {config.seed}")
    return v


def config_hash(config: ExperimentConfig) -> str:
    """12-hex digest of the complete effective configuration."""
    m = config.model
    payload = {
        "arena": [config.arena.width, config.arena.height,
                  config.arena.border_rows],
        "population": config.population,
        "model": {
            "sensor_angle": m.sensor_angle,
            "rotation_angle": m.rotation_angle,
            "sensor_offset": m.sensor_offset,
            "step_size": m.step_size,
            "deposit": m.deposit,
            "decay": m.decay,
            "light_sensor_attenuation": m.light_sensor_attenuation,
            "light_trail_factor": m.light_trail_factor,
            "background_rate": m.background_rate,
            "stimulus_rate": m.stimulus_rate,
            "stage_order": m.stage_order,
            "blocked_reorient": m.blocked_reorient,
        },
        "schedule": {
            "background_rate": config.schedule.background_rate,
            "events": [
                {
                    "kind": ev.kind,
                    "start": ev.start_step,
                    "end": ev.end_step,
                    "magnitude": ev.magnitude,
                    "region": hashlib.sha256(
                        ev.region.mask.tobytes()).hexdigest()[:16],
                }
                for ev in config.schedule.events
            ],
        },
        "total_steps": config.total_steps,
        "sample_interval": config.sample_interval,
        "snapshot_interval": config.snapshot_interval,
        "seed": config.seed,
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def run(config: ExperimentConfig, use_kernel: bool = True) -> RunRecord:
    """Execute a configured experiment end to end.

    Builds the arena, seeds the generator, places the population, advances
    ``total_steps`` scheduler steps while sampling every ``sample_interval``
    steps (step 0 included), and derives the summary statistics.
    """
    violations = validate(config)
    if violations:
        raise ConfigError(
            "invalid configuration: " + "; ".join(str(x) for x in violations),
            violations)

    mask = build_tube_arena(config.arena.width, config.arena.height,
                            config.arena.border_rows)
    rng = Rng(config.seed)
    population, occupancy = init_population(mask, config.population, rng)
    world = World(
        mask=mask,
        params=config.model,
        schedule=config.schedule,
        trail=TrailLattice.zeros(mask),
        population=population,
        occupancy=occupancy,
    )

    spacetime = SpaceTimeMatrix(config.sample_interval, mask.width)
    snapshots: list = []

    def record_state(step: int) -> None:
        sample_if_due(world, step, spacetime, config.sample_interval)
        if config.snapshot_interval and step % config.snapshot_interval == 0:
            snapshots.append(Snapshot(step, world.trail.values.copy(),
                                      population.x.copy(), population.y.copy()))

    record_state(0)
    for k in range(config.total_steps):
        scheduler_step(world, k, rng, use_kernel=use_kernel)
        record_state(k + 1)

    events = config.schedule.events
    if events:
        inside_columns = events[0].region.columns()
        stimulus_start: Optional[int] = events[0].start_step
        stimulus_end: Optional[int] = events[0].end_step
    else:
        inside_columns = middle_third_region(mask).columns()
        stimulus_start = None
        stimulus_end = None

    summary = summarize_run(spacetime, inside_columns, stimulus_start,
                            stimulus_end)
    return RunRecord(
        config=config,
        spacetime=spacetime,
        summary=summary,
        snapshots=snapshots,
        config_hash=config_hash(config),
    )
