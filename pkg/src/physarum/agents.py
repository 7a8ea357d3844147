"""The particle population: sensing, rotation decisions, occupancy-exclusive
movement, trail deposition, and the per-step scheduler.

Each particle carries a continuous position and heading.  Per scheduler step
it samples the trail at three offset sensors (front, front-left, front-right),
turns toward the strongest reading, and tries to step forward; a successful
step deposits trail at the new cell, a blocked step reorients the particle.
Cells hold at most one particle, enforced through :class:`OccupancyLattice`.

Two implementations of the agent sweep exist: the compiled batch kernel in
``_kernels`` (the default) and a pure-Python reference built from the public
per-agent operations below.  They are bit-identical by construction — both
draw from the same splitmix64 state and route all trigonometry through
``_kernels.cos_sin`` — and tests hold them to that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import ConfigError
from .lattice import ArenaMask, Region, TrailLattice, diffuse_and_decay
from .rng import Rng
from .stimulus import StimulusSchedule, apply_stimuli

PER_AGENT = "per_agent"
TWO_PASS = "two_pass"
STAGE_ORDERS = (PER_AGENT, TWO_PASS)

UNIFORM = "uniform"
ROTATE = "rotate"
BLOCKED_MODES = (UNIFORM, ROTATE)


@dataclass
class ModelParams:
    """Per-particle constants plus stimulus strengths.

    Angles are radians, distances cell units.  ``stage_order`` selects whether
    each particle moves immediately after sensing (``per_agent``) or all
    particles sense before any moves (``two_pass``); ``blocked_reorient``
    selects the heading rule after a blocked move (``uniform`` random heading,
    or ``rotate`` by +/- rotation_angle).
    """

    sensor_angle: float = math.pi / 4
    rotation_angle: float = math.pi / 4
    sensor_offset: float = 9.0
    step_size: float = 1.0
    deposit: float = 5.0
    decay: float = 0.1
    light_sensor_attenuation: float = 0.1
    light_trail_factor: float = 0.9
    background_rate: float = 0.01
    stimulus_rate: float = 0.1
    stage_order: str = PER_AGENT
    blocked_reorient: str = UNIFORM


@dataclass
class Agent:
    """One particle: continuous position and heading in [0, 2*pi)."""

    x: float
    y: float
    heading: float

    def cell(self) -> tuple:
        return int(math.floor(self.x)), int(math.floor(self.y))


class SensorReadings(NamedTuple):
    front: float
    front_left: float
    front_right: float


class OccupancyLattice:
    """One-particle-per-cell exclusion grid; empty cells hold -1."""

    __slots__ = ("grid",)

    EMPTY = -1

    def __init__(self, width: int, height: int):
        self.grid = np.full((int(height), int(width)), self.EMPTY, dtype=np.int32)

    @property
    def width(self) -> int:
        return self.grid.shape[1]

    @property
    def height(self) -> int:
        return self.grid.shape[0]

    def occupant_at(self, cx: int, cy: int):
        """Agent id at a cell, or None when empty."""
        v = int(self.grid[cy, cx])
        return None if v < 0 else v

    def occupied_count(self) -> int:
        return int((self.grid >= 0).sum())


@dataclass
class Population:
    """Positions and headings of all particles, in parallel arrays."""

    x: np.ndarray
    y: np.ndarray
    heading: np.ndarray

    def __len__(self) -> int:
        return self.x.size

    def agent(self, i: int) -> Agent:
        return Agent(float(self.x[i]), float(self.y[i]), float(self.heading[i]))

    def put(self, i: int, agent: Agent) -> None:
        self.x[i] = agent.x
        self.y[i] = agent.y
        self.heading[i] = agent.heading


@dataclass
class World:
    """Everything one simulation owns while stepping."""

    mask: ArenaMask
    params: ModelParams
    schedule: StimulusSchedule
    trail: TrailLattice
    population: Population
    occupancy: OccupancyLattice
    last_moves: int = 0


def _light_u8(light, shape) -> np.ndarray:
    if light is None:
        return np.zeros(shape, dtype=np.uint8)
    return light.mask_u8()


def sense(agent: Agent, trail: TrailLattice, mask: ArenaMask, light,
          params: ModelParams) -> SensorReadings:
    """Sample the trail at the three sensors.

    Sensors sit at ``sensor_offset`` cells along headings
    (heading - sensor_angle, heading, heading + sensor_angle); x wraps
    periodically.  A sample inside ``light`` (a Region, or None for no light)
    is multiplied by ``light_sensor_attenuation``; samples over inhabitable
    cells or beyond the top/bottom edge read 0.
    """
    ch, sh = _kernels.cos_sin(agent.heading)
    ca, sa = _kernels.cos_sin(params.sensor_angle)
    f, fl, fr = _kernels.sense_one(
        agent.x, agent.y, ch, sh, ca, sa, params.sensor_offset,
        trail.values, mask.habitable_u8(), _light_u8(light, trail.values.shape),
        params.light_sensor_attenuation)
    return SensorReadings(f, fl, fr)


def decide_rotation(readings: SensorReadings, params: ModelParams, rng) -> float:
    """Heading delta for one particle given its sensor readings.

    0 when front is strictly greatest; a uniformly random +/- rotation_angle
    when front is strictly smallest; otherwise toward the stronger side, 0 on
    ties.  Consumes at most one draw from ``rng`` (anything with
    ``next_float()``), and only in the strictly-smallest branch.
    """
    f, fl, fr = readings
    ra = params.rotation_angle
    if f > fl and f > fr:
        return 0.0
    if f < fl and f < fr:
        return ra if rng.next_float() < 0.5 else -ra
    if fr < fl:
        return ra
    if fl < fr:
        return -ra
    return 0.0


def try_move(agent: Agent, occupancy: OccupancyLattice, mask: ArenaMask,
             trail: TrailLattice, params: ModelParams, rng: Rng) -> bool:
    """Step the particle forward if its target cell is free.

    The candidate is position + step_size along the heading, x wrapped.  On
    success the particle moves, occupancy follows, and ``deposit`` is added to
    the trail at the new cell.  When the candidate cell is a wall or occupied
    by another particle the position stays and the heading is reassigned
    (uniform random, or +/- rotation_angle under ``blocked_reorient=rotate``).
    The particle must already be registered in ``occupancy`` at its cell.
    """
    cx, cy = agent.cell()
    agent_id = int(occupancy.grid[cy, cx])
    if agent_id < 0:
        raise ValueError(f"agent at cell ({cx}, {cy}) is not registered in occupancy")
    ch, sh = _kernels.cos_sin(agent.heading)
    moved, nx, ny, nh = _kernels.move_one(
        agent_id, agent.x, agent.y, agent.heading, ch, sh,
        occupancy.grid, mask.habitable_u8(), trail.values,
        params.step_size, params.deposit, params.rotation_angle,
        params.blocked_reorient == ROTATE, rng.state)
    agent.x = float(nx)
    agent.y = float(ny)
    agent.heading = float(nh)
    return bool(moved)


def init_population(mask: ArenaMask, n: int, rng: Rng):
    """Place ``n`` particles on distinct uniformly drawn habitable cells.

    Positions are cell centers; headings uniform in [0, 2*pi).  Returns
    ``(population, occupancy)``.
    """
    n = int(n)
    if n < 0:
        raise ConfigError(f"population must be >= 0, got {n}")
    cells = np.flatnonzero(mask.habitable)
    if n > cells.size:
        raise ConfigError(
            f"population {n} exceeds habitable capacity {cells.size}")
    # Partial Fisher-Yates: the first n slots become a uniform sample
    # of distinct cells.
    cells = cells.copy()
    for i in range(n):
        j = i + rng.next_below(cells.size - i)
        cells[i], cells[j] = cells[j], cells[i]
    chosen = cells[:n]
    ys, xs = np.divmod(chosen, mask.width)
    population = Population(
        x=xs.astype(np.float64) + 0.5,
        y=ys.astype(np.float64) + 0.5,
        heading=np.array([rng.next_angle() for _ in range(n)], dtype=np.float64),
    )
    occupancy = OccupancyLattice(mask.width, mask.height)
    occupancy.grid[ys, xs] = np.arange(n, dtype=np.int32)
    return population, occupancy


def scheduler_step(world: World, step_index: int, rng: Rng,
                   use_kernel: bool = True) -> None:
    """Advance the world by one step.

    Order: stimulus application for ``step_index``, one full agent sweep in a
    freshly shuffled order (sense, turn, move per particle), then trail
    diffusion and decay.  Deterministic given the rng state.  ``use_kernel``
    selects the compiled sweep; the Python reference sweep produces
    bit-identical results.
    """
    params = world.params
    light = apply_stimuli(world.trail, world.mask, world.schedule, params,
                          step_index)
    if use_kernel:
        moved = _kernels.agent_pass(
            world.population.x, world.population.y, world.population.heading,
            world.occupancy.grid, world.mask.habitable_u8(),
            world.trail.values, light.mask_u8(), rng.state,
            params.sensor_angle, params.rotation_angle, params.sensor_offset,
            params.step_size, params.deposit, params.light_sensor_attenuation,
            params.stage_order == TWO_PASS,
            params.blocked_reorient == ROTATE)
    else:
        moved = _reference_pass(world, light, rng)
    world.last_moves = int(moved)
    world.trail = diffuse_and_decay(world.trail, world.mask, params.decay)


def _reference_pass(world: World, light: Region, rng: Rng) -> int:
    # Slow twin of _kernels.agent_pass, assembled from the public per-agent
    # operations; tests pin it bit-identical to the kernel.
    population = world.population
    params = world.params
    n = len(population)
    order = np.arange(n, dtype=np.int64)
    rng.shuffle(order)
    moved = 0
    if params.stage_order == PER_AGENT:
        for i in order:
            agent = population.agent(i)
            readings = sense(agent, world.trail, world.mask, light, params)
            delta = decide_rotation(readings, params, rng)
            if delta != 0.0:
                agent.heading = float(_kernels.wrap_angle(agent.heading + delta))
            if try_move(agent, world.occupancy, world.mask, world.trail,
                        params, rng):
                moved += 1
            population.put(i, agent)
    else:
        for i in order:
            agent = population.agent(i)
            readings = sense(agent, world.trail, world.mask, light, params)
            delta = decide_rotation(readings, params, rng)
            if delta != 0.0:
                agent.heading = float(_kernels.wrap_angle(agent.heading + delta))
            population.put(i, agent)
        order = np.arange(n, dtype=np.int64)
        rng.shuffle(order)
        for i in order:
            agent = population.agent(i)
            if try_move(agent, world.occupancy, world.mask, world.trail,
                        params, rng):
                moved += 1
            population.put(i, agent)
    return moved


def check_invariants(world: World) -> list:
    """Structural invariant violations as human-readable strings.

    Checks the occupancy<->population bijection, wall exclusion, heading
    range, and trail non-negativity/wall clamp.  Empty list means consistent.
    """
    problems = []
    population = world.population
    mask = world.mask
    grid = world.occupancy.grid
    n = len(population)
    height, width = mask.habitable.shape

    cx = np.floor(population.x).astype(np.int64)
    cy = np.floor(population.y).astype(np.int64)
    in_range = (cx >= 0) & (cx < width) & (cy >= 0) & (cy < height)
    if not in_range.all():
        problems.append(f"{int((~in_range).sum())} agents outside the lattice")
        cx = np.clip(cx, 0, width - 1)
        cy = np.clip(cy, 0, height - 1)

    on_wall = ~mask.habitable[cy, cx]
    if on_wall.any():
        problems.append(f"{int(on_wall.sum())} agents on inhabitable cells")

    flat = cy * width + cx
    if np.unique(flat).size != n:
        problems.append("two agents share a cell")

    registered = grid[cy, cx] == np.arange(n, dtype=grid.dtype)
    if not registered.all():
        problems.append(
            f"{int((~registered).sum())} agents not registered at their cell")

    occupied = grid >= 0
    if int(occupied.sum()) != n:
        problems.append(
            f"occupancy holds {int(occupied.sum())} ids for {n} agents")
    if (occupied & ~mask.habitable).any():
        problems.append("occupancy marks an inhabitable cell")

    heading_ok = (population.heading >= 0.0) & (population.heading < _kernels.TWO_PI)
    if not heading_ok.all():
        problems.append(f"{int((~heading_ok).sum())} headings outside [0, 2*pi)")

    trail = world.trail.values
    if (trail < 0).any():
        problems.append("negative trail value")
    if trail[~mask.habitable].any():
        problems.append("nonzero trail on an inhabitable cell")

    return problems
