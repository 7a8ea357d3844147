"""Particle-based slime mould simulation.

A population of particles coupled through a diffusing, decaying trail field,
driven by timed attractant and light stimuli, with density observables and
deterministic seeded runs.
"""

from .agents import (Agent, ModelParams, OccupancyLattice, Population,
                     SensorReadings, World, check_invariants, decide_rotation,
                     init_population, scheduler_step, sense, try_move)
from .configfile import build_config, format_config, parse_config
from .errors import ConfigError
from .experiment import (ArenaSpec, ExperimentConfig, RunRecord, Snapshot,
                         Violation, config_hash, preset_la, preset_li, run,
                         validate)
from .lattice import (ArenaMask, Region, TrailLattice, add_to_region,
                      build_torus, build_tube_arena, diffuse_and_decay,
                      scale_region, wrap_x)
from .measurement import (DensityProfile, RunSummary, SpaceTimeMatrix,
                          column_density, contrast_index, onset_columns,
                          recovery_step, sample_if_due, uniformity_cv)
from .outputs import (render_snapshot, render_spacetime, write_bundle,
                      write_density_csv, write_summary_json)
from .rng import Rng
from .stimulus import (StimulusEvent, StimulusSchedule, active_events,
                       apply_stimuli, middle_third_region)

__version__ = "1.0.0"

__all__ = [
    "Agent", "ArenaMask", "ArenaSpec", "ConfigError", "DensityProfile",
    "ExperimentConfig", "ModelParams", "OccupancyLattice", "Population",
    "Region", "Rng", "RunRecord", "RunSummary", "SensorReadings", "Snapshot",
    "SpaceTimeMatrix", "StimulusEvent", "StimulusSchedule", "TrailLattice",
    "Violation", "World", "active_events", "add_to_region", "apply_stimuli",
    "build_config", "build_torus", "build_tube_arena", "check_invariants",
    "column_density", "config_hash", "contrast_index", "decide_rotation",
    "diffuse_and_decay", "format_config", "init_population",
    "middle_third_region", "onset_columns", "parse_config", "preset_la",
    "preset_li", "recovery_step", "render_snapshot", "render_spacetime",
    "run", "sample_if_due", "scale_region", "scheduler_step", "sense",
    "try_move", "uniformity_cv", "validate", "wrap_x", "write_bundle",
    "write_density_csv", "write_summary_json",
]
