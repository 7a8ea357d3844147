"""The config file grammar: flat, line-oriented ``key = value`` text.

``#`` starts a comment, blank lines are ignored, unknown keys are hard
errors.  Every key must be present unless an explicit ``preset = li|la`` line
supplies defaults for the rest.  Angles are radians; numbers use Python
literal syntax.  ``stimulus = none`` disables the event (its window keys are
then inert but must still parse).
"""

from __future__ import annotations

from pathlib import Path

from .agents import BLOCKED_MODES, STAGE_ORDERS, ModelParams
from .errors import ConfigError
from .experiment import (ArenaSpec, ExperimentConfig, Violation, preset_la,
                         preset_li, validate)
from .lattice import build_tube_arena
from .stimulus import (ATTRACTANT, EVENT_KINDS, LIGHT, StimulusEvent,
                       StimulusSchedule, middle_third_region)

NO_STIMULUS = "none"
PRESETS = ("li", "la")

_MODEL_FLOATS = (
    "sensor_angle", "rotation_angle", "sensor_offset", "step_size",
    "deposit", "decay", "light_sensor_attenuation", "light_trail_factor",
    "background_rate", "stimulus_rate",
)

# Canonical key order: (name, parser). Echo files are written in this order.
_KEY_PARSERS = {}


def _int_key(raw: str) -> int:
    return int(raw, 10)


def _float_key(raw: str) -> float:
    return float(raw)


def _enum_key(allowed):
    def parse(raw: str) -> str:
        if raw not in allowed:
            raise ValueError(f"expected one of {', '.join(allowed)}")
        return raw
    return parse


KEYS = (
    ("width", _int_key),
    ("height", _int_key),
    ("border_rows", _int_key),
    ("population", _int_key),
    ("sensor_angle", _float_key),
    ("rotation_angle", _float_key),
    ("sensor_offset", _float_key),
    ("step_size", _float_key),
    ("deposit", _float_key),
    ("decay", _float_key),
    ("light_sensor_attenuation", _float_key),
    ("light_trail_factor", _float_key),
    ("background_rate", _float_key),
    ("stimulus_rate", _float_key),
    ("stage_order", _enum_key(STAGE_ORDERS)),
    ("blocked_reorient", _enum_key(BLOCKED_MODES)),
    ("stimulus", _enum_key(EVENT_KINDS + (NO_STIMULUS,))),
    ("stimulus_start", _int_key),
    ("stimulus_end", _int_key),
    ("total_steps", _int_key),
    ("sample_interval", _int_key),
    ("snapshot_interval", _int_key),
    ("seed", _int_key),
)
_KEY_PARSERS = dict(KEYS)
KEY_NAMES = tuple(name for name, _ in KEYS)


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse config text; ``source`` names the origin in error messages."""
    values: dict = {}
    preset = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', "
                              f"got {raw.strip()!r}")
        if key == "preset":
            if preset is not None:
                raise ConfigError(f"{source}:{lineno}: duplicate key 'preset'")
            if value not in PRESETS:
                raise ConfigError(f"{source}:{lineno}: preset must be one of "
                                  f"{', '.join(PRESETS)}, got {value!r}")
            preset = value
            continue
        parser = _KEY_PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(
                f"{source}:{lineno}: invalid value for {key!r}: {value!r} "
                f"({exc})") from None
    return build_config(values, preset)


def parse_config(path) -> ExperimentConfig:
    """Parse and validate a config file into an ExperimentConfig."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except IsADirectoryError:
        raise ConfigError(f"config path is a directory: {path}") from None
    return parse_config_text(text, source=str(path))


def build_config(values: dict, preset=None) -> ExperimentConfig:
    """Assemble and validate a config from flat key values.

    With ``preset`` ("li" or "la"), missing keys take that preset's values;
    without it every key is required.
    """
    if preset is not None:
        base = config_values(preset_li() if preset == "li" else preset_la())
        merged = {**base, **values}
    else:
        missing = [name for name in KEY_NAMES if name not in values]
        if missing:
            raise ConfigError(
                "missing keys (add 'preset = li' or 'preset = la' to use "
                "defaults): " + ", ".join(missing))
        merged = dict(values)

    arena = ArenaSpec(merged["width"], merged["height"], merged["border_rows"])
    model = ModelParams(
        stage_order=merged["stage_order"],
        blocked_reorient=merged["blocked_reorient"],
        **{name: merged[name] for name in _MODEL_FLOATS},
    )

    kind = merged["stimulus"]
    if kind == NO_STIMULUS:
        events = ()
    else:
        # Events need the arena; surface dimension problems as violations
        # first so bad configs fail with the full list, not mid-construction.
        pre = validate(ExperimentConfig(
            arena=arena, population=merged["population"], model=model,
            schedule=StimulusSchedule(events=(),
                                      background_rate=merged["background_rate"]),
            total_steps=merged["total_steps"],
            sample_interval=merged["sample_interval"],
            snapshot_interval=merged["snapshot_interval"],
            seed=merged["seed"],
        ))
        if merged["stimulus_start"] >= merged["stimulus_end"]:
            pre.append(Violation(
                "schedule.event.window",
                f"stimulus window must satisfy start < end, got "
                f"[{merged['stimulus_start']}, {merged['stimulus_end']})"))
        if pre:
            raise ConfigError(
                "invalid configuration: " + "; ".join(str(x) for x in pre), pre)
        mask = build_tube_arena(arena.width, arena.height, arena.border_rows)
        events = (StimulusEvent(
            kind=kind,
            region=middle_third_region(mask),
            start_step=merged["stimulus_start"],
            end_step=merged["stimulus_end"],
            magnitude=merged["stimulus_rate"] if kind == ATTRACTANT else 0.0,
        ),)

    config = ExperimentConfig(
        arena=arena,
        population=merged["population"],
        model=model,
        schedule=StimulusSchedule(events=events,
                                  background_rate=merged["background_rate"]),
        total_steps=merged["total_steps"],
        sample_interval=merged["sample_interval"],
        snapshot_interval=merged["snapshot_interval"],
        seed=merged["seed"],
    )
    violations = validate(config)
    if violations:
        raise ConfigError(
            "invalid configuration: " + "; ".join(str(x) for x in violations),
            violations)
    return config


# Window keys written for event-less configs; inert on parse-back.
_IDLE_WINDOW = (1000, 4000)


def config_values(config: ExperimentConfig) -> dict:
    """Flatten a config back to the file grammar's key set.

    Raises ConfigError for configs the grammar cannot express (more than one
    event, a region other than the middle third, or event magnitudes that
    disagree with the model's rates).
    """
    values = {
        "width": config.arena.width,
        "height": config.arena.height,
        "border_rows": config.arena.border_rows,
        "population": config.population,
        "stage_order": config.model.stage_order,
        "blocked_reorient": config.model.blocked_reorient,
        "total_steps": config.total_steps,
        "sample_interval": config.sample_interval,
        "snapshot_interval": config.snapshot_interval,
        "seed": config.seed,
    }
    for name in _MODEL_FLOATS:
        values[name] = getattr(config.model, name)

    events = config.schedule.events
    if len(events) > 1:
        raise ConfigError(
            f"{len(events)} stimulus events cannot be expressed in the "
            "config grammar (at most 1)")
    if config.schedule.background_rate != config.model.background_rate:
        raise ConfigError(
            "schedule background_rate disagrees with the model value; "
            "not expressible in the flat grammar")
    if not events:
        values["stimulus"] = NO_STIMULUS
        values["stimulus_start"], values["stimulus_end"] = _IDLE_WINDOW
        return values

    ev = events[0]
    mask = build_tube_arena(config.arena.width, config.arena.height,
                            config.arena.border_rows)
    if ev.region != middle_third_region(mask):
        raise ConfigError("event region is not the middle third; "
                          "not expressible in the flat grammar")
    expected = config.model.stimulus_rate if ev.kind == ATTRACTANT else 0.0
    if ev.magnitude != expected:
        raise ConfigError("event magnitude disagrees with stimulus_rate; "
                          "not expressible in the flat grammar")
    values["stimulus"] = ev.kind
    values["stimulus_start"] = ev.start_step
    values["stimulus_end"] = ev.end_step
    return values


def format_config(config: ExperimentConfig) -> str:
    """Render a config as parseable text, keys in canonical order."""
    values = config_values(config)
    lines = ["# effective configuration"]
    for name in KEY_NAMES:
        value = values[name]
        rendered = repr(float(value)) if isinstance(value, float) else str(value)
        lines.append(f"{name} = {rendered}")
    return "\n".join(lines) + "\n"
