"""Plain-text configuration files.

Flat key-value sections mirror the three parameter types::

    [control]   -> ControlParams
    [energy]    -> EnergyParams
    [scenario]  -> ScenarioSpec

All keys are optional; absent keys take the catalog defaults.  Unknown
sections or keys are rejected with their location.  Floats are written with
``repr`` so emitting and re-reading the defaults round-trips bit-exactly.

The ``[scenario]`` section accepts an optional ``preset`` key naming a
built-in experiment; explicit keys override the preset's fields.  Leader
events are written as comma-separated ``time:target`` pairs where the target
is a speed in m/s or the word ``hold`` (freeze at the realized speed).
"""

from __future__ import annotations

import configparser
import io
from dataclasses import fields, replace
from pathlib import Path

from .params import (
    Controller,
    ControlParams,
    EnergyParams,
    ScenarioSpec,
    default_params,
)


class ConfigError(ValueError):
    """Malformed configuration, with the offending location in the message."""


_CONTROL_FIELDS = tuple(f.name for f in fields(ControlParams))
_ENERGY_FIELDS = tuple(f.name for f in fields(EnergyParams))
_SCENARIO_FIELDS = ("preset", "n_vehicles", "v_init", "duration", "dt",
                    "controller", "events", "grade")


def format_events(events: tuple[tuple[float, float | None], ...]) -> str:
    return ", ".join(
        f"{t!r}:{'hold' if v is None else repr(v)}" for t, v in events
    )


def parse_events(text: str, *, where: str = "events") -> tuple[tuple[float, float | None], ...]:
    out: list[tuple[float, float | None]] = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            time_part, _, target_part = chunk.partition(":")
            t = float(time_part)
            target = None if target_part.strip().lower() == "hold" else float(target_part)
        except ValueError as exc:
            raise ConfigError(f"{where}: cannot parse event {chunk!r} "
                              "(expected time:speed or time:hold)") from exc
        out.append((t, target))
    return tuple(out)


def parse_controller(text: str, *, where: str = "controller") -> Controller:
    key = text.strip().lower().replace("-", "_")
    for member in Controller:
        if key in (member.value, member.name.lower()):
            return member
    valid = ", ".join(m.value for m in Controller)
    raise ConfigError(f"{where}: unknown controller {text!r} (valid: {valid})")


def _parse_float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"section [{section}], key {key!r}: "
                          f"cannot parse {raw!r} as a number") from exc


def _load_parser(text: str, source: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return parser


def load_config(
    path: str | Path | None = None,
    *,
    text: str | None = None,
) -> tuple[ControlParams, EnergyParams, ScenarioSpec | None]:
    """Read a config file (or literal ``text``); absent keys take defaults.

    Returns ``(control, energy, scenario)`` where ``scenario`` is None when
    the file has no ``[scenario]`` section.
    """
    source = "<config>" if path is None else str(path)
    if text is None:
        if path is None:
            parser = _load_parser("", source)
        else:
            parser = _load_parser(Path(path).read_text(), source)
    else:
        parser = _load_parser(text, source)

    control, energy = default_params()
    for section in parser.sections():
        if section not in ("control", "energy", "scenario"):
            raise ConfigError(f"{source}: unknown section [{section}]")

    if parser.has_section("control"):
        overrides = {}
        for key, raw in parser.items("control"):
            if key not in _CONTROL_FIELDS:
                raise ConfigError(f"{source}: section [control], unknown key {key!r}")
            overrides[key] = _parse_float("control", key, raw)
        control = replace(control, **overrides)

    if parser.has_section("energy"):
        overrides = {}
        for key, raw in parser.items("energy"):
            if key not in _ENERGY_FIELDS:
                raise ConfigError(f"{source}: section [energy], unknown key {key!r}")
            overrides[key] = _parse_float("energy", key, raw)
        try:
            energy = replace(energy, **overrides)
        except ValueError as exc:
            raise ConfigError(f"{source}: section [energy]: {exc}") from exc

    scenario: ScenarioSpec | None = None
    if parser.has_section("scenario"):
        scenario = _scenario_from_section(parser, source)
    return control, energy, scenario


def _scenario_from_section(parser: configparser.ConfigParser, source: str) -> ScenarioSpec:
    # Imported lazily: the harness depends on this module's siblings.
    from .harness import build_preset

    items = dict(parser.items("scenario"))
    for key in items:
        if key not in _SCENARIO_FIELDS:
            raise ConfigError(f"{source}: section [scenario], unknown key {key!r}")

    base: ScenarioSpec | None = None
    if "preset" in items:
        try:
            base = build_preset(items.pop("preset"))
        except KeyError as exc:
            raise ConfigError(f"{source}: section [scenario], key 'preset': {exc}") from exc

    kwargs: dict[str, object] = {}
    if "n_vehicles" in items:
        try:
            kwargs["n_vehicles"] = int(items.pop("n_vehicles"))
        except ValueError as exc:
            raise ConfigError(f"{source}: section [scenario], key 'n_vehicles': "
                              f"not an integer") from exc
    for key in ("v_init", "duration", "dt", "grade"):
        if key in items:
            kwargs[key] = _parse_float("scenario", key, items.pop(key))
    if "controller" in items:
        kwargs["controller"] = parse_controller(
            items.pop("controller"), where=f"{source}: section [scenario], key 'controller'")
    if "events" in items:
        kwargs["events"] = parse_events(
            items.pop("events"), where=f"{source}: section [scenario], key 'events'")

    try:
        if base is not None:
            return replace(base, **kwargs)
        defaults = dict(n_vehicles=2, v_init=18.0, duration=300.0, dt=0.01,
                        controller=Controller.PID, events=(), grade=0.0)
        defaults.update(kwargs)
        return ScenarioSpec(**defaults)  # type: ignore[arg-type]
    except ValueError as exc:
        raise ConfigError(f"{source}: section [scenario]: {exc}") from exc


def emit_config(
    control: ControlParams,
    energy: EnergyParams,
    scenario: ScenarioSpec | None = None,
) -> str:
    """Serialize parameters to config text; floats keep full precision."""
    buf = io.StringIO()
    buf.write("[control]\n")
    for name in _CONTROL_FIELDS:
        buf.write(f"{name} = {getattr(control, name)!r}\n")
    buf.write("\n[energy]\n")
    for name in _ENERGY_FIELDS:
        buf.write(f"{name} = {getattr(energy, name)!r}\n")
    if scenario is not None:
        buf.write("\n[scenario]\n")
        buf.write(f"n_vehicles = {scenario.n_vehicles}\n")
        buf.write(f"v_init = {scenario.v_init!r}\n")
        buf.write(f"duration = {scenario.duration!r}\n")
        buf.write(f"dt = {scenario.dt!r}\n")
        buf.write(f"controller = {scenario.controller.value}\n")
        buf.write(f"events = {format_events(scenario.events)}\n")
        buf.write(f"grade = {scenario.grade!r}\n")
    return buf.getvalue()


def emit_defaults(scenario: ScenarioSpec | None = None) -> str:
    """Config text reproducing the full default parameter catalog."""
    control, energy = default_params()
    if scenario is None:
        scenario = ScenarioSpec(n_vehicles=2, v_init=18.0, duration=300.0,
                                dt=0.01, controller=Controller.PID)
    return emit_config(control, energy, scenario)
