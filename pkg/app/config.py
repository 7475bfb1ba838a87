"""
Simulation Configuration

Precedence: built-in defaults <- config file (--config) <- key=value flags.
A config file is either YAML (flat parameter names plus `init:` and
`fbs:` sections) or plain `key = value` lines. Dotted names
(`fbs.relaxation`, `init.x`) work in files and flags alike.
"""

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from sirsv.analysis.study import parse_values
from sirsv.analysis.sweep import AxisSpec, parse_axis
from sirsv.errors import ConfigurationError
from sirsv.model.params import EpidemicState, ModelParams, parse_number
from sirsv.numerics.grid import TimeGrid
from sirsv.solvers.control_solver import FbsConfig

# ============================================================================
# Models
# ============================================================================


class FbsSettings(BaseModel):
    """Forward-backward sweep tolerances (the grid comes from SimConfig)."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    relaxation: float = Field(0.5, gt=0, le=1)
    conv_tol: float = Field(1e-4, gt=0)
    max_iters: int = Field(5000, ge=1)
    u_init: float = Field(0.0, ge=0)

    @field_validator("relaxation", "conv_tol", "u_init", mode="before")
    @classmethod
    def _accept_fractions(cls, value: Any) -> Any:
        return parse_number(value)


class SimConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    params: ModelParams = Field(default_factory=ModelParams)
    init: EpidemicState = Field(default_factory=EpidemicState)
    dt: float = Field(0.1, gt=0)
    t_end: float = Field(1000.0, gt=0)
    eq_tol: float = Field(1e-8, gt=0)
    fbs: FbsSettings = Field(default_factory=FbsSettings)
    out_dir: str = "results"
    workers: int = Field(1, ge=1)

    @field_validator("dt", "t_end", "eq_tol", mode="before")
    @classmethod
    def _accept_fractions(cls, value: Any) -> Any:
        return parse_number(value)

    @model_validator(mode="after")
    def _check_grid(self) -> "SimConfig":
        TimeGrid(0.0, self.t_end, self.dt)
        return self

    def horizon(self) -> TimeGrid:
        return TimeGrid(0.0, self.t_end, self.dt)

    def fbs_config(self) -> FbsConfig:
        return FbsConfig(
            grid=self.horizon(),
            relaxation=self.fbs.relaxation,
            conv_tol=self.fbs.conv_tol,
            max_iters=self.fbs.max_iters,
            u_init=self.fbs.u_init,
        )


# ============================================================================
# Key catalogue
# ============================================================================

PARAM_KEYS = tuple(ModelParams.model_fields)
TOP_KEYS = ("dt", "t_end", "eq_tol", "out_dir", "workers")
# `x` is the documented name of the initial rate; `rate` is accepted as well
INIT_KEYS = {"s": "s", "v": "v", "i": "i", "r": "r", "x": "rate", "rate": "rate"}
FBS_KEYS = tuple(FbsSettings.model_fields)

KNOWN_KEYS = (
    set(PARAM_KEYS)
    | set(TOP_KEYS)
    | {f"init.{key}" for key in INIT_KEYS}
    | {f"fbs.{key}" for key in FBS_KEYS}
)

FLAT_LINE = re.compile(r"^([A-Za-z_][\w.]*)\s*=(.*)$")


def _flatten(data: Any, lines: Dict[str, int], source: str, prefix: str = "") -> Dict[str, Any]:
    if not isinstance(data, dict):
        raise ConfigurationError(f"{source}: expected a mapping of settings, got {type(data).__name__}")
    flat: Dict[str, Any] = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict) and name in ("init", "fbs"):
            flat.update(_flatten(value, lines, source, f"{name}."))
            continue
        if name not in KNOWN_KEYS:
            raise ConfigurationError(f"{source}: unknown key {name!r}{_at_line(lines, name)}")
        flat[name] = value
    return flat


def _at_line(lines: Dict[str, int], name: str) -> str:
    return f" (line {lines[name]})" if name in lines else ""


def _key_lines(node: Any, prefix: str = "") -> Dict[str, int]:
    """1-based line number of every key in a composed YAML mapping."""
    lines: Dict[str, int] = {}
    if not isinstance(node, yaml.MappingNode):
        return lines
    for key_node, value_node in node.value:
        name = f"{prefix}{key_node.value}"
        lines[name] = key_node.start_mark.line + 1
        lines.update(_key_lines(value_node, f"{name}."))
    return lines


def _parse_yaml(text: str, source: str) -> Tuple[Dict[str, Any], Dict[str, int]]:
    try:
        data = yaml.safe_load(text)
        lines = _key_lines(yaml.compose(text))
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigurationError(f"{source}: invalid YAML{where}: {getattr(e, 'problem', e)}") from e
    if data is None:
        return {}, {}
    return _flatten(data, lines, source), lines


def _is_flat(text: str) -> bool:
    """A file whose first setting line reads `key = value` uses the flat format."""
    for line in text.splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            return FLAT_LINE.match(stripped) is not None
    return False


def _parse_flat(text: str, source: str) -> Tuple[Dict[str, Any], Dict[str, int]]:
    """One `key = value` per line; blank lines and `#` comments are skipped."""
    flat: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        match = FLAT_LINE.match(stripped)
        if match is None:
            raise ConfigurationError(f"{source}: expected key = value (line {number})")
        key, raw = match.group(1), match.group(2)
        if key not in KNOWN_KEYS:
            raise ConfigurationError(f"{source}: unknown key {key!r} (line {number})")
        flat[key] = _scalar(raw, f"{source}: {key} (line {number})")
        lines[key] = number
    return flat, lines


def _scalar(raw: str, what: str) -> Any:
    try:
        return yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as e:
        raise ConfigurationError(f"{what}: {e}") from e


def parse_override(text: str) -> Tuple[str, Any]:
    """`key=value`; the value is read as a YAML scalar (so 1e-3, true, 1/90 all work)."""
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigurationError(f"override {text!r}: expected key=value")
    if key not in KNOWN_KEYS:
        raise ConfigurationError(f"override {text!r}: unknown key {key!r}")
    return key, _scalar(raw, f"override {text!r}")


def _nest(flat: Dict[str, Any]) -> Dict[str, Any]:
    nested: Dict[str, Any] = {"params": {}, "init": {}, "fbs": {}}
    for name, value in flat.items():
        if name in PARAM_KEYS:
            nested["params"][name] = value
        elif name.startswith("init."):
            nested["init"][INIT_KEYS[name[len("init."):]]] = value
        elif name.startswith("fbs."):
            nested["fbs"][name[len("fbs."):]] = value
        else:
            nested[name] = value
    return nested


def _flat_name(loc: Tuple[Any, ...]) -> str:
    parts = [str(part) for part in loc]
    if parts and parts[0] == "params":
        parts = parts[1:]
    elif parts and parts[0] == "init" and len(parts) > 1 and parts[1] == "rate":
        parts = ["init", "x"] + parts[2:]
    return ".".join(parts)


def build_config(flat: Dict[str, Any], lines: Optional[Dict[str, int]] = None) -> SimConfig:
    lines = lines or {}
    try:
        return SimConfig.model_validate(_nest(flat))
    except ValidationError as e:
        problems = []
        for detail in e.errors():
            name = _flat_name(detail.get("loc", ()))
            label = name or "configuration"
            problems.append(f"{label}{_at_line(lines, name)}: {detail.get('msg')}")
        raise ConfigurationError("invalid configuration: " + "; ".join(problems)) from e


def load_config(path: Optional[Union[str, Path]] = None, overrides: Iterable[str] = ()) -> SimConfig:
    """
    Build a SimConfig from an optional config file and `key=value` overrides.

    Raises ConfigurationError for missing/unreadable files, YAML syntax
    errors (with line and column), unknown keys (with line) and invalid
    values (naming the field).
    """
    flat: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"cannot read config file {path}: {e.strerror or e}") from e
        parse = _parse_flat if _is_flat(text) else _parse_yaml
        flat, lines = parse(text, str(path))

    for text in overrides:
        key, value = parse_override(text)
        flat[key] = value
        lines.pop(key, None)

    return build_config(flat, lines)


def dump_config(cfg: SimConfig) -> str:
    """Effective configuration as YAML; loading it reproduces the same SimConfig."""
    data: Dict[str, Any] = dict(cfg.params.model_dump())
    init = cfg.init
    data["init"] = {"s": init.s, "v": init.v, "i": init.i, "r": init.r, "x": init.rate}
    data["fbs"] = cfg.fbs.model_dump()
    data.update(
        dt=cfg.dt,
        t_end=cfg.t_end,
        eq_tol=cfg.eq_tol,
        out_dir=cfg.out_dir,
        workers=cfg.workers,
    )
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=False)


# ============================================================================
# Sweep and study presets
# ============================================================================


@dataclass(frozen=True)
class SweepPreset:
    name: str
    axis1: AxisSpec
    axis2: AxisSpec
    overrides: Dict[str, Any] = field(default_factory=dict)
    description: str = ""

    def override_flags(self) -> Tuple[str, ...]:
        return tuple(f"{key}={value}" for key, value in self.overrides.items())


def load_presets(path: Union[str, Path]) -> Dict[str, SweepPreset]:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except OSError as e:
        raise ConfigurationError(f"cannot read presets file {path}: {e.strerror or e}") from e
    except yaml.YAMLError as e:
        raise ConfigurationError(f"{path}: invalid YAML: {e}") from e

    presets = {}
    for name, entry in (data.get("presets") or {}).items():
        try:
            overrides = dict(entry.get("overrides") or {})
            for key in overrides:
                if key not in KNOWN_KEYS:
                    raise ConfigurationError(f"unknown override key {key!r}")
            presets[name] = SweepPreset(
                name=name,
                axis1=parse_axis(str(entry["axis1"])),
                axis2=parse_axis(str(entry["axis2"])),
                overrides=overrides,
                description=str(entry.get("description", "")),
            )
        except (KeyError, AttributeError, ConfigurationError) as e:
            raise ConfigurationError(f"{path}: preset {name!r} is invalid: {e}") from e
    return presets


@dataclass(frozen=True)
class StudyPreset:
    name: str
    parameter: str
    values: Tuple[float, ...]
    description: str = ""


def load_study_presets(path: Union[str, Path]) -> Dict[str, StudyPreset]:
    """Named one-parameter studies from the `studies:` section of a presets file."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except OSError as e:
        raise ConfigurationError(f"cannot read presets file {path}: {e.strerror or e}") from e
    except yaml.YAMLError as e:
        raise ConfigurationError(f"{path}: invalid YAML: {e}") from e

    presets = {}
    for name, entry in (data.get("studies") or {}).items():
        try:
            parameter = str(entry["parameter"])
            if parameter not in PARAM_KEYS:
                raise ConfigurationError(f"unknown parameter {parameter!r}")
            presets[name] = StudyPreset(
                name=name,
                parameter=parameter,
                values=parse_values(",".join(str(value) for value in entry["values"])),
                description=str(entry.get("description", "")),
            )
        except (KeyError, TypeError, AttributeError, ConfigurationError) as e:
            raise ConfigurationError(f"{path}: study {name!r} is invalid: {e}") from e
    return presets
