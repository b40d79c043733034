from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from itertools import product
from pathlib import Path
from typing import Any, Iterator, Mapping

import numpy as np

from app.core.errors import ConfigError, ConfigParseError, ConfigValidationError, UnknownKeyError
from app.core.models import IntegratorConfig, ModelParams, StrategyState
from app.core.presets import LoanTerm, RatePreset, apply_rate_preset, get_parameter_preset
from app.core.validation import find_param_violations

SUPPORTED_FORMATS = ("csv", "json", "svg", "webp")
DEFAULT_OUTPUT_DIR = "output"
OPTIONAL_PARAMS = {"m1": 0.0, "m2": 0.0, "m3": 0.0}

TOP_LEVEL_KEYS = {
    "params",
    "rate_preset",
    "i2_rate_preset",
    "integrator",
    "initial_states",
    "sweep",
    "basins",
    "stability",
    "seed",
    "outputs",
}
INTEGRATOR_KEYS = {"step_size", "t_max", "convergence_eps", "vertex_snap_eps", "record_every"}
OUTPUT_KEYS = {"directory", "webp_quality", *SUPPORTED_FORMATS}


@dataclass(slots=True, frozen=True)
class InitialStates:
    mode: str = "grid"
    points: tuple[StrategyState, ...] = ()
    grid: int = 2
    count: int = 0
    seed: int = 0

    def resolve(self) -> list[StrategyState]:
        if self.mode == "explicit":
            return list(self.points)
        if self.mode == "grid":
            axis = np.linspace(0.1, 0.9, self.grid) if self.grid > 1 else np.array([0.5])
            return [StrategyState(float(x), float(y), float(z)) for x, y, z in product(axis, repeat=3)]
        rng = np.random.default_rng(self.seed)
        return [StrategyState(*(float(v) for v in row)) for row in rng.random((self.count, 3))]


@dataclass(slots=True, frozen=True)
class SweepAxis:
    name: str
    min: float
    max: float
    steps: int

    def values(self) -> tuple[float, ...]:
        if self.steps == 1:
            return (self.min,)
        return tuple(float(value) for value in np.linspace(self.min, self.max, self.steps))


@dataclass(slots=True, frozen=True)
class SweepConfig:
    axes: tuple[SweepAxis, ...]
    basin_samples: int = 0

    def cells(self) -> Iterator[dict[str, float]]:
        names = [axis.name for axis in self.axes]
        for combo in product(*(axis.values() for axis in self.axes)):
            yield dict(zip(names, combo))


@dataclass(slots=True, frozen=True)
class BasinOptions:
    n_samples: int = 1000


@dataclass(slots=True, frozen=True)
class StabilityOptions:
    tol: float = 1e-9
    include_faces: bool = False


@dataclass(slots=True, frozen=True)
class OutputOptions:
    directory: Path = Path(DEFAULT_OUTPUT_DIR)
    csv: bool = True
    json: bool = True
    svg: bool = True
    webp: bool = False
    webp_quality: int = 90

    @property
    def enabled_formats(self) -> list[str]:
        return [name for name in SUPPORTED_FORMATS if getattr(self, name)]


@dataclass(slots=True, frozen=True)
class ExperimentConfig:
    params: ModelParams
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    initial_states: InitialStates = field(default_factory=InitialStates)
    sweep: SweepConfig | None = None
    basins: BasinOptions = field(default_factory=BasinOptions)
    stability: StabilityOptions = field(default_factory=StabilityOptions)
    seed: int = 0
    outputs: OutputOptions = field(default_factory=OutputOptions)


def _reject_duplicate_keys(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    section: dict[str, Any] = {}
    for key, value in pairs:
        if key in section:
            raise ConfigError(f"duplicate configuration key: {key}")
        section[key] = value
    return section


def _check_keys(section: Mapping[str, Any], allowed: set[str], prefix: str) -> None:
    for key in section:
        if key not in allowed:
            raise UnknownKeyError(f"{prefix}{key}")


def _section(data: Mapping[str, Any], key: str, prefix: str = "") -> dict[str, Any]:
    value = data.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"{prefix}{key} must be an object")
    return value


def _number(value: Any, key_path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key_path} must be a number, got {value!r}")
    try:
        number = float(value)
    except OverflowError:
        number = math.inf
    # json accepts NaN and Infinity literals
    if not math.isfinite(number):
        raise ConfigError(f"{key_path} must be a finite number, got {value!r}")
    return number


def _integer(value: Any, key_path: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key_path} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{key_path} must be >= {minimum}, got {value}")
    return value


def _boolean(value: Any, key_path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{key_path} must be true or false, got {value!r}")
    return value


def _parse_rate_preset(data: Mapping[str, Any], key: str) -> RatePreset | None:
    if key not in data:
        return None
    section = _section(data, key)
    _check_keys(section, {"term", "principal"}, f"{key}.")
    try:
        term = LoanTerm(section.get("term"))
    except ValueError:
        terms = ", ".join(term.value for term in LoanTerm)
        raise ConfigError(f"{key}.term must be one of: {terms}") from None
    if "principal" not in section:
        raise ConfigError(f"missing required key {key}.principal")
    principal = _number(section["principal"], f"{key}.principal")
    if principal < 0:
        raise ConfigError(f"{key}.principal must be >= 0")
    return RatePreset(loan_term_class=term, principal=principal)


def _parse_params(data: Mapping[str, Any]) -> ModelParams:
    section = _section(data, "params")
    names = ModelParams.field_names()
    _check_keys(section, set(names), "params.")

    i1_preset = _parse_rate_preset(data, "rate_preset")
    i2_preset = _parse_rate_preset(data, "i2_rate_preset")
    supplied = {"I1": i1_preset, "I2": i2_preset}

    values: dict[str, float] = {}
    for name in names:
        if name in section:
            values[name] = _number(section[name], f"params.{name}")
        elif name in OPTIONAL_PARAMS:
            values[name] = OPTIONAL_PARAMS[name]
        elif supplied.get(name) is not None:
            values[name] = 0.0
        else:
            raise ConfigError(f"missing required key params.{name}")

    params = ModelParams(**values)
    if i1_preset is not None:
        params = apply_rate_preset(i1_preset, params, "I1")
    if i2_preset is not None:
        params = apply_rate_preset(i2_preset, params, "I2")

    violations = find_param_violations(params)
    if violations:
        raise ConfigValidationError(violations)
    return params


def _parse_integrator(data: Mapping[str, Any]) -> IntegratorConfig:
    section = _section(data, "integrator")
    _check_keys(section, INTEGRATOR_KEYS, "integrator.")
    values: dict[str, Any] = {}
    for key, value in section.items():
        if key == "record_every":
            values[key] = _integer(value, f"integrator.{key}", 1)
        else:
            values[key] = _number(value, f"integrator.{key}")
    try:
        return IntegratorConfig(**values)
    except ValueError as error:
        raise ConfigError(f"integrator: {error}") from None


def _parse_state(value: Any, key_path: str) -> StrategyState:
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(f"{key_path} must be a list [x, y, z]")
    coordinates = [_number(item, key_path) for item in value]
    try:
        return StrategyState(*coordinates)
    except ValueError as error:
        raise ConfigError(f"{key_path}: {error}") from None


def _parse_initial_states(data: Mapping[str, Any]) -> InitialStates:
    if "initial_states" not in data:
        return InitialStates()
    value = data["initial_states"]
    if isinstance(value, list):
        points = tuple(_parse_state(item, f"initial_states[{index}]") for index, item in enumerate(value))
        return InitialStates(mode="explicit", points=points)
    if not isinstance(value, dict) or len(value) != 1:
        raise ConfigError("initial_states must be a list of points, {\"grid\": k} or {\"random\": {...}}")

    _check_keys(value, {"grid", "random"}, "initial_states.")
    if "grid" in value:
        return InitialStates(mode="grid", grid=_integer(value["grid"], "initial_states.grid", 1))

    random_section = _section(value, "random", "initial_states.")
    _check_keys(random_section, {"n", "seed"}, "initial_states.random.")
    if "n" not in random_section:
        raise ConfigError("missing required key initial_states.random.n")
    return InitialStates(
        mode="random",
        count=_integer(random_section["n"], "initial_states.random.n", 1),
        seed=_integer(random_section.get("seed", 0), "initial_states.random.seed", 0),
    )


def _parse_sweep(data: Mapping[str, Any]) -> SweepConfig | None:
    if "sweep" not in data:
        return None
    section = _section(data, "sweep")
    _check_keys(section, {"grid", "basin_samples"}, "sweep.")
    grid = _section(section, "grid", "sweep.")
    if not grid:
        raise ConfigError("sweep.grid must name at least one parameter")

    names = set(ModelParams.field_names())
    axes: list[SweepAxis] = []
    for name in sorted(grid):
        if name not in names:
            raise UnknownKeyError(f"sweep.grid.{name}")
        axis = _section(grid, name, "sweep.grid.")
        prefix = f"sweep.grid.{name}"
        _check_keys(axis, {"min", "max", "steps"}, f"{prefix}.")
        for key in ("min", "max", "steps"):
            if key not in axis:
                raise ConfigError(f"missing required key {prefix}.{key}")
        lower = _number(axis["min"], f"{prefix}.min")
        upper = _number(axis["max"], f"{prefix}.max")
        steps = _integer(axis["steps"], f"{prefix}.steps", 1)
        if lower > upper:
            raise ConfigError(f"{prefix}: min must not exceed max")
        axes.append(SweepAxis(name=name, min=lower, max=upper, steps=steps))

    basin_samples = _integer(section.get("basin_samples", 0), "sweep.basin_samples", 0)
    return SweepConfig(axes=tuple(axes), basin_samples=basin_samples)


def _parse_basins(data: Mapping[str, Any]) -> BasinOptions:
    section = _section(data, "basins")
    _check_keys(section, {"n_samples"}, "basins.")
    if "n_samples" not in section:
        return BasinOptions()
    return BasinOptions(n_samples=_integer(section["n_samples"], "basins.n_samples", 1))


def _parse_stability(data: Mapping[str, Any]) -> StabilityOptions:
    section = _section(data, "stability")
    _check_keys(section, {"tol", "include_faces"}, "stability.")
    options = StabilityOptions()
    if "tol" in section:
        tol = _number(section["tol"], "stability.tol")
        if not tol > 0:
            raise ConfigError("stability.tol must be positive")
        options = replace(options, tol=tol)
    if "include_faces" in section:
        options = replace(options, include_faces=_boolean(section["include_faces"], "stability.include_faces"))
    return options


def _parse_outputs(data: Mapping[str, Any]) -> OutputOptions:
    section = _section(data, "outputs")
    _check_keys(section, OUTPUT_KEYS, "outputs.")
    options = OutputOptions()
    if "directory" in section:
        if not isinstance(section["directory"], str) or not section["directory"].strip():
            raise ConfigError("outputs.directory must be a non-empty string")
        options = replace(options, directory=Path(section["directory"]))
    toggles = {name: _boolean(section[name], f"outputs.{name}") for name in SUPPORTED_FORMATS if name in section}
    if "webp_quality" in section:
        quality = _integer(section["webp_quality"], "outputs.webp_quality", 1)
        if quality > 100:
            raise ConfigError("outputs.webp_quality must be <= 100")
        toggles["webp_quality"] = quality
    options = replace(options, **toggles)
    if not options.enabled_formats:
        raise ConfigError("at least one output format must be enabled")
    return options


def parse_config(data: Any) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be an object")
    _check_keys(data, TOP_LEVEL_KEYS, "")

    return ExperimentConfig(
        params=_parse_params(data),
        integrator=_parse_integrator(data),
        initial_states=_parse_initial_states(data),
        sweep=_parse_sweep(data),
        basins=_parse_basins(data),
        stability=_parse_stability(data),
        seed=_integer(data.get("seed", 0), "seed", 0),
        outputs=_parse_outputs(data),
    )


def load_config(path: Path | str) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as error:
        raise ConfigError(f"Cannot read configuration {path}: {error.strerror or error}") from None

    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as error:
        line_start = raw.rfind(b"\n", 0, error.start) + 1
        line = raw.count(b"\n", 0, error.start) + 1
        raise ConfigParseError(
            str(path), f"invalid UTF-8 byte at offset {error.start}", line, error.start - line_start + 1
        ) from None

    try:
        data = json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as error:
        raise ConfigParseError(str(path), error.msg, error.lineno, error.colno) from None

    return parse_config(data)


def config_from_preset(name: str) -> ExperimentConfig:
    try:
        params = get_parameter_preset(name)
    except KeyError as error:
        raise ConfigError(str(error.args[0])) from None
    return ExperimentConfig(params=params)


def with_overrides(
    config: ExperimentConfig,
    output_dir: Path | None = None,
    seed: int | None = None,
    formats: list[str] | None = None,
) -> ExperimentConfig:
    outputs = config.outputs
    if output_dir is not None:
        outputs = replace(outputs, directory=output_dir)
    if formats is not None:
        unknown = sorted(set(formats) - set(SUPPORTED_FORMATS))
        if unknown:
            raise ConfigError(f"Unsupported output format(s): {', '.join(unknown)}")
        if not formats:
            raise ConfigError("at least one output format must be enabled")
        outputs = replace(outputs, **{name: name in formats for name in SUPPORTED_FORMATS})
    return replace(config, outputs=outputs, seed=config.seed if seed is None else seed)


def config_to_dict(config: ExperimentConfig) -> dict[str, Any]:
    states = config.initial_states
    if states.mode == "explicit":
        initial: Any = [list(point.as_tuple()) for point in states.points]
    elif states.mode == "grid":
        initial = {"grid": states.grid}
    else:
        initial = {"random": {"n": states.count, "seed": states.seed}}

    payload: dict[str, Any] = {
        "params": config.params.as_dict(),
        "integrator": {
            "step_size": config.integrator.step_size,
            "t_max": config.integrator.t_max,
            "convergence_eps": config.integrator.convergence_eps,
            "vertex_snap_eps": config.integrator.vertex_snap_eps,
            "record_every": config.integrator.record_every,
        },
        "initial_states": initial,
        "basins": {"n_samples": config.basins.n_samples},
        "stability": {"tol": config.stability.tol, "include_faces": config.stability.include_faces},
        "seed": config.seed,
        "outputs": {
            "directory": config.outputs.directory.as_posix(),
            **{name: getattr(config.outputs, name) for name in SUPPORTED_FORMATS},
            "webp_quality": config.outputs.webp_quality,
        },
    }
    if config.sweep is not None:
        payload["sweep"] = {
            "grid": {
                axis.name: {"min": axis.min, "max": axis.max, "steps": axis.steps} for axis in config.sweep.axes
            },
            "basin_samples": config.sweep.basin_samples,
        }
    return payload


def dump_config(config: ExperimentConfig, path: Path) -> Path:
    with path.open("w", encoding="utf-8") as stream:
        json.dump(config_to_dict(config), stream, indent=2, ensure_ascii=False)
    return path
