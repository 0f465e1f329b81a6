"""Run configuration, YAML round-trip and the figure presets.

A config file holds one or more YAML documents, each a :class:`RunConfig`.
Unknown keys and ill-typed values are rejected with the dotted field path and
the line they appear on.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
import yaml

from .core import FieldState, Grid1D, ValidationError, make_grid, sample
from .flux import (FLUX_FAMILIES, IRREGULARIZATION_FAMILIES, REGULARIZATION_ORDERS, FluxSpec,
                   IrregularizationSpec, RegularizationSpec)
from .solver import SchemeConfig, SpectralFilter

SCHEMA_VERSION = 1
PROFILES = ("sin", "shifted-sin", "riemann-step", "cosh", "constant", "expression")


class ConfigError(ValidationError):
    def __init__(self, message: str, path: str = "", line: Optional[int] = None):
        self.path = path
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if path:
            where.append(f"field '{path}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass(frozen=True)
class GridConfig:
    length: float = 1.0
    cells: int = 500
    origin: float = 0.0

    def build(self) -> Grid1D:
        return make_grid(self.length, self.cells, True, self.origin)


@dataclass(frozen=True)
class InitialConfig:
    """Named initial profile; unused parameters are ignored by the chosen profile."""

    profile: str = "sin"
    amplitude: float = 1.0
    offset: float = 0.0
    wavenumber: int = 1
    left: float = 1.0
    right: float = 0.0
    position: float = 0.5
    alpha: float = 0.2
    beta: float = 0.5
    epsilon: float = 1e-4
    value: float = 0.0
    expression: str = ""

    def function(self, length: float) -> Callable:
        p = self.profile
        if p in ("sin", "shifted-sin"):
            k = 2 * math.pi * self.wavenumber / length
            return lambda x: self.amplitude * np.sin(k * x) + self.offset
        if p == "riemann-step":
            return lambda x: np.where(x <= self.position, self.left, self.right)
        if p == "cosh":
            w = abs(self.alpha) * math.sqrt(self.epsilon)
            return lambda x: self.alpha * np.cosh((x - self.beta) / w)
        if p == "constant":
            return lambda x: np.full_like(x, self.value)
        if p == "expression":
            code = compile(self.expression, "<initial.expression>", "eval")
            names = {k: getattr(np, k) for k in ("sin", "cos", "exp", "tanh", "cosh", "sinh", "abs",
                                                  "where", "sqrt", "pi", "log")}
            return lambda x: np.asarray(eval(code, {"__builtins__": {}}, dict(names, x=x, L=length)),
                                        dtype=float) * np.ones_like(x)
        raise ValidationError(f"unknown profile {p!r}")


@dataclass(frozen=True)
class FluxConfig:
    family: str = "hopf"


@dataclass(frozen=True)
class IrregularizationConfig:
    family: str = "rational"
    epsilon: float = 0.0


@dataclass(frozen=True)
class RegularizationConfig:
    eta: float = 0.0
    order: int = 0


@dataclass(frozen=True)
class SchemeSection:
    cfl: float = 0.4
    dt: Optional[float] = None
    abort_on_nonfinite: bool = True


@dataclass(frozen=True)
class SystemConfig:
    """Two-component run; ``seed`` picks v0: ``derivative`` (D_x u0) or ``zero``."""

    kind: str = "tans-viscous"
    eta: float = 0.0
    seed: str = "derivative"


@dataclass(frozen=True)
class ConvergenceConfig:
    levels: int = 3


@dataclass(frozen=True)
class RunConfig:
    schema: int = SCHEMA_VERSION
    name: str = "run"
    grid: GridConfig = field(default_factory=GridConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    flux: FluxConfig = field(default_factory=FluxConfig)
    irregularization: IrregularizationConfig = field(default_factory=IrregularizationConfig)
    regularization: RegularizationConfig = field(default_factory=RegularizationConfig)
    scheme: SchemeSection = field(default_factory=SchemeSection)
    t_end: float = 1.0
    stride: int = 0
    snapshot_times: tuple = ()
    output: str = "out"
    system: Optional[SystemConfig] = None
    convergence: Optional[ConvergenceConfig] = None
    notes: str = ""

    def __post_init__(self):
        validate(self)

    # -- builders
    @property
    def dx(self) -> float:
        return self.grid.length / self.grid.cells

    def grid1d(self) -> Grid1D:
        return self.grid.build()

    def initial_state(self) -> FieldState:
        g = self.grid1d()
        u0 = sample(self.initial.function(g.length), g)
        if self.system is None:
            return u0
        from .systems import derivative_seeded_state
        if self.system.seed == "derivative":
            return derivative_seeded_state(u0)
        return FieldState(g, np.vstack([u0.u, np.zeros_like(u0.u)]))

    def flux_spec(self) -> FluxSpec:
        return FluxSpec(self.flux.family)

    def irregularization_spec(self) -> IrregularizationSpec:
        return IrregularizationSpec(self.irregularization.family, self.irregularization.epsilon)

    def regularization_spec(self) -> RegularizationSpec:
        return RegularizationSpec(self.regularization.eta, self.regularization.order)

    def spectral_filter(self) -> SpectralFilter:
        return SpectralFilter.from_regularization(self.regularization_spec())

    def scheme_config(self) -> SchemeConfig:
        return SchemeConfig(self.scheme.cfl, self.scheme.dt, self.scheme.abort_on_nonfinite)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return _to_plain(self)


def validate(cfg: RunConfig):
    def need(cond, path, msg):
        if not cond:
            raise ConfigError(msg, path)

    need(cfg.schema == SCHEMA_VERSION, "schema", f"unsupported schema {cfg.schema}; expected {SCHEMA_VERSION}")
    need(cfg.grid.length > 0, "grid.length", "must be > 0")
    need(cfg.grid.cells >= 4, "grid.cells", "must be >= 4")
    need(cfg.initial.profile in PROFILES, "initial.profile", f"must be one of {list(PROFILES)}")
    if cfg.initial.profile == "expression":
        need(bool(cfg.initial.expression), "initial.expression", "required for profile 'expression'")
    if cfg.initial.profile == "cosh":
        need(cfg.initial.epsilon > 0, "initial.epsilon", "must be > 0 for a cosh profile")
        need(cfg.initial.alpha != 0, "initial.alpha", "must be nonzero for a cosh profile")
    need(cfg.flux.family in FLUX_FAMILIES and cfg.flux.family != "generic-convex", "flux.family",
         "must be 'hopf' or 'square'")
    need(cfg.irregularization.family in IRREGULARIZATION_FAMILIES, "irregularization.family",
         f"must be one of {list(IRREGULARIZATION_FAMILIES)}")
    need(cfg.irregularization.epsilon >= 0, "irregularization.epsilon", "must be >= 0")
    need(cfg.regularization.eta >= 0, "regularization.eta", "must be >= 0")
    need(cfg.regularization.order in REGULARIZATION_ORDERS, "regularization.order",
         f"must be one of {list(REGULARIZATION_ORDERS)}")
    need(0 < cfg.scheme.cfl <= 1, "scheme.cfl", "must lie in (0, 1]")
    need(cfg.scheme.dt is None or cfg.scheme.dt > 0, "scheme.dt", "must be positive or null")
    need(cfg.t_end >= 0, "t_end", "must be >= 0")
    need(cfg.stride >= 0, "stride", "must be >= 0")
    need(all(0 < t <= cfg.t_end for t in cfg.snapshot_times), "snapshot_times",
         "entries must lie in (0, t_end]")
    if cfg.system is not None:
        from .systems import SYSTEM_KINDS
        need(cfg.system.kind in SYSTEM_KINDS and cfg.system.kind != "generalized", "system.kind",
             "must be 'tans', 'tans-viscous' or 'keyfitz'")
        need(cfg.system.eta >= 0, "system.eta", "must be >= 0")
        need(cfg.system.seed in ("derivative", "zero"), "system.seed", "must be 'derivative' or 'zero'")
    if cfg.convergence is not None:
        need(cfg.convergence.levels >= 3, "convergence.levels", "must be >= 3")


# -- (de)serialization ---------------------------------------------------------

def _to_plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, tuple):
        return [_to_plain(v) for v in obj]
    return obj


_SECTIONS = {
    "grid": GridConfig, "initial": InitialConfig, "flux": FluxConfig,
    "irregularization": IrregularizationConfig, "regularization": RegularizationConfig,
    "scheme": SchemeSection, "system": SystemConfig, "convergence": ConvergenceConfig,
}


def _line_index(node, prefix="", out=None) -> dict:
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = f"{prefix}.{k.value}" if prefix else str(k.value)
            out[path] = k.start_mark.line + 1
            _line_index(v, path, out)
    return out


def _coerce(value, default, path: str):
    """Check ``value`` against the type of the field default."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {value!r}", path)
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", path)
        return value
    if isinstance(default, float) or (default is None and path.endswith(".dt")):
        if value is None and default is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", path)
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", path)
        return value
    if isinstance(default, tuple):
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                                 for v in value):
            raise ConfigError(f"expected a list of numbers, got {value!r}", path)
        return tuple(float(v) for v in value)
    return value


def _build(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"expected a mapping, got {type(data).__name__}", path)
    names = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        sub = f"{path}.{key}" if path else str(key)
        if key not in names:
            raise ConfigError(f"unknown key (allowed: {', '.join(names)})", sub)
        if key in _SECTIONS and cls is RunConfig:
            kwargs[key] = None if value is None else _build(_SECTIONS[key], value, sub)
            continue
        f = names[key]
        if f.default is not dataclasses.MISSING:
            default = f.default
        elif f.default_factory is not dataclasses.MISSING:
            default = f.default_factory()
        else:
            default = None
        kwargs[key] = _coerce(value, default, sub)
    return cls(**kwargs)


def from_dict(data: dict, lines: Optional[dict] = None) -> RunConfig:
    try:
        return _build(RunConfig, data, "")
    except ConfigError as err:
        if lines and err.line is None and err.path:
            line = lines.get(err.path)
            if line is None:
                # fall back to the nearest enclosing key
                parts = err.path.split(".")
                while parts and line is None:
                    parts.pop()
                    line = lines.get(".".join(parts))
            raise ConfigError(str(err).split(": ", 1)[-1], err.path, line) from None
        raise
    except ValidationError as err:
        raise ConfigError(str(err)) from None


def loads(text: str) -> list[RunConfig]:
    """Parse one or more YAML documents into configs."""
    try:
        docs = list(yaml.safe_load_all(text))
        nodes = list(yaml.compose_all(text))
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(err, 'problem', err)}",
                          line=mark.line + 1 if mark else None) from None
    out = []
    for doc, node in zip(docs, nodes):
        if doc is None:
            continue
        out.append(from_dict(doc, _line_index(node)))
    if not out:
        raise ConfigError("config contains no documents")
    return out


def load(path) -> list[RunConfig]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return loads(text)
    except ConfigError as err:
        raise ConfigError(f"{path}: {err}") from None


def dumps(configs) -> str:
    if isinstance(configs, RunConfig):
        configs = [configs]
    return yaml.safe_dump_all([c.to_dict() for c in configs], sort_keys=False,
                              default_flow_style=None, explicit_start=True)


# -- convergence ladder --------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceSpec:
    """Joint refinement at fixed ``dx / sqrt(eps)``: level j halves dx and quarters eps."""

    template: RunConfig
    levels: int = 3

    def __post_init__(self):
        if self.levels < 3:
            raise ValidationError("a convergence study needs at least 3 levels")
        if not self.template.irregularization.epsilon > 0:
            raise ValidationError("convergence template needs epsilon > 0")

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "ConvergenceSpec":
        levels = cfg.convergence.levels if cfg.convergence is not None else 3
        return cls(cfg, levels)

    @property
    def base_dx(self) -> float:
        return self.template.dx

    @property
    def base_epsilon(self) -> float:
        return self.template.irregularization.epsilon

    @property
    def ratio(self) -> float:
        return self.base_dx / math.sqrt(self.base_epsilon)

    def level(self, j: int) -> RunConfig:
        t = self.template
        return t.replace(
            name=f"{t.name}_level{j}",
            grid=dataclasses.replace(t.grid, cells=t.grid.cells * 2 ** j),
            irregularization=dataclasses.replace(t.irregularization, epsilon=self.base_epsilon / 4 ** j),
            convergence=None,
        )

    def configs(self) -> list[RunConfig]:
        return [self.level(j) for j in range(self.levels)]


# -- presets -------------------------------------------------------------------

def _sin(offset=0.0) -> InitialConfig:
    return InitialConfig(profile="shifted-sin" if offset else "sin", offset=offset)


def preset_fig1() -> list[RunConfig]:
    base = RunConfig(grid=GridConfig(cells=1000), initial=_sin(), t_end=0.5,
                     snapshot_times=(0.1, 0.2, 0.3, 0.4))
    return [
        base.replace(name="fig1_viscous", irregularization=IrregularizationConfig("none", 0.0),
                     regularization=RegularizationConfig(2e-3, 2)),
        base.replace(name="fig1_dispersive", irregularization=IrregularizationConfig("none", 0.0),
                     regularization=RegularizationConfig(1e-5, 3),
                     notes="eta for the dispersive run is illustrative"),
        base.replace(name="fig1_delta", irregularization=IrregularizationConfig("rational", 1e-5),
                     regularization=RegularizationConfig(1e-6, 2)),
    ]


def preset_fig2() -> list[RunConfig]:
    base = RunConfig(grid=GridConfig(cells=500), initial=_sin(), t_end=1.0,
                     regularization=RegularizationConfig(1e-6, 2),
                     snapshot_times=(0.25, 0.5, 0.75))
    return [
        base.replace(name="fig2_eps0", irregularization=IrregularizationConfig("rational", 0.0)),
        base.replace(name="fig2_eps1e-5", irregularization=IrregularizationConfig("rational", 1e-5)),
    ]


def preset_fig3() -> list[RunConfig]:
    return [RunConfig(name="fig3", grid=GridConfig(cells=4000), initial=_sin(0.1), t_end=0.5,
                      irregularization=IrregularizationConfig("rational", 2.5e-6),
                      snapshot_times=tuple(round(0.05 * k, 2) for k in range(1, 10)))]


def preset_fig4() -> list[RunConfig]:
    return [RunConfig(name="fig4", grid=GridConfig(cells=500), initial=_sin(0.1), t_end=0.5,
                      irregularization=IrregularizationConfig("rational", 1e-5),
                      convergence=ConvergenceConfig(3))]


PRESETS = {"fig1": preset_fig1, "fig2": preset_fig2, "fig3": preset_fig3, "fig4": preset_fig4}


def preset(name: str) -> list[RunConfig]:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
