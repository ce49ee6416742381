"""Scenario configuration: YAML documents validated into typed models.

A config has four top-level keys plus a ``params`` block whose schema
depends on ``scenario``::

    scenario: sine_gordon_kink
    output_dir: out/sg
    seed: 0
    emit_svg: true
    params:
      beta: 0.5

Every error in the document is reported, not just the first one.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .core import CDWError

SCENARIOS = (
    "single_chain_resonance",
    "stability_scan",
    "multichain_kink",
    "sine_gordon_kink",
    "tunneling_report",
    "bogomolnyi_sweep",
)

PI = math.pi


class ConfigError(CDWError):
    """Validation failure carrying every problem found."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridBlock(_Block):
    n_points: int = Field(401, ge=3)
    lo: float = -4 * PI
    hi: float = 4 * PI
    boundary: Literal["periodic", "fixed"] = "fixed"

    @model_validator(mode="after")
    def _ordered(self):
        if not self.hi > self.lo:
            raise ValueError("grid needs hi > lo")
        return self


class PacketBlock(_Block):
    center: float = 0.0
    width: Optional[float] = Field(None, gt=0)
    k0: float = 0.0


class UnitsBlock(_Block):
    time_scale_s: Optional[float] = Field(None, gt=0)


class SchwingerBlock(_Block):
    D: float = Field(1.0, gt=0)
    mu_E: float = Field(1.0, ge=0)
    omega_p: float = Field(10.0, ge=0)
    phi_bar0: float = 0.0
    a_D: float = 0.001


class SingleChainResonanceParams(SchwingerBlock):
    grid: GridBlock = GridBlock()
    scheme: Literal["crank_nicolson", "dufort_frankel", "rk4"] = "crank_nicolson"
    sign_variant: Literal["paper", "standard"] = "standard"
    dt: float = Field(0.01, gt=0)
    n_steps: int = Field(10000, ge=1)
    record_every: int = Field(10, ge=1)
    packet: PacketBlock = PacketBlock()
    units: UnitsBlock = UnitsBlock()


class StabilityScanParams(SchwingerBlock):
    grid: GridBlock = GridBlock(n_points=128, boundary="periodic")
    schemes: list[Literal["crank_nicolson", "dufort_frankel", "rk4"]] = ["rk4", "crank_nicolson", "dufort_frankel"]
    sign_variant: Literal["paper", "standard"] = "standard"
    dufort_frankel_potential: Literal["free", "full"] = "free"
    dt_min: float = Field(1e-5, gt=0)
    dt_max: float = Field(10.0, gt=0)
    factor: float = Field(2.0, gt=1)
    n_steps: int = Field(1000, ge=1)
    units: UnitsBlock = UnitsBlock()

    @model_validator(mode="after")
    def _range(self):
        if not self.dt_min < self.dt_max:
            raise ValueError("dt_min must be < dt_max")
        return self


class MultichainKinkParams(_Block):
    D1: float = Field(1.0, gt=0)
    E1: float = Field(1.0, ge=0)
    E2: float = Field(0.0, ge=0)
    delta_prime: float = Field(400.0, ge=0)
    theta: float = 0.0
    m_e: float = Field(1.0, gt=0)
    l: float = Field(1.0, gt=0)
    d: float = Field(0.05, gt=0)
    eta: float = Field(20.0, ge=0)
    tau_bar: float = Field(0.0, ge=0)
    regime_ratio: float = Field(10.0, gt=1)
    n_points: int = Field(801, ge=3)
    x0: float = -20.0
    boundary: Literal["periodic", "fixed"] = "fixed"
    beta: float = Field(-0.5, gt=-1, lt=1)
    z0: float = -10.0
    dt: float = Field(0.005, gt=0)
    n_steps: int = Field(8000, ge=1)
    include_e2: bool = False
    record_every: int = Field(20, ge=1)


class SineGordonKinkParams(_Block):
    v: float = Field(1.0, gt=0)
    omega1: float = Field(1.0, gt=0)
    beta: float = Field(0.5, gt=-1, lt=1)
    sign: Literal[1, -1] = 1
    z0: float = 0.0
    z_min: float = -20.0
    z_max: float = 20.0
    dz: float = Field(0.05, gt=0)
    dt: float = Field(0.01, gt=0)
    n_steps: int = Field(1000, ge=1)
    record_every: int = Field(10, ge=1)
    boundary: Literal["periodic", "fixed"] = "fixed"

    @model_validator(mode="after")
    def _causal(self):
        if not self.dt < self.dz:
            raise ValueError("dt must be < dz (discrete causality)")
        if not self.z_max - self.z_min >= 2 * self.dz:
            raise ValueError("box must hold at least 3 sites")
        return self


class PotentialBlock(_Block):
    C1: float = 0.01
    C2: float = 1.0
    phi0: float = 1.0
    asymmetry: float = 0.0


class TunnelingReportParams(PotentialBlock):
    dx: float = Field(1.0, gt=0)
    n_modes: int = Field(3, ge=1, le=6)
    separation: float = Field(2.0, gt=0)
    separations: list[float] = [0.5, 1.0, 2.0, 4.0, 8.0]
    epsilon: float = 0.0
    threshold: Union[Literal["barrier"], float] = "barrier"
    step_mode: Literal["all_sites", "per_site"] = "all_sites"
    method: Literal["closed_form", "quadrature", "monte_carlo"] = "closed_form"
    cross_check: bool = True
    rho_r: float = Field(1.0, ge=0)

    @model_validator(mode="after")
    def _positive(self):
        if any(not s > 0 for s in self.separations):
            raise ValueError("separations must all be > 0")
        return self


class BogomolnyiSweepParams(PotentialBlock):
    grid: GridBlock = GridBlock(n_points=129, lo=-8.0, hi=8.0)
    n_random: int = Field(100, ge=1)
    n_harmonics: int = Field(6, ge=1)
    wall_width: float = Field(1.0 / math.sqrt(2.0), gt=0)
    phi_C: Optional[float] = None


PARAM_MODELS: dict[str, type[_Block]] = {
    "single_chain_resonance": SingleChainResonanceParams,
    "stability_scan": StabilityScanParams,
    "multichain_kink": MultichainKinkParams,
    "sine_gordon_kink": SineGordonKinkParams,
    "tunneling_report": TunnelingReportParams,
    "bogomolnyi_sweep": BogomolnyiSweepParams,
}


class _Envelope(_Block):
    scenario: Literal[SCENARIOS]  # type: ignore[valid-type]
    output_dir: str = "out"
    seed: int = Field(0, ge=0)
    emit_svg: bool = False
    params: dict = {}


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    scenario: str
    params: BaseModel
    output_dir: Path
    seed: int
    emit_svg: bool


_OPERATORS = {"greater_than": ">", "greater_than_equal": ">=", "less_than": "<", "less_than_equal": "<="}
_BOUNDS = {"greater_than": "gt", "greater_than_equal": "ge", "less_than": "lt", "less_than_equal": "le"}


def _describe(err: dict, prefix: tuple = ()) -> str:
    loc = tuple(str(x) for x in prefix + tuple(err["loc"]))
    path = ".".join(loc) or "<root>"
    kind = err["type"]
    if kind in _OPERATORS:
        bound = err["ctx"][_BOUNDS[kind]]
        return f"{path}: violates invariant {loc[-1]} {_OPERATORS[kind]} {bound} (got {err['input']!r})"
    if kind == "literal_error" and loc == ("scenario",):
        return f"scenario: unknown scenario {err['input']!r}; valid scenarios: {', '.join(SCENARIOS)}"
    if kind == "extra_forbidden":
        return f"{path}: unknown key"
    msg = err["msg"].removeprefix("Value error, ")
    return f"{path}: {msg}"


def _parse(text: str) -> dict:
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError([f"parse error at {where}: {exc.problem or exc}"]) from exc
    except yaml.YAMLError as exc:
        raise ConfigError([f"parse error: {exc}"]) from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(["<root>: config must be a mapping"])
    return doc


def validate_config(text: str) -> ScenarioConfig:
    """Parse and validate a YAML config; raise :class:`ConfigError` listing every problem."""
    doc = _parse(text)
    errors: list[str] = []
    env = None
    try:
        env = _Envelope.model_validate(doc)
    except ValidationError as exc:
        errors.extend(_describe(e) for e in exc.errors())
    scenario = doc.get("scenario")
    params = None
    raw_params = doc.get("params") or {}
    if scenario in PARAM_MODELS and isinstance(raw_params, dict):
        try:
            params = PARAM_MODELS[scenario].model_validate(raw_params)
        except ValidationError as exc:
            errors.extend(_describe(e, ("params",)) for e in exc.errors())
    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(
        scenario=env.scenario,
        params=params,
        output_dir=Path(env.output_dir),
        seed=env.seed,
        emit_svg=env.emit_svg,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    return validate_config(Path(path).read_text())


def default_config(scenario: str) -> ScenarioConfig:
    return validate_config(yaml.safe_dump({"scenario": scenario}))
