"""
Run configuration: a YAML file with UPPER_CASE sections validated by pydantic.

Defaults that depend on other keys (margin, lattice size, anchor) are filled in
by ``RunConfig.resolved()`` so that reports echo every value actually used.
"""
import math
from pathlib import Path
from typing import Any, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from find_markov_gap.band_models import LayerSpec, ModelSpec
from find_markov_gap.geometry import Lattice, SmootherShape, default_anchor
from find_markov_gap.optimizer import OptimizerConfig
from find_markov_gap.utils.errors import ConfigError

SWEEP_KEYS = {"R": "radius", "L_A": "l_a", "shape": "shape"}
MIN_MARGIN = 8


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)


class LayerConfig(_Section):
    p_sign: int = Field(1, alias="P_SIGN")
    chemical_potential: float = Field(0.0, alias="CHEMICAL_POTENTIAL")

    @field_validator("p_sign")
    @classmethod
    def _sign(cls, value: int) -> int:
        if value not in (1, -1):
            raise ValueError("P_SIGN must be +1 or -1")
        return value


class ModelConfig(_Section):
    flux_numerator: int = Field(1, alias="FLUX_NUMERATOR")
    flux_denominator: int = Field(4, alias="FLUX_DENOMINATOR", ge=1)
    hopping: float = Field(1.0, alias="HOPPING")
    chemical_potential: float = Field(0.0, alias="CHEMICAL_POTENTIAL")
    filled_bands: Optional[int] = Field(1, alias="FILLED_BANDS", ge=0)
    layers: tuple[LayerConfig, ...] = Field((), alias="LAYERS")
    expected_chern: Optional[tuple[int, ...]] = Field(None, alias="EXPECTED_CHERN")

    @model_validator(mode="after")
    def _flux(self) -> "ModelConfig":
        if math.gcd(abs(self.flux_numerator), self.flux_denominator) != 1:
            raise ValueError(f"Flux {self.flux_numerator}/{self.flux_denominator} is not in lowest terms")
        if self.filled_bands is not None and self.filled_bands > self.flux_denominator:
            raise ValueError("FILLED_BANDS exceeds the number of bands")
        n_layers = max(1, len(self.layers))
        if self.expected_chern is not None and len(self.expected_chern) != n_layers:
            raise ValueError(f"EXPECTED_CHERN needs one entry per layer ({n_layers})")
        return self


class GeometryConfig(_Section):
    width: Optional[int] = Field(None, alias="WIDTH", ge=1)
    height: Optional[int] = Field(None, alias="HEIGHT", ge=1)
    l_a: int = Field(24, alias="L_A", ge=1)
    l_b: Optional[int] = Field(None, alias="L_B", ge=1)
    anchor: Optional[tuple[int, int]] = Field(None, alias="ANCHOR")
    shape: SmootherShape = Field(SmootherShape.TWO_CIRCLES, alias="SHAPE")
    radius: int = Field(0, alias="RADIUS", ge=0)
    margin: Optional[int] = Field(None, alias="MARGIN", ge=0)


class OptimizerSection(OptimizerConfig):
    """The OPTIMIZER section: descent settings plus warm-start and output switches."""

    warm_start: Optional[str] = Field(None, alias="WARM_START")
    save_generators: bool = Field(True, alias="SAVE_GENERATORS")


class OutputConfig(_Section):
    dir: str = Field("results", alias="DIR")
    database_dir: str = Field("db", alias="DATABASE_DIR")
    record_to_database: bool = Field(False, alias="RECORD_TO_DATABASE")
    max_dimension: int = Field(4000, alias="MAX_DIMENSION", ge=1)


class RunConfig(_Section):
    model: ModelConfig = Field(default_factory=ModelConfig, alias="MODEL")
    geometry: GeometryConfig = Field(default_factory=GeometryConfig, alias="GEOMETRY")
    optimizer: OptimizerSection = Field(default_factory=OptimizerSection, alias="OPTIMIZER")
    output: OutputConfig = Field(default_factory=OutputConfig, alias="OUTPUT")
    seed: int = Field(0, alias="SEED")

    @model_validator(mode="after")
    def _lattice_width(self) -> "RunConfig":
        q = self.model.flux_denominator
        if self.geometry.width is not None and self.geometry.width % q:
            raise ValueError(f"WIDTH={self.geometry.width} must be a multiple of FLUX_DENOMINATOR={q}")
        if self.optimizer.tr_constrained and len(self.model.layers) != 2:
            raise ValueError("TR_CONSTRAINED needs a two-layer model")
        if "rng_seed" in self.optimizer.model_fields_set:
            raise ValueError("Set the optimizer seed with the top-level SEED key")
        return self

    @property
    def l_b(self) -> int:
        return self.geometry.l_b if self.geometry.l_b is not None else self.geometry.l_a

    @property
    def n_layers(self) -> int:
        return max(1, len(self.model.layers))

    def resolved(self) -> "RunConfig":
        """Copy with MARGIN, L_B, WIDTH, HEIGHT and ANCHOR filled in."""
        geo, q = self.geometry, self.model.flux_denominator
        margin = geo.margin if geo.margin is not None else max(MIN_MARGIN, 2 * geo.radius)
        l_b = self.l_b
        width = geo.width
        if width is None:
            width = q * math.ceil((geo.l_a + l_b + 2 * margin) / q)
        height = geo.height if geo.height is not None else max(geo.l_a, l_b) + 2 * margin
        anchor = geo.anchor
        if anchor is None:
            anchor = default_anchor(Lattice(width, height), geo.l_a, l_b)
        update = {"margin": margin, "l_b": l_b, "width": width, "height": height, "anchor": tuple(anchor)}
        return self.model_copy(update={"geometry": geo.model_copy(update=update)})

    def lattice(self) -> Lattice:
        geo = self.resolved().geometry
        return Lattice(geo.width, geo.height, self.n_layers)

    def to_model_spec(self) -> ModelSpec:
        m = self.model
        layers = tuple(LayerSpec(layer.p_sign, layer.chemical_potential) for layer in m.layers)
        return ModelSpec(
            m.flux_numerator, m.flux_denominator, m.hopping, m.chemical_potential, m.filled_bands, layers
        )

    def to_optimizer_config(self) -> OptimizerConfig:
        fields = self.optimizer.model_dump(exclude={"warm_start", "save_generators"})
        return OptimizerConfig(**fields, rng_seed=self.seed)

    def echo(self) -> dict[str, Any]:
        """The resolved config as plain YAML/JSON data with UPPER_CASE keys."""
        return self.resolved().model_dump(mode="json", by_alias=True)

    def with_overrides(self, **overrides) -> "RunConfig":
        """
        Re-validated copy with top-level or section keys replaced.

        Keys are ``SEED``, ``OUTPUT_DIR`` or any sweep key (``R``, ``L_A``, ``shape``).
        """
        data = self.model_dump(mode="json", by_alias=True)
        for key, value in overrides.items():
            if value is None:
                continue
            if key == "SEED":
                data["SEED"] = value
            elif key == "OUTPUT_DIR":
                data["OUTPUT"]["DIR"] = str(value)
            elif key in SWEEP_KEYS:
                alias = GeometryConfig.model_fields[SWEEP_KEYS[key]].alias
                data["GEOMETRY"][alias] = value
            else:
                raise ConfigError(f"Unknown override {key!r}")
        return parse_config(data)


def parse_config(data: Optional[dict]) -> RunConfig:
    try:
        return RunConfig.model_validate(data or {})
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration:\n{e}") from e


def load_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file {path} not found") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Config file {path} is not valid YAML: {e}") from e
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must hold a mapping of sections")
    return parse_config(data)


def coerce_sweep_value(key: str, raw: str) -> Union[int, str]:
    """Parse one ``--values`` entry for the given sweep key."""
    if key not in SWEEP_KEYS:
        raise ConfigError(f"Sweep key must be one of {sorted(SWEEP_KEYS)}, got {key!r}")
    if key == "shape":
        try:
            return SmootherShape(raw).value
        except ValueError as e:
            raise ConfigError(f"Unknown smoother shape {raw!r}") from e
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"Sweep value {raw!r} for {key} is not an integer") from e
