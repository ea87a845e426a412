"""
Run configuration shared by every subcommand.

Values come from three layers, highest first: explicit flags, an optional TOML file given
with ``--config`` (keys are the long flag names), and the subcommand's defaults.
"""

from __future__ import annotations

import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError, DomainError
from .grid import parse_grid
from .solvers import distance_to_loss, loss_to_transmittance
from .types import ChannelParams, FiberModel, NlaParams, ProtocolParams

_EXCLUSIVE = (("va", "alpha2"), ("loss_db", "distance_km"))

_FIG3 = {"va": 0.25, "beta": 0.8, "eps": 0.002, "gain": 4.0, "psuccess": "inverse-g2"}

SUBCOMMAND_DEFAULTS: dict[str, dict[str, Any]] = {
    "keyrate": {"va": 0.25, "beta": 0.8, "eps": 0.002, "loss_db": 0.0},
    "sweep": dict(_FIG3),
    "gmax": {"eps": 0.02, "grid": "0:30:0.5"},
    "frontier": {**_FIG3, "grid": "0:40:1"},
    "verify": {
        "alpha2": 0.125,
        "cutoff": 40,
        "gain": 2.0,
        "lambda2": 0.01,
        "displacement": 0.3,
        "loss_db": 3.0,
        "eps": 0.004,
    },
}

DEFAULT_GRIDS = {"loss": "0:40:0.5", "distance": "0:200:1"}


def flag_name(field: str) -> str:
    return "--" + field.replace("_", "-")


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    va: float | None = Field(default=None, ge=0.0)
    alpha2: float | None = Field(default=None, ge=0.0)
    beta: float = Field(default=0.8, gt=0.0, le=1.0)
    eps: float = Field(default=0.002, ge=0.0)
    loss_db: float | None = Field(default=None, ge=0.0)
    distance_km: float | None = Field(default=None, ge=0.0)
    atten: float = Field(default=0.2, gt=0.0)
    gain: float | None = Field(default=None, ge=1.0)
    psuccess: str = "inverse-g2"
    grid: str | None = None
    axis: Literal["loss", "distance"] = "loss"
    tol: float | None = Field(default=None, gt=0.0)
    cutoff: int = Field(default=40, ge=0)
    displacement: float = 0.3
    lambda2: float = Field(default=0.01, ge=0.0, lt=1.0)
    workers: int = Field(default=1, ge=1)
    output: Path | None = None
    report: Path | None = None

    @field_validator("psuccess")
    @classmethod
    def _success_model(cls, v: str) -> str:
        if v == "inverse-g2":
            return v
        try:
            p = float(v)
        except ValueError as exc:
            raise ValueError("expected 'inverse-g2' or a probability") from exc
        if not (math.isfinite(p) and 0.0 < p <= 1.0):
            raise ValueError(f"success probability must lie in (0, 1], got {v}")
        return v

    @field_validator("grid")
    @classmethod
    def _grid_parses(cls, v: str | None) -> str | None:
        if v is not None:
            parse_grid(v)
        return v

    # ── derived parameters ────────────────────────────────────────────────────
    def fiber(self) -> FiberModel:
        return FiberModel(attenuation=self.atten)

    def protocol(self) -> ProtocolParams:
        if self.alpha2 is not None:
            return ProtocolParams.from_alpha2(self.alpha2, self.beta)
        return ProtocolParams.from_va(self.va if self.va is not None else 0.25, self.beta)

    def loss(self) -> float:
        if self.loss_db is not None:
            return self.loss_db
        if self.distance_km is not None:
            return distance_to_loss(self.distance_km, self.fiber())
        return 0.0

    def channel(self, loss_db: float | None = None) -> ChannelParams:
        return ChannelParams.from_loss_db(self.loss() if loss_db is None else loss_db, self.eps)

    def nla(self) -> NlaParams | None:
        if self.gain is None:
            return None
        if self.psuccess == "inverse-g2":
            return NlaParams(gain=self.gain)
        return NlaParams.fixed(self.gain, float(self.psuccess))

    def grid_points(self) -> list[float]:
        return parse_grid(self.grid or DEFAULT_GRIDS[self.axis])

    def check_losses(self) -> None:
        """Every loss the run evaluates must give a transmittance in (0, 1]."""
        fiber = self.fiber()
        points: list[tuple[str, float, bool]] = []
        if self.loss_db is not None:
            points.append(("loss_db", self.loss_db, False))
        if self.distance_km is not None:
            points.append(("distance_km", self.distance_km, True))
        if self.grid is not None:
            points.extend(("grid", x, self.axis == "distance") for x in self.grid_points())
        for field, x, is_distance in points:
            try:
                loss = distance_to_loss(x, fiber) if is_distance else x
                ok = loss_to_transmittance(loss) > 0.0
            except DomainError:
                ok = False
            if not ok:
                raise ConfigError(
                    f"{flag_name(field)}: loss must be >= 0 dB with a non-zero transmittance",
                    flag=flag_name(field),
                )


def _normalise(values: dict[str, Any], source: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in values.items():
        name = key.replace("-", "_")
        if name not in RunConfig.model_fields:
            raise ConfigError(f"unknown key {key!r} in {source}", flag=flag_name(name))
        out[name] = value
    for a, b in _EXCLUSIVE:
        if a in out and b in out:
            raise ConfigError(
                f"{flag_name(a)} and {flag_name(b)} are mutually exclusive ({source})",
                flag=flag_name(a),
            )
    return out


def _overlay(base: dict[str, Any], top: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for a, b in _EXCLUSIVE:
        if a in top:
            merged.pop(b, None)
        if b in top:
            merged.pop(a, None)
    merged.update(top)
    return merged


def load_config_file(path: Path) -> dict[str, Any]:
    try:
        with path.open("rb") as f:
            raw = tomllib.load(f)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}", flag="--config") from exc
    return _normalise(raw, str(path))


def build_config(
    command: str, flags: dict[str, Any], config_path: Path | None = None
) -> RunConfig:
    """Merge defaults, config file and explicit flags (``None`` flags are unset)."""
    layers = [_normalise(SUBCOMMAND_DEFAULTS.get(command, {}), "defaults")]
    if config_path is not None:
        layers.append(load_config_file(config_path))
    layers.append(_normalise({k: v for k, v in flags.items() if v is not None}, "flags"))
    merged: dict[str, Any] = {}
    for layer in layers:
        merged = _overlay(merged, layer)
    try:
        cfg = RunConfig(**merged)
    except ValidationError as exc:
        err = exc.errors()[0]
        field = str(err["loc"][0]) if err["loc"] else "config"
        raise ConfigError(f"{flag_name(field)}: {err['msg']}", flag=flag_name(field)) from exc
    cfg.check_losses()
    return cfg
