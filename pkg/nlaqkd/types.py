from __future__ import annotations

import math
from datetime import datetime, timezone

UTC = timezone.utc
from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import DomainError

_PARAMS = ConfigDict(frozen=True, allow_inf_nan=False)


class RateStatus(str, Enum):
    PHYSICAL = "Physical"
    UNPHYSICAL_COVARIANCE = "UnphysicalCovariance"
    UNPHYSICAL_NLA_MAPPING = "UnphysicalNlaMapping"


class SuccessModel(str, Enum):
    INVERSE_GAIN_SQUARED = "inverse-g2"
    FIXED = "fixed"


class FrontierOutcome(str, Enum):
    CONVERGED = "converged"
    NO_KEY_AT_START = "no_key_at_start"
    UNDEFINED_AT_START = "undefined_at_start"
    NO_SIGN_CHANGE = "no_sign_change"


class CheckStatus(str, Enum):
    PENDING = "pending"
    READY = "ready"
    RUNNING = "running"
    PASSED = "passed"
    FAILED = "failed"
    SKIPPED = "skipped"


class EventType(str, Enum):
    CHECK_ADDED = "check_added"
    CHECK_DISPATCHED = "check_dispatched"
    RESULT_EMITTED = "result_emitted"
    CHECK_SKIPPED = "check_skipped"


# ── protocol and channel parameters ──────────────────────────────────────────────
class ProtocolParams(BaseModel):
    """Alice's side: coherent amplitude α (V_A = 2α²) and reconciliation efficiency β."""

    model_config = _PARAMS

    alpha: float = Field(ge=0.0)
    beta: float = Field(gt=0.0, le=1.0)

    @classmethod
    def from_va(cls, va: float, beta: float) -> ProtocolParams:
        if va < 0:
            raise DomainError(f"V_A must be non-negative, got {va}")
        return cls(alpha=math.sqrt(va / 2.0), beta=beta)

    @classmethod
    def from_alpha2(cls, alpha2: float, beta: float) -> ProtocolParams:
        if alpha2 < 0:
            raise DomainError(f"alpha^2 must be non-negative, got {alpha2}")
        return cls(alpha=math.sqrt(alpha2), beta=beta)

    @property
    def alpha2(self) -> float:
        return self.alpha * self.alpha

    @property
    def va(self) -> float:
        return 2.0 * self.alpha2

    @property
    def v(self) -> float:
        return self.va + 1.0


class ChannelParams(BaseModel):
    """Gaussian channel: transmittance T and input-referred excess noise ε (shot-noise units)."""

    model_config = _PARAMS

    transmittance: float = Field(gt=0.0, le=1.0)
    excess_noise: float = Field(ge=0.0)

    @classmethod
    def from_loss_db(cls, loss_db: float, excess_noise: float) -> ChannelParams:
        return cls(transmittance=10.0 ** (-loss_db / 10.0), excess_noise=excess_noise)

    @property
    def chi(self) -> float:
        """Input-referred total noise (1 − T)/T + ε."""
        t = self.transmittance
        return (1.0 - t) / t + self.excess_noise


class NlaParams(BaseModel):
    model_config = _PARAMS

    gain: float = Field(ge=1.0)
    success_model: SuccessModel = SuccessModel.INVERSE_GAIN_SQUARED
    fixed_probability: float | None = Field(default=None, gt=0.0, le=1.0)

    @model_validator(mode="after")
    def _fixed_needs_probability(self) -> NlaParams:
        if self.success_model is SuccessModel.FIXED and self.fixed_probability is None:
            raise ValueError("fixed success model requires fixed_probability")
        return self

    @classmethod
    def fixed(cls, gain: float, probability: float) -> NlaParams:
        return cls(gain=gain, success_model=SuccessModel.FIXED, fixed_probability=probability)

    def success_probability(self) -> float:
        if self.success_model is SuccessModel.FIXED:
            assert self.fixed_probability is not None
            return self.fixed_probability
        return 1.0 / (self.gain * self.gain)


class FiberModel(BaseModel):
    model_config = _PARAMS

    attenuation: float = Field(default=0.2, gt=0.0)  # dB/km


# ── analytic results ─────────────────────────────────────────────────────────────
class LambdaWeights(BaseModel):
    model_config = _PARAMS

    lambda0: float
    lambda1: float
    lambda2: float
    lambda3: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.lambda0, self.lambda1, self.lambda2, self.lambda3)


class TwoModeCovariance(BaseModel):
    """
    Symmetric two-mode covariance (a𝕀, cσ_z; cσ_z, b𝕀) in shot-noise units.

    The diagonal is stored as its excess above vacuum (a − 1, b − 1) so that weak-signal
    states keep full precision; ``a=``/``b=`` keywords are accepted as well. Violations of
    the vacuum bound are not rejected here, computations flag them.
    """

    model_config = ConfigDict(frozen=True)

    a_excess: float
    b_excess: float
    c: float

    @model_validator(mode="before")
    @classmethod
    def _accept_plain_variances(cls, data: Any) -> Any:
        if isinstance(data, dict):
            data = dict(data)
            if "a" in data:
                data["a_excess"] = float(data.pop("a")) - 1.0
            if "b" in data:
                data["b_excess"] = float(data.pop("b")) - 1.0
        return data

    @property
    def a(self) -> float:
        return 1.0 + self.a_excess

    @property
    def b(self) -> float:
        return 1.0 + self.b_excess

    @property
    def determinant_root(self) -> float:
        """ab − c², the square root of the determinant."""
        return self.a * self.b - self.c * self.c

    def as_matrix(self) -> np.ndarray:
        a, b, c = self.a, self.b, self.c
        return np.array(
            [
                [a, 0.0, c, 0.0],
                [0.0, a, 0.0, -c],
                [c, 0.0, b, 0.0],
                [0.0, -c, 0.0, b],
            ]
        )


class KeyRateBreakdown(BaseModel):
    """
    Everything that goes into one key-rate evaluation.

    ``rate = success_probability·(β·mutual_information − holevo_bound)`` when the status is
    Physical; for the original protocol the success probability is 1. Negative rates are
    reported as they are.
    """

    model_config = ConfigDict(frozen=True)

    mutual_information: float | None = None
    holevo_bound: float | None = None
    rate: float | None = None
    nu1: float | None = None
    nu2: float | None = None
    nu3: float | None = None
    status: RateStatus = RateStatus.PHYSICAL
    success_probability: float = 1.0

    @classmethod
    def unphysical(cls, status: RateStatus) -> KeyRateBreakdown:
        return cls(status=status)

    @property
    def is_physical(self) -> bool:
        return self.status is RateStatus.PHYSICAL


class EquivalentChannel(BaseModel):
    """NLA-free channel (η, ε^g) reproducing the post-selected covariance matrix."""

    model_config = ConfigDict(frozen=True)

    eta: float
    eps_g: float
    alpha_g: float
    physical: bool
    g_max: float

    def to_channel(self) -> ChannelParams:
        if not self.physical:
            raise DomainError("equivalent channel is unphysical")
        return ChannelParams(transmittance=min(self.eta, 1.0), excess_noise=max(self.eps_g, 0.0))


class FrontierResult(BaseModel):
    value: float
    bracket: tuple[float, float]
    iterations: int = 0
    converged: bool = False
    outcome: FrontierOutcome = FrontierOutcome.CONVERGED
    diagnostics: list[str] = Field(default_factory=list)


# ── truncated Fock space ─────────────────────────────────────────────────────────
class FockVector(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    amplitudes: np.ndarray
    truncation: int = Field(ge=0)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def tail_mass(self) -> float:
        return 1.0 - self.norm**2

    def overlap(self, other: FockVector) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


class FockDensityMatrix(BaseModel):
    """Single-mode density matrix over photon numbers 0..N.

    ``thermal_parameter`` is λ when the state is known to be a displaced thermal state
    ρ_th(λ); amplification tracks it so divergence (g²λ² ≥ 1) can be refused.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray
    truncation: int = Field(ge=0)
    thermal_parameter: float | None = None

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    @property
    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    @property
    def smallest_eigenvalue(self) -> float:
        herm = 0.5 * (self.entries + self.entries.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])


# ── verification suite ───────────────────────────────────────────────────────────
class Check(BaseModel):
    id: str
    title: str
    tolerance: float
    dependencies: list[str] = Field(default_factory=list)
    status: CheckStatus = CheckStatus.PENDING
    deviation: float | None = None
    detail: str = ""


class CheckOutcome(BaseModel):
    check_id: str
    passed: bool
    deviation: float | None = None
    detail: str = ""
    latency_ms: int = 0


class Event(BaseModel):
    type: EventType
    payload: dict[str, Any]
    ts: datetime = Field(default_factory=lambda: datetime.now(UTC))
