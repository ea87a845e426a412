"""
Fiber-loss conversions and zero-crossing frontiers of the key rate.

Frontiers are found by bisection inside the first sign-changing cell of a coarse audit
grid. Points where the rate is undefined (unphysical NLA mapping or covariance) are
skipped until the first defined point and count as "no key" after it.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable

import numpy as np

from .errors import DomainError, UnphysicalCovarianceError
from .fourstate import key_rate
from .nla import nla_key_rate
from .types import (
    ChannelParams,
    FiberModel,
    FrontierOutcome,
    FrontierResult,
    NlaParams,
    ProtocolParams,
)

logger = logging.getLogger(__name__)

LOSS_UPPER_DB = 100.0
EPS_UPPER = 0.5
AUDIT_POINTS = 64

RateFn = Callable[[float], float | None]


# ── fiber conversions ──────────────────────────────────────────────────────────────
def loss_to_transmittance(loss_db: float) -> float:
    if not math.isfinite(loss_db) or loss_db < 0:
        raise DomainError(f"loss must be finite and >= 0 dB, got {loss_db}")
    return 10.0 ** (-loss_db / 10.0)


def transmittance_to_loss(transmittance: float) -> float:
    if not 0.0 < transmittance <= 1.0:
        raise DomainError(f"transmittance must lie in (0, 1], got {transmittance}")
    return -10.0 * math.log10(transmittance)


def distance_to_loss(distance_km: float, fiber: FiberModel | None = None) -> float:
    if not math.isfinite(distance_km) or distance_km < 0:
        raise DomainError(f"distance must be finite and >= 0 km, got {distance_km}")
    return (fiber or FiberModel()).attenuation * distance_km


def loss_to_distance(loss_db: float, fiber: FiberModel | None = None) -> float:
    if not math.isfinite(loss_db) or loss_db < 0:
        raise DomainError(f"loss must be finite and >= 0 dB, got {loss_db}")
    return loss_db / (fiber or FiberModel()).attenuation


def distance_to_transmittance(distance_km: float, fiber: FiberModel | None = None) -> float:
    return loss_to_transmittance(distance_to_loss(distance_km, fiber))


# ── rate evaluation ────────────────────────────────────────────────────────────────
def applicable_rate(
    p: ProtocolParams, ch: ChannelParams, nla: NlaParams | None = None
) -> float | None:
    """Key rate of the original (``nla=None``) or amplified protocol; None when undefined."""
    try:
        breakdown = key_rate(p, ch) if nla is None else nla_key_rate(p, ch, nla)
    except UnphysicalCovarianceError as exc:
        logger.debug("rate undefined at T=%g eps=%g: %s", ch.transmittance, ch.excess_noise, exc)
        return None
    return breakdown.rate


def _positive(v: float | None) -> bool:
    return v is not None and v > 0.0


def bisect_frontier(
    rate_fn: RateFn,
    lo: float,
    hi: float,
    tol: float,
    *,
    audit_points: int = AUDIT_POINTS,
) -> FrontierResult:
    """Locate where ``rate_fn`` stops being positive on [lo, hi]."""
    if not tol > 0:
        raise DomainError(f"tolerance must be > 0, got {tol}")
    xs = np.linspace(lo, hi, audit_points)
    vals = [rate_fn(float(x)) for x in xs]
    diagnostics: list[str] = []
    iterations = 0

    first = next((i for i, v in enumerate(vals) if v is not None), None)
    if first is None:
        return FrontierResult(
            value=lo,
            bracket=(lo, hi),
            outcome=FrontierOutcome.UNDEFINED_AT_START,
            diagnostics=["rate undefined on every audit point"],
        )

    start = float(xs[first])
    start_val = vals[first]
    if first > 0:
        # smallest defined point, between the last undefined and first defined audit point
        a, b = float(xs[first - 1]), start
        while b - a > tol:
            mid = 0.5 * (a + b)
            if rate_fn(mid) is None:
                a = mid
            else:
                b = mid
            iterations += 1
        start, start_val = b, rate_fn(b)
        diagnostics.append(f"rate undefined below {start:.9g}")
        logger.debug("rate defined from %g (refined in %d steps)", start, iterations)

    if not _positive(start_val):
        return FrontierResult(
            value=0.0,
            bracket=(lo, start),
            iterations=iterations,
            outcome=FrontierOutcome.NO_KEY_AT_START,
            diagnostics=[*diagnostics, f"no positive key rate at {start:.9g}"],
        )

    tail = [start_val, *vals[first + 1 :]]
    points = [start, *(float(x) for x in xs[first + 1 :])]
    pos = [_positive(v) for v in tail]
    changes = [i for i in range(len(pos) - 1) if pos[i] != pos[i + 1]]
    if any(v is None for v in tail):
        diagnostics.append("undefined audit points after the first defined point count as no key")
    if not changes:
        return FrontierResult(
            value=hi,
            bracket=(start, hi),
            iterations=iterations,
            outcome=FrontierOutcome.NO_SIGN_CHANGE,
            diagnostics=[*diagnostics, "rate positive over the whole bracket"],
        )
    if len(changes) > 1:
        where = ", ".join(f"{points[i]:.6g}" for i in changes)
        logger.warning("rate changes sign %d times on the audit grid near %s", len(changes), where)
        diagnostics.append(f"{len(changes)} sign changes on the audit grid near {where}")

    i = changes[0]
    a, b = points[i], points[i + 1]
    while b - a > tol:
        mid = 0.5 * (a + b)
        if _positive(rate_fn(mid)):
            a = mid
        else:
            b = mid
        iterations += 1
    return FrontierResult(
        value=0.5 * (a + b),
        bracket=(a, b),
        iterations=iterations,
        converged=True,
        outcome=FrontierOutcome.CONVERGED,
        diagnostics=diagnostics,
    )


# ── frontiers ──────────────────────────────────────────────────────────────────────
def max_loss(
    p: ProtocolParams,
    excess_noise: float,
    nla: NlaParams | None = None,
    tol: float = 1e-3,
    *,
    upper_db: float = LOSS_UPPER_DB,
) -> FrontierResult:
    """Largest loss (dB) with a positive key rate at fixed excess noise.

    With an NLA the bracket is widened by 20·log10(g), the shift the amplifier applies.
    """
    hi = upper_db if nla is None else upper_db + 20.0 * math.log10(nla.gain)

    def rate(loss_db: float) -> float | None:
        return applicable_rate(p, ChannelParams.from_loss_db(loss_db, excess_noise), nla)

    return bisect_frontier(rate, 0.0, hi, tol)


def max_excess_noise(
    p: ProtocolParams,
    loss_db: float,
    nla: NlaParams | None = None,
    tol: float = 1e-6,
    *,
    upper: float = EPS_UPPER,
) -> FrontierResult:
    """Largest excess noise with a positive key rate at fixed loss."""
    t = loss_to_transmittance(loss_db)

    def rate(eps: float) -> float | None:
        return applicable_rate(p, ChannelParams(transmittance=t, excess_noise=eps), nla)

    return bisect_frontier(rate, 0.0, upper, tol)
