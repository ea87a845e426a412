"""
Noiseless linear amplification in front of Bob's homodyne detector.

A successful g^n̂ on the channel output is equivalent to an NLA-free channel (η, ε^g)
carrying the same amplitude α:

    η = 4g²T / [2 + (1 − g²)Tε]²,    ε^g = ε − ½(g² − 1)Tε²

and the mapping is physical while η ≤ 1 and ε^g ≥ 0, i.e. for g ≤ g_max(T, ε).
"""

from __future__ import annotations

import logging
import math

from .errors import DivergentAmplificationError, DomainError
from .fourstate import key_rate
from .types import (
    ChannelParams,
    EquivalentChannel,
    KeyRateBreakdown,
    NlaParams,
    ProtocolParams,
    RateStatus,
)

logger = logging.getLogger(__name__)

PHYSICAL_TOL = 1e-12


def g_max(ch: ChannelParams) -> float:
    """Largest gain whose equivalent channel is physical.

    1/√T for ε = 0, otherwise (−2√T + sqrt(4T + 4Tε(2 + Tε)))/(2Tε), evaluated in the
    rationalised form 2(2 + Tε)/(2√T + sqrt(...)) which is continuous at ε → 0.
    """
    t, eps = ch.transmittance, ch.excess_noise
    root_t = math.sqrt(t)
    if eps == 0.0:
        return 1.0 / root_t
    te = t * eps
    return 2.0 * (2.0 + te) / (2.0 * root_t + math.sqrt(4.0 * t + 4.0 * te * (2.0 + te)))


def lambda_from_noise(ch: ChannelParams) -> float:
    """Thermal parameter λ of Bob's conditional state: (1 + λ²)/(1 − λ²) = 1 + Tε."""
    te = ch.transmittance * ch.excess_noise
    return math.sqrt(te / (2.0 + te))


def equivalent_channel(ch: ChannelParams, g: float, *, alpha: float) -> EquivalentChannel:
    """Map (T, ε, g) to the equivalent channel (η, ε^g) with α^g = α.

    Unphysical mappings are flagged through ``physical`` and never raised.
    """
    if g < 1.0:
        raise DomainError(f"NLA gain must be >= 1, got {g}")
    t, eps = ch.transmittance, ch.excess_noise
    gg = g * g
    if g == 1.0:
        eta, eps_g, denom = t, eps, 2.0
    elif eps == 0.0:
        eta, eps_g, denom = gg * t, 0.0, 2.0
    else:
        denom = 2.0 + (1.0 - gg) * t * eps
        eta = 4.0 * gg * t / (denom * denom)
        eps_g = eps - 0.5 * (gg - 1.0) * t * eps * eps
    gm = g_max(ch)
    physical = (
        denom > 0.0
        and g <= gm * (1.0 + PHYSICAL_TOL)
        and eta <= 1.0 + PHYSICAL_TOL
        and eps_g >= -PHYSICAL_TOL
    )
    if not physical:
        logger.debug("unphysical NLA mapping: g=%g > g_max=%g (T=%g, eps=%g)", g, gm, t, eps)
    return EquivalentChannel(
        eta=eta,
        eps_g=eps_g,
        alpha_g=alpha,
        physical=physical,
        g_max=gm,
    )


def nla_key_rate(p: ProtocolParams, ch: ChannelParams, nla: NlaParams) -> KeyRateBreakdown:
    """P_success·R̲(α, η, ε^g); status UnphysicalNlaMapping and no rate beyond g_max."""
    prob = nla.success_probability()
    eq = equivalent_channel(ch, nla.gain, alpha=p.alpha)
    if not eq.physical:
        return KeyRateBreakdown(
            status=RateStatus.UNPHYSICAL_NLA_MAPPING, success_probability=prob
        )
    base = key_rate(p, eq.to_channel())
    assert base.rate is not None
    return base.model_copy(update={"rate": prob * base.rate, "success_probability": prob})


def amplified_variance(p: ProtocolParams, ch: ChannelParams, g: float) -> float:
    """Bob's quadrature variance after successful amplification of the four-state mixture.

    (1 + g²λ²)/(1 − g²λ²) + 2g²((1 − λ²)/(1 − g²λ²))²Tα²
    """
    lam2 = lambda_from_noise(ch) ** 2
    glam2 = g * g * lam2
    if glam2 >= 1.0:
        raise DivergentAmplificationError(f"g²λ² = {glam2} >= 1: amplified state diverges")
    shrink = (1.0 - lam2) / (1.0 - glam2)
    return (1.0 + glam2) / (1.0 - glam2) + 2.0 * g * g * shrink**2 * ch.transmittance * p.alpha2


def equivalent_output_variance(eq: EquivalentChannel) -> float:
    """1 + ηε^g + 2η(α^g)², Bob's variance behind the equivalent channel."""
    return 1.0 + eq.eta * eq.eps_g + 2.0 * eq.eta * eq.alpha_g**2
