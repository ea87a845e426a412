"""
Analytic quantities of the four-state protocol with reverse reconciliation and homodyne
detection: λ weights, correlation Z, channel-output covariance, I_AB, the Gaussian
Holevo bound S_BE^G and the key-rate lower bound β·I_AB − S_BE^G.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.stats import poisson

from .errors import DomainError
from .gaussian import conditional_excess, entropy_from_excess, symplectic_excess
from .types import (
    ChannelParams,
    KeyRateBreakdown,
    LambdaWeights,
    ProtocolParams,
    TwoModeCovariance,
)

_LN2 = math.log(2.0)


@lru_cache(maxsize=1024)
def _weights(alpha: float) -> tuple[float, float, float, float]:
    x = alpha * alpha
    if x == 0.0:
        return (1.0, 0.0, 0.0, 0.0)
    # λ_k = Σ_{n ≡ k mod 4} e^{-x} x^n / n!, the Poisson mass of each residue class
    n_max = math.ceil(x + 12.0 * math.sqrt(x) + 40.0)
    n_max += (-(n_max + 1)) % 4
    pmf = poisson.pmf(np.arange(n_max + 1), x)
    w = pmf.reshape(-1, 4).sum(axis=0)
    return (float(w[0]), float(w[1]), float(w[2]), float(w[3]))


def lambda_weights(alpha: float) -> LambdaWeights:
    """Weights λ₀..λ₃ of the four φ_k states.

    Equal to ½e^{−α²}[cosh α² ± cos α²] and ½e^{−α²}[sinh α² ± sin α²], evaluated as
    Poisson sums so that small amplitudes do not cancel.
    """
    if not math.isfinite(alpha) or alpha < 0:
        raise DomainError(f"alpha must be finite and >= 0, got {alpha}")
    l0, l1, l2, l3 = _weights(float(alpha))
    return LambdaWeights(lambda0=l0, lambda1=l1, lambda2=l2, lambda3=l3)


def correlation_Z(alpha: float) -> float:
    """Z = 2α² Σ_k λ_k^{3/2} λ_{k+1}^{-1/2} (indices mod 4); 0 at α = 0."""
    if not math.isfinite(alpha) or alpha < 0:
        raise DomainError(f"alpha must be finite and >= 0, got {alpha}")
    if alpha == 0.0:
        return 0.0
    lam = _weights(float(alpha))
    total = 0.0
    for k in range(4):
        nxt = lam[(k + 1) % 4]
        if nxt > 0.0:
            total += lam[k] ** 1.5 / math.sqrt(nxt)
    return 2.0 * alpha * alpha * total


def channel_covariance(p: ProtocolParams, ch: ChannelParams) -> TwoModeCovariance:
    """a = V, b = T(V + (1 − T)/T + ε) = 1 + T(V_A + ε), c = √T·Z."""
    t = ch.transmittance
    return TwoModeCovariance(
        a_excess=p.va,
        b_excess=t * (p.va + ch.excess_noise),
        c=math.sqrt(t) * correlation_Z(p.alpha),
    )


def snr(p: ProtocolParams, ch: ChannelParams) -> float:
    t = ch.transmittance
    return t * p.va / (1.0 + t * ch.excess_noise)


def mutual_information(p: ProtocolParams, ch: ChannelParams) -> float:
    """I_AB = ½log₂((V + χ)/(1 + χ)) = ½log₂(1 + SNR), bits per use."""
    return math.log1p(snr(p, ch)) / (2.0 * _LN2)


def holevo_bound(p: ProtocolParams, ch: ChannelParams) -> tuple[float, float, float, float]:
    """Gaussian upper bound on Eve's information, with the eigenvalues it used.

    Returns (S_BE^G, ν₁, ν₂, ν₃). Raises UnphysicalCovarianceError for covariance matrices
    with an eigenvalue below vacuum.
    """
    cm = channel_covariance(p, ch)
    e1, e2 = symplectic_excess(cm)
    e3 = conditional_excess(p.alpha, ch.transmittance, ch.excess_noise, correlation_Z(p.alpha))
    s = entropy_from_excess(e1) + entropy_from_excess(e2) - entropy_from_excess(e3)
    return s, 1.0 + e1, 1.0 + e2, 1.0 + e3


def key_rate(p: ProtocolParams, ch: ChannelParams) -> KeyRateBreakdown:
    """Lower bound β·I_AB − S_BE^G of the secret key rate, negative values included."""
    info = mutual_information(p, ch)
    s, nu1, nu2, nu3 = holevo_bound(p, ch)
    return KeyRateBreakdown(
        mutual_information=info,
        holevo_bound=s,
        rate=p.beta * info - s,
        nu1=nu1,
        nu2=nu2,
        nu3=nu3,
    )
