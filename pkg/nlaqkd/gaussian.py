"""
Shot-noise-unit Gaussian-state numerics.

Vacuum variance is 1. Symplectic eigenvalues are computed through their excess above
vacuum (ν − 1) so that weak signals at high loss keep their precision; the public
functions return plain ν values.
"""

from __future__ import annotations

import logging
import math

from scipy.special import xlogy

from .errors import DomainError, UnphysicalCovarianceError
from .types import TwoModeCovariance

logger = logging.getLogger(__name__)

CLAMP_TOL = 1e-9
_LN2 = math.log(2.0)


def entropy_G(x: float) -> float:
    """Von Neumann entropy in bits of a thermal state with mean photon number ``x``.

    G(x) = (x + 1)·log₂(1 + x) − x·log₂x, continuous at 0.

    >>> entropy_G(0.0)
    0.0
    >>> round(entropy_G(1.0), 12)
    2.0
    """
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"entropy_G needs a finite x >= 0, got {x}")
    return float(((x + 1.0) * math.log1p(x) - xlogy(x, x)) / _LN2)


def entropy_from_excess(excess: float) -> float:
    """G((ν − 1)/2) from the excess ν − 1; roundoff below vacuum is clamped."""
    if excess < 0:
        if excess < -CLAMP_TOL:
            raise UnphysicalCovarianceError(
                f"symplectic eigenvalue below vacuum: ν − 1 = {excess}"
            )
        excess = 0.0
    return entropy_G(0.5 * excess)


def _excess_from_square(y: float) -> float:
    """ν − 1 from ν² − 1 without forming ν first."""
    if y < -1.0:
        raise UnphysicalCovarianceError(f"negative squared symplectic eigenvalue ({1.0 + y})")
    return y / (math.sqrt(1.0 + y) + 1.0)


def symplectic_excess(cm: TwoModeCovariance) -> tuple[float, float]:
    """(ν₁ − 1, ν₂ − 1) of the symmetric two-mode covariance, ν₁ ≥ ν₂.

    Uses Δ² − 4D = (a − b)²((a + b)² − 4c²) and
    (ν₁² − 1)(ν₂² − 1) = (b_e(2 + a_e) − c²)(a_e(2 + b_e) − c²), a_e = a − 1, b_e = b − 1.
    """
    ae, be, c = cm.a_excess, cm.b_excess, cm.c
    if not all(math.isfinite(v) for v in (ae, be, c)):
        raise DomainError(f"covariance entries must be finite, got {cm!r}")
    w = c * c
    apb = cm.a + cm.b
    k = apb * apb - 4.0 * w
    if k < 0:
        if k < -CLAMP_TOL * max(1.0, apb * apb):
            raise UnphysicalCovarianceError(
                f"Δ² − 4D < 0 for a={cm.a}, b={cm.b}, c={c}: no real symplectic spectrum"
            )
        logger.debug("clamped (a+b)^2 - 4c^2 = %.3e to 0", k)
        k = 0.0
    s = abs(ae - be) * math.sqrt(k)
    delta_m2 = ae * (2.0 + ae) + be * (2.0 + be) - 2.0 * w  # Δ − 2
    y1 = 0.5 * (delta_m2 + s)
    product = (be * (2.0 + ae) - w) * (ae * (2.0 + be) - w)
    y2 = product / y1 if y1 > 0 else 0.5 * (delta_m2 - s)
    y2 = min(y2, y1)
    return _excess_from_square(y1), _excess_from_square(y2)


def symplectic_eigenvalues(cm: TwoModeCovariance) -> tuple[float, float]:
    """Symplectic eigenvalues (ν₁, ν₂), ν₁ ≥ ν₂, of ``cm``.

    States with ν₂ < 1 − 1e-9 are returned as computed and logged; callers decide.
    """
    e1, e2 = symplectic_excess(cm)
    if e2 < -CLAMP_TOL:
        logger.debug("unphysical covariance a=%g b=%g c=%g: nu2 = %.12g", cm.a, cm.b, cm.c, 1 + e2)
    return 1.0 + e1, 1.0 + e2


def conditional_excess(alpha: float, T: float, eps: float, Z: float) -> float:
    """ν₃ − 1 for Alice's mode conditioned on Bob's homodyne outcome."""
    if not 0 < T <= 1 or eps < 0 or alpha < 0:
        raise DomainError(
            f"need 0 < T <= 1, eps >= 0, alpha >= 0; got T={T}, eps={eps}, alpha={alpha}"
        )
    va = 2.0 * alpha * alpha
    v = va + 1.0
    bob = T * va + 1.0 + T * eps
    return _excess_from_square(va * (va + 2.0) - v * T * Z * Z / bob)


def conditional_eigenvalue_v3(alpha: float, T: float, eps: float, Z: float) -> float:
    """ν₃ = sqrt(V(V_A + 1 − TZ²/(TV_A + 1 + Tε)))."""
    excess = conditional_excess(alpha, T, eps, Z)
    if excess < -CLAMP_TOL:
        logger.debug("unphysical conditional state: nu3 = %.12g", 1.0 + excess)
    return 1.0 + excess
