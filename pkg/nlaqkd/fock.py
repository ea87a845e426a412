"""
Brute-force cross-checks in a truncated Fock space.

Quadratures follow the shot-noise convention X = a + a†, so the vacuum variance is 1 and
oracle moments compare directly with covariance-matrix entries.

Mixed states are assembled from their Glauber P-function as Gauss–Hermite weighted sums of
coherent projectors. Every matrix entry is then a positively weighted sum of products of
coherent amplitudes, so conjugation by g^n̂ (which rescales entry (m, n) by g^{m+n}) keeps
its relative accuracy even far out in photon number.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.stats import poisson

from .errors import DivergentAmplificationError, DomainError, TruncationError
from .fourstate import lambda_weights
from .nla import lambda_from_noise
from .types import ChannelParams, FockDensityMatrix, FockVector, ProtocolParams

DEFAULT_CUTOFF = 40
TAIL_TOL = 1e-10
QUADRATURE_NODES = 64


def annihilation(N: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, N + 1, dtype=float)), k=1)


def quadrature_operator(N: int) -> np.ndarray:
    a = annihilation(N)
    return a + a.T


def _four_phases() -> np.ndarray:
    return np.exp(1j * np.pi * (2 * np.arange(4) + 1) / 4)


def _coherent_columns(alphas: np.ndarray, N: int) -> np.ndarray:
    """Truncated coherent amplitudes, one column per entry of ``alphas``."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    k = np.sqrt(np.arange(1, N + 1, dtype=float))
    ratios = alphas[None, :] / k[:, None]
    body = np.cumprod(ratios, axis=0) if N > 0 else np.empty((0, alphas.size), dtype=complex)
    cols = np.vstack([np.ones((1, alphas.size), dtype=complex), body])
    return cols * np.exp(-0.5 * np.abs(alphas) ** 2)[None, :]


def coherent_state(alpha: complex, N: int) -> FockVector:
    return FockVector(amplitudes=_coherent_columns(np.array([alpha]), N)[:, 0], truncation=N)


def _require_fit(mean_photons: float, N: int) -> None:
    tail = float(poisson.sf(N, mean_photons))
    if tail > TAIL_TOL:
        raise TruncationError(
            f"cutoff N={N} leaves photon-number tail mass {tail:.3e} > {TAIL_TOL:g} "
            f"for mean photon number {mean_photons:g}",
            tail_mass=tail,
            cutoff=N,
        )


# ── four-state ensemble ─────────────────────────────────────────────────────────────
def build_phi_states(alpha: float, N: int = DEFAULT_CUTOFF) -> list[FockVector]:
    """|φ_k⟩ = (e^{−α²/2}/√λ_k) Σ_n (−1)^n α^{4n+k}/√((4n+k)!) |4n+k⟩, k = 0..3."""
    if alpha <= 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    _require_fit(alpha * alpha, N)
    lam = lambda_weights(alpha).as_tuple()
    n = np.arange(N + 1)
    coh = _coherent_columns(np.array([alpha]), N)[:, 0].real
    sign = np.where((n // 4) % 2 == 0, 1.0, -1.0)
    states = []
    for k in range(4):
        amps = np.where(n % 4 == k, sign * coh / math.sqrt(lam[k]), 0.0).astype(complex)
        states.append(FockVector(amplitudes=amps, truncation=N))
    return states


def psi_states(alpha: float, N: int = DEFAULT_CUTOFF) -> list[FockVector]:
    """Alice's projectors |ψ_k⟩ = ½ Σ_m e^{−i(2k+1)mπ/4} |φ_m⟩."""
    phis = build_phi_states(alpha, N)
    out = []
    for k in range(4):
        amps = sum(
            0.5 * cmath.exp(-1j * (2 * k + 1) * m * math.pi / 4) * phis[m].amplitudes
            for m in range(4)
        )
        out.append(FockVector(amplitudes=np.asarray(amps), truncation=N))
    return out


def two_mode_state(alpha: float, N: int = DEFAULT_CUTOFF) -> np.ndarray:
    """Amplitude matrix M[i, j] of |Φ_AB⟩ = ½ Σ_k |ψ_k⟩_A |α_k⟩_B."""
    psis = psi_states(alpha, N)
    cohs = _coherent_columns(alpha * _four_phases(), N)
    return sum(0.5 * np.outer(psis[k].amplitudes, cohs[:, k]) for k in range(4))


def phi_decomposition_error(alpha: float, N: int = DEFAULT_CUTOFF) -> float:
    """max_k ‖ |α_k⟩ − Σ_m e^{i(2k+1)mπ/4} √λ_m |φ_m⟩ ‖ on the truncated space."""
    phis = build_phi_states(alpha, N)
    lam = lambda_weights(alpha).as_tuple()
    cohs = _coherent_columns(alpha * _four_phases(), N)
    worst = 0.0
    for k in range(4):
        rebuilt = sum(
            cmath.exp(1j * (2 * k + 1) * m * math.pi / 4) * math.sqrt(lam[m]) * phis[m].amplitudes
            for m in range(4)
        )
        worst = max(worst, float(np.linalg.norm(cohs[:, k] - rebuilt)))
    return worst


def oracle_Z(alpha: float, N: int = DEFAULT_CUTOFF) -> float:
    """⟨Φ|X_A ⊗ X_B|Φ⟩ on the truncated two-mode state."""
    m = two_mode_state(alpha, N)
    x = quadrature_operator(N)
    return float(np.real(np.sum(m.conj() * (x @ m @ x.T))))


def oracle_mode_variance(alpha: float, N: int = DEFAULT_CUTOFF) -> tuple[float, float, float]:
    """(⟨X_A²⟩, ⟨X_B²⟩, ⟨n_B⟩) of |Φ_AB⟩; both variances should equal 2α² + 1."""
    m = two_mode_state(alpha, N)
    x2 = quadrature_operator(N) @ quadrature_operator(N)
    var_a = float(np.real(np.sum(m.conj() * (x2 @ m))))
    var_b = float(np.real(np.sum(m.conj() * (m @ x2.T))))
    n_b = float(np.sum(np.abs(m) ** 2 * np.arange(N + 1)[None, :]))
    return var_a, var_b, n_b


# ── displaced thermal states and amplification ──────────────────────────────────────
def displaced_thermal(
    beta: complex, lam: float, N: int = DEFAULT_CUTOFF, *, nodes: int = QUADRATURE_NODES
) -> FockDensityMatrix:
    """ρ(β) = D(β) ρ_th(λ) D(−β), ρ_th(λ) = (1 − λ²) Σ λ^{2n} |n⟩⟨n|.

    Built from the P-function (1/πs) e^{−|α' − β|²/s}, s = λ²/(1 − λ²).
    """
    if not 0.0 <= lam < 1.0:
        raise DomainError(f"thermal parameter must lie in [0, 1), got {lam}")
    if lam == 0.0:
        cols = _coherent_columns(np.array([beta]), N)
        weights = np.ones(1)
    else:
        s = lam * lam / (1.0 - lam * lam)
        z, w = hermgauss(nodes)
        u, v = np.meshgrid(z, z, indexing="ij")
        alphas = (beta + math.sqrt(s) * (u + 1j * v)).ravel()
        weights = (np.outer(w, w) / math.pi).ravel()
        cols = _coherent_columns(alphas, N)
    rho = (cols * weights[None, :]) @ cols.conj().T
    tail = 1.0 - float(np.real(np.trace(rho)))
    if tail > TAIL_TOL:
        raise TruncationError(
            f"cutoff N={N} leaves tail mass {tail:.3e} for β={beta}, λ={lam}",
            tail_mass=tail,
            cutoff=N,
        )
    return FockDensityMatrix(entries=rho, truncation=N, thermal_parameter=lam)


def apply_nla(rho: FockDensityMatrix, g: float) -> FockDensityMatrix:
    """g^n̂ ρ g^n̂ renormalised to unit trace."""
    if g < 1.0:
        raise DomainError(f"NLA gain must be >= 1, got {g}")
    lam = rho.thermal_parameter
    if lam is not None and (g * lam) ** 2 >= 1.0:
        raise DivergentAmplificationError(f"g²λ² = {(g * lam) ** 2:g} >= 1")
    N = rho.truncation
    # constant shift of the exponent cancels in the renormalisation
    scale = np.exp((np.arange(N + 1) - 0.5 * N) * math.log(g))
    out = rho.entries * np.outer(scale, scale)
    out = out / np.real(np.trace(out))
    top = float(np.real(out[N, N]))
    if top > TAIL_TOL:
        raise TruncationError(
            f"amplified state reaches the cutoff N={N} (population {top:.3e})",
            tail_mass=top,
            cutoff=N,
        )
    return FockDensityMatrix(
        entries=out, truncation=N, thermal_parameter=None if lam is None else g * lam
    )


def amplify_displaced_thermal(
    beta: complex, lam: float, g: float, N: int = DEFAULT_CUTOFF
) -> FockDensityMatrix:
    if (g * lam) ** 2 >= 1.0:
        raise DivergentAmplificationError(f"g²λ² = {(g * lam) ** 2:g} >= 1")
    return apply_nla(displaced_thermal(beta, lam, N), g)


def quadrature_moments(rho: FockDensityMatrix) -> tuple[complex, float]:
    """(⟨a⟩, Var X) of ``rho``, normalised by its trace."""
    N = rho.truncation
    a = annihilation(N)
    x = a + a.T
    tr = rho.trace
    mean_a = complex(np.trace(rho.entries @ a)) / tr
    mean_x = float(np.real(np.trace(rho.entries @ x))) / tr
    mean_x2 = float(np.real(np.trace(rho.entries @ x @ x))) / tr
    return mean_a, mean_x2 - mean_x * mean_x


def thermal_parameter_from_variance(variance: float) -> float:
    """λ² of a displaced thermal state with quadrature variance ``variance``."""
    return (variance - 1.0) / (variance + 1.0)


def oracle_output_variance(
    p: ProtocolParams, ch: ChannelParams, g: float, N: int = DEFAULT_CUTOFF
) -> float:
    """Quadrature variance of g^n̂ applied to ρ_B = ¼ Σ_k D(√T α_k) ρ_th(λ) D(−√T α_k)."""
    lam = lambda_from_noise(ch)
    if (g * lam) ** 2 >= 1.0:
        raise DivergentAmplificationError(f"g²λ² = {(g * lam) ** 2:g} >= 1")
    betas = math.sqrt(ch.transmittance) * p.alpha * _four_phases()
    mixture = sum(displaced_thermal(b, lam, N).entries for b in betas) / 4.0
    rho_b = FockDensityMatrix(entries=mixture, truncation=N, thermal_parameter=lam)
    _, var = quadrature_moments(apply_nla(rho_b, g))
    return var
