import math
from decimal import Decimal, localcontext

import numpy as np
import pytest

from nlaqkd.errors import DomainError, UnphysicalCovarianceError
from nlaqkd.fourstate import holevo_bound
from nlaqkd.gaussian import (
    conditional_eigenvalue_v3,
    entropy_from_excess,
    entropy_G,
    symplectic_eigenvalues,
)
from nlaqkd.types import ChannelParams, ProtocolParams, TwoModeCovariance


@pytest.mark.parametrize(
    "x,expected",
    [
        (0.0, 0.0),
        (1.0, 2.0),
        (0.5, 1.5 * math.log2(1.5) + 0.5),
    ],
)
def test_entropy_G_values(x, expected):
    assert entropy_G(x) == pytest.approx(expected, abs=1e-12)


def test_entropy_G_half_matches_reference():
    assert entropy_G(0.5) == pytest.approx(1.377444, abs=1e-6)


@pytest.mark.parametrize("bad", [-1e-3, math.nan, math.inf])
def test_entropy_G_rejects_bad_input(bad):
    with pytest.raises(DomainError):
        entropy_G(bad)


def test_entropy_G_increasing_and_concave():
    # G''(x) = 1/(1 + x) - 1/x < 0
    values = np.array([entropy_G(float(x)) for x in np.linspace(0.0, 50.0, 1000)])
    assert np.all(np.diff(values) > 0)
    assert np.all(np.diff(values, 2) <= 1e-12)


def test_entropy_G_vanishes_near_zero():
    assert abs(entropy_G(1e-15)) < 1e-12


def test_entropy_from_excess_clamps_roundoff():
    assert entropy_from_excess(-1e-12) == 0.0
    with pytest.raises(UnphysicalCovarianceError):
        entropy_from_excess(-1e-6)


def test_pure_two_mode_squeezed_states_are_vacuum():
    for v in np.linspace(1.0, 100.0, 200):
        v = float(v)
        cm = TwoModeCovariance(a=v, b=v, c=math.sqrt(v * v - 1))
        nu1, nu2 = symplectic_eigenvalues(cm)
        assert abs(nu1 - 1.0) < 1e-12 * v
        assert abs(nu2 - 1.0) < 1e-12 * v


def test_two_vacua():
    assert symplectic_eigenvalues(TwoModeCovariance(a=1.0, b=1.0, c=0.0)) == (1.0, 1.0)


def test_degenerate_symmetric_state():
    nu1, nu2 = symplectic_eigenvalues(TwoModeCovariance(a=1.25, b=1.25, c=0.742786))
    assert nu1 == pytest.approx(1.005370, abs=1e-5)
    assert nu2 == pytest.approx(1.005370, abs=1e-5)


def test_eigenvalues_ordered_and_match_determinant():
    cm = TwoModeCovariance(a=1.25, b=1.0784, c=0.41)
    nu1, nu2 = symplectic_eigenvalues(cm)
    assert nu1 >= nu2 >= 1.0
    assert nu1 * nu2 == pytest.approx(cm.determinant_root, rel=1e-10)


def test_excess_form_keeps_precision_at_high_loss():
    # T = 1e-9: b - 1 is far below double resolution of b itself
    t, va, z = 1e-9, 0.25, 0.742786
    cm = TwoModeCovariance(a_excess=va, b_excess=t * va, c=math.sqrt(t) * z)
    nu1, nu2 = symplectic_eigenvalues(cm)
    assert nu2 >= 1.0 - 1e-15
    assert nu1 * nu2 == pytest.approx(cm.a * cm.b - cm.c**2, rel=1e-12)


def test_unphysical_covariance_raises():
    with pytest.raises(UnphysicalCovarianceError):
        symplectic_eigenvalues(TwoModeCovariance(a=1.0, b=1.0, c=2.0))


def test_covariance_matrix_layout():
    m = TwoModeCovariance(a=1.5, b=1.2, c=0.3).as_matrix()
    assert m.shape == (4, 4)
    assert m[0, 2] == pytest.approx(0.3)
    assert m[1, 3] == pytest.approx(-0.3)
    assert (m == m.T).all()


def test_v3_vacuum():
    assert conditional_eigenvalue_v3(0.0, 0.5, 0.0, 0.0) == 1.0


def test_v3_identity_channel():
    v3 = conditional_eigenvalue_v3(math.sqrt(0.125), 1.0, 0.0, 0.742786)
    assert v3 == pytest.approx(1.005370, abs=1e-5)


def test_v3_rejects_bad_transmittance():
    with pytest.raises(DomainError):
        conditional_eigenvalue_v3(0.3, 0.0, 0.0, 0.1)


# ── 50-digit reference at V_A = 0.25, T = 0.316228, ε = 0.002 ───────────────────────
def _g_decimal(nu):
    x = (nu - 1) / 2
    if x == 0:
        return Decimal(0)
    return ((x + 1) * (x + 1).ln() - x * x.ln()) / Decimal(2).ln()


def _reference(va, t, eps, z=None):
    """(S_BE, ν₃) from the textbook formulas, at 50 significant digits."""
    with localcontext() as ctx:
        ctx.prec = 50
        va, t, eps = Decimal(va), Decimal(t), Decimal(eps)
        if z is None:
            x = va / 2
            term, lam = (-x).exp(), [Decimal(0)] * 4
            for n in range(120):
                lam[n % 4] += term
                term = term * x / (n + 1)
            z = 2 * x * sum(lam[k] ** Decimal("1.5") / lam[(k + 1) % 4].sqrt() for k in range(4))
        z = Decimal(z)
        a = 1 + va
        b = 1 + t * (va + eps)
        c = t.sqrt() * z
        delta = a * a + b * b - 2 * c * c
        det = (a * b - c * c) ** 2
        root = (delta * delta - 4 * det).sqrt()
        nu1 = ((delta + root) / 2).sqrt()
        nu2 = ((delta - root) / 2).sqrt()
        nu3 = (a * (a - c * c / b)).sqrt()
        return float(_g_decimal(nu1) + _g_decimal(nu2) - _g_decimal(nu3)), float(nu3)


def test_holevo_bound_at_25_km_matches_reference():
    p = ProtocolParams.from_va(0.25, beta=0.8)
    ch = ChannelParams(transmittance=0.316228, excess_noise=0.002)
    chi, _, _, nu3 = holevo_bound(p, ch)
    want_chi, want_nu3 = _reference("0.25", "0.316228", "0.002")
    assert abs(chi - want_chi) < 1e-10
    assert abs(nu3 - want_nu3) < 1e-10


def test_v3_at_25_km_matches_reference():
    v3 = conditional_eigenvalue_v3(math.sqrt(0.125), 0.316228, 0.002, 0.742786)
    _, want = _reference("0.25", "0.316228", "0.002", z="0.742786")
    assert abs(v3 - want) < 1e-10
