import math

import numpy as np
import pytest

from nlaqkd.fourstate import key_rate
from nlaqkd.nla import (
    amplified_variance,
    equivalent_channel,
    equivalent_output_variance,
    g_max,
    nla_key_rate,
)
from nlaqkd.types import ChannelParams, NlaParams, ProtocolParams


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def test_lossless_noise_exactness(rng):
    for _ in range(100):
        p = ProtocolParams(alpha=float(rng.uniform(0.05, 0.8)), beta=float(rng.uniform(0.5, 1)))
        t = float(rng.uniform(1e-4, 1.0))
        g = float(rng.uniform(1.0, 1.0 / math.sqrt(t)))
        nla = NlaParams(gain=g)
        r = nla_key_rate(p, ChannelParams(transmittance=t, excess_noise=0.0), nla)
        base = key_rate(p, ChannelParams(transmittance=g * g * t, excess_noise=0.0))
        assert abs(r.rate / nla.success_probability() - base.rate) < 1e-12


def test_physicality_boundary(rng):
    for _ in range(100):
        ch = ChannelParams(
            transmittance=float(rng.uniform(1e-3, 0.9)),
            excess_noise=float(rng.uniform(1e-4, 0.1)),
        )
        gm = g_max(ch)
        at = equivalent_channel(ch, gm, alpha=0.3)
        assert at.physical
        assert abs(at.eta - 1.0) < 1e-9 or abs(at.eps_g) < 1e-12
        assert not equivalent_channel(ch, gm * (1 + 1e-6), alpha=0.3).physical


def test_variance_condition_is_redundant(rng):
    for _ in range(100):
        p = ProtocolParams(alpha=float(rng.uniform(0.05, 0.8)), beta=1.0)
        ch = ChannelParams(
            transmittance=float(rng.uniform(1e-3, 0.9)),
            excess_noise=float(rng.uniform(0.0, 0.1)),
        )
        g = float(rng.uniform(1.0, g_max(ch)))
        eq = equivalent_channel(ch, g, alpha=p.alpha)
        assert eq.alpha_g == p.alpha
        assert equivalent_output_variance(eq) == pytest.approx(
            amplified_variance(p, ch, g), abs=1e-10
        )


@pytest.mark.parametrize("prob", [0.01, 0.5, 1.0])
def test_success_probability_only_rescales(prob):
    p = ProtocolParams.from_va(0.25, beta=0.8)
    ch = ChannelParams.from_loss_db(20.0, 0.002)
    fixed = nla_key_rate(p, ch, NlaParams.fixed(4.0, prob))
    default = nla_key_rate(p, ch, NlaParams(gain=4.0))
    assert fixed.rate == pytest.approx(prob * 16 * default.rate, rel=1e-12)
