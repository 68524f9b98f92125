"""Monte-Carlo oracle behavior: determinism, degenerate cases, agreement."""

import numpy as np
import pytest

from starfd.config import SystemConfig
from starfd.experiments import channel_for
from starfd.rates import effective_channels, mse_dl, mse_ul, sinr_fd
from starfd.rng import Stream
from starfd.simulate import simulate_signal_model

from helpers import random_state, random_surface, toy_channel


def _instance(seed):
    cfg = SystemConfig(m=6, n_t=3)
    ch = channel_for(cfg, seed)
    star = random_surface(cfg.m, Stream.from_seed(seed, "mc-surf"))
    state = random_state(cfg, Stream.from_seed(seed, "mc-state"))
    return cfg, ch, star, state


def test_simulation_is_deterministic():
    cfg, ch, star, state = _instance(1)
    a = simulate_signal_model(ch, star, state, cfg, 4096, Stream.from_seed(1, "mc"))
    b = simulate_signal_model(ch, star, state, cfg, 4096, Stream.from_seed(1, "mc"))
    np.testing.assert_array_equal(a.dl_sinr, b.dl_sinr)
    np.testing.assert_array_equal(a.ul_mse, b.ul_mse)
    assert a.n_samples == b.n_samples == 4096


def test_zero_channels_measure_nothing():
    cfg = SystemConfig(m=2, n_t=2)
    ch = toy_channel(2, 2)
    star = random_surface(2, Stream.from_seed(0, "z"))
    state = random_state(cfg, Stream.from_seed(0, "zs"))
    est = simulate_signal_model(ch, star, state, cfg, 2048,
                                Stream.from_seed(0, "zmc"))
    assert np.all(est.dl_signal == 0.0)
    assert np.all(est.ul_signal == 0.0)
    assert np.all(est.dl_sinr == 0.0) and np.all(est.ul_sinr == 0.0)


def test_rejects_empty_sample_budget():
    cfg, ch, star, state = _instance(2)
    with pytest.raises(ValueError):
        simulate_signal_model(ch, star, state, cfg, 0, Stream.from_seed(2, "mc"))


def test_light_agreement_with_analytics():
    """Smoke-level agreement; the acceptance suite runs the full budget."""
    cfg, ch, star, state = _instance(3)
    eff = effective_channels(ch, star)
    dl, ul = sinr_fd(eff, state, cfg)
    est = simulate_signal_model(ch, star, state, cfg, 60_000,
                                Stream.from_seed(3, "mc"))
    for i in range(2):
        assert abs(est.dl_sinr[i] - dl[i]) < 3.5 * est.dl_sinr_se[i] + 1e-12
        assert abs(est.ul_sinr[i] - ul[i]) < 3.5 * est.ul_sinr_se[i] + 1e-12
        assert abs(est.dl_mse[i] - mse_dl(eff, state, cfg, i)) \
            < 3.5 * est.dl_mse_se[i] + 1e-12
        assert abs(est.ul_mse[i] - mse_ul(eff, state, cfg, i)) \
            < 3.5 * est.ul_mse_se[i] + 1e-12
