"""Value-type invariants: construction either validates or refuses."""

import numpy as np
import pytest

from starfd.config import SystemConfig
from starfd.types import (AllocationState, RateReport, StarCoefficients,
                          check_power_feasible, conventional_split, uniform_es,
                          unit_ts, zero_surface)


def test_pair_energy_constraint_enforced():
    with pytest.raises(ValueError, match="energy"):
        StarCoefficients(np.ones(4), np.ones(4), "es")
    # the same amplitudes are fine per mode under time switching
    star = StarCoefficients(np.ones(4), np.ones(4), "ts")
    assert star.m == 4


def test_ts_unit_disc_enforced():
    with pytest.raises(ValueError, match="unit disc"):
        StarCoefficients(1.2 * np.ones(2), np.zeros(2), "ts")


def test_unknown_protocol_rejected():
    with pytest.raises(ValueError, match="protocol"):
        StarCoefficients(np.zeros(2), np.zeros(2), "quantum")


def test_coefficients_are_read_only():
    star = uniform_es(4)
    with pytest.raises(ValueError):
        star.q_t[0] = 0.0


def test_check_binary():
    q_t = np.array([1.0, 0.0], complex)
    q_r = np.array([0.0, 1.0], complex)
    StarCoefficients(q_t, q_r, "ms").check_binary()
    with pytest.raises(ValueError):
        uniform_es(2).check_binary()


def test_surface_factories():
    eq = uniform_es(6)
    np.testing.assert_allclose(np.abs(eq.q_t), 1 / np.sqrt(2), atol=1e-12)
    ts = unit_ts(3)
    np.testing.assert_allclose(np.abs(ts.q_t), 1.0, atol=1e-15)
    z = zero_surface(5)
    assert np.all(z.q_t == 0) and np.all(z.q_r == 0)
    conv = conventional_split(4)
    np.testing.assert_allclose(np.abs(conv.q_r[:2]), 1.0)
    np.testing.assert_allclose(np.abs(conv.q_t[2:]), 1.0)
    assert np.all(conv.q_t[:2] == 0) and np.all(conv.q_r[2:] == 0)
    with pytest.raises(ValueError, match="even"):
        conventional_split(5)


def _state(**kw):
    base = dict(w=np.zeros((2, 3), complex), rho=np.zeros(2),
                u_comb=np.zeros((2, 3), complex), u_det=np.zeros(2, complex),
                mu_dl=np.ones(2), mu_ul=np.ones(2))
    base.update(kw)
    return AllocationState(**base)


def test_allocation_state_validation():
    with pytest.raises(ValueError, match="nonnegative"):
        _state(rho=np.array([-0.1, 0.0]))
    with pytest.raises(ValueError, match="positive"):
        _state(mu_dl=np.array([0.0, 1.0]))
    with pytest.raises(ValueError, match="sum to 1"):
        _state(tau=np.array([0.5, 0.5, 0.5, 0.5]))
    with pytest.raises(ValueError, match="finite"):
        _state(w=np.full((2, 3), np.nan, complex))
    st = _state(tau=np.full(4, 0.25))
    assert st.n_t == 3


def test_power_feasibility_full_duplex():
    cfg = SystemConfig()
    w = np.zeros((2, cfg.n_t), complex)
    w[0, 0] = np.sqrt(2.0 * cfg.p_max_bs)
    bad = AllocationState(w=w, rho=np.zeros(2),
                          u_comb=np.zeros((2, cfg.n_t), complex),
                          u_det=np.zeros(2, complex),
                          mu_dl=np.ones(2), mu_ul=np.ones(2))
    with pytest.raises(ValueError, match="BS budget"):
        check_power_feasible(bad, cfg)
    with pytest.raises(ValueError, match="UL power"):
        check_power_feasible(
            _state(rho=np.array([2.0 * cfg.p_max_ul, 0.0])), cfg)


def test_power_feasibility_slot_weighted():
    cfg = SystemConfig()
    tau = np.array([0.5, 0.0, 0.5, 0.0])
    w = np.zeros((2, cfg.n_t), complex)
    w[0, 0] = np.sqrt(1.9 * cfg.p_max_bs)   # fits only because tau[0] = 0.5
    ok = AllocationState(w=w, rho=np.array([1.9 * cfg.p_max_ul, 0.0]),
                         u_comb=np.zeros((2, cfg.n_t), complex),
                         u_det=np.zeros(2, complex),
                         mu_dl=np.ones(2), mu_ul=np.ones(2), tau=tau)
    check_power_feasible(ok, cfg, ts=True)
    with pytest.raises(ValueError):
        check_power_feasible(ok, cfg, ts=False)


def test_rate_report_consistency_enforced():
    with pytest.raises(ValueError, match="inconsistent"):
        RateReport(dl_sinr=np.ones(2), ul_sinr=np.zeros(2),
                   dl_rates=np.zeros(2), ul_rates=np.zeros(2),
                   dl_sum=0.0, ul_sum=0.0, wsr=0.0,
                   prelog=np.ones(4), alpha1=0.5, alpha2=0.5)


def test_rate_report_trace_coercion():
    rep = RateReport(dl_sinr=np.zeros(2), ul_sinr=np.zeros(2),
                     dl_rates=np.zeros(2), ul_rates=np.zeros(2),
                     dl_sum=0.0, ul_sum=0.0, wsr=0.0,
                     prelog=np.ones(4), alpha1=0.5, alpha2=0.5,
                     trace=[(0, 1.0), (1, np.float64(2.0))])
    assert rep.trace == ((0, 1.0), (1, 2.0))
    assert isinstance(rep.trace[1][1], float)
