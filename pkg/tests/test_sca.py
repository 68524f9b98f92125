"""Surface subproblem solvers, the amplitude penalty, and the slot grid."""

import numpy as np
import pytest

from helpers import random_state, random_surface, toy_channel
from starfd.config import SystemConfig
from starfd.experiments import channel_for
from starfd.rng import Stream
from starfd.sca import (_binary_gap, _penalty_delta, binary_defect,
                        enumerate_time_fractions, rescale_state_for_tau,
                        run_ms_penalty_loop, search_time_fractions,
                        snap_to_binary, solve_es_subproblem,
                        solve_ms_subproblem, solve_phase_subproblem,
                        solve_ts_subproblem, surface_from_vector,
                        surface_vector)
from starfd.surrogate import build_expansion, true_wsr_of_surface
from starfd.types import AllocationState, StarCoefficients, check_power_feasible

CFG = SystemConfig(m=5, n_t=3)


@pytest.fixture(scope="module")
def setup():
    ch = channel_for(CFG, 21)
    rng = Stream.from_seed(21, "sca-tests")
    return ch, random_surface(CFG.m, rng), random_state(CFG, rng), rng


def test_surface_vector_round_trip():
    rng = Stream.from_seed(3, "roundtrip")
    star = random_surface(4, rng)
    x = surface_vector(star)
    back = surface_from_vector(x, 4, "es")
    assert np.array_equal(back.q_t, star.q_t)
    assert np.array_equal(back.q_r, star.q_r)
    assert back.protocol == "es"


def _single_path_setup():
    # One element, one antenna, and a single live downlink whose effective
    # channel is 0.8 q_r + 0.5: the optimum is q_r = 1 and the whole rate
    # profile is a function of one phase, so a dense grid is an oracle.
    cfg = SystemConfig(m=1, n_t=1, p_max_bs=1.0, sigma2_dl=1.0, sigma2_ul=1.0)
    ch = toy_channel(1, 1, {"v_d": np.array([1.0 + 0j]),
                            "h_d": np.array([[0.8 + 0j]]),
                            "f1": np.array([0.5 + 0j])})
    state = AllocationState(w=np.array([[1.0 + 0j], [0j]]),
                            rho=np.zeros(2),
                            u_comb=np.zeros((2, 1), complex),
                            u_det=np.zeros(2, complex),
                            mu_dl=np.ones(2), mu_ul=np.ones(2))
    return cfg, ch, state


def test_es_single_element_matches_phase_grid():
    cfg, ch, state = _single_path_setup()
    star0 = StarCoefficients(np.array([0.3 + 0j]), np.array([0.3j]), "es")
    star, wsr = solve_es_subproblem(ch, star0, state, cfg)
    theta = np.linspace(0.0, 2.0 * np.pi, 720, endpoint=False)
    grid = 0.5 * np.log2(1.0 + np.abs(0.8 * np.exp(1j * theta) + 0.5) ** 2)
    assert wsr >= float(np.max(grid)) - 1e-4
    assert wsr <= 0.5 * np.log2(1.0 + 1.3 ** 2) + 1e-9
    assert abs(star.q_r[0]) > 0.999
    assert abs(np.angle(star.q_r[0])) < 0.05
    assert abs(star.q_t[0]) < 0.05


def test_ts_single_element_matches_phase_grid():
    cfg, ch, state = _single_path_setup()
    state = AllocationState(w=state.w, rho=state.rho, u_comb=state.u_comb,
                            u_det=state.u_det, mu_dl=state.mu_dl,
                            mu_ul=state.mu_ul,
                            tau=np.array([0.5, 0.0, 0.5, 0.0]))
    star0 = StarCoefficients(np.array([0.2 + 0j]), np.array([-0.4j]), "ts")
    star, wsr = solve_ts_subproblem(ch, star0, state, cfg)
    theta = np.linspace(0.0, 2.0 * np.pi, 720, endpoint=False)
    grid = 0.25 * np.log2(1.0 + np.abs(0.8 * np.exp(1j * theta) + 0.5) ** 2)
    assert wsr >= float(np.max(grid)) - 1e-4
    assert abs(star.q_r[0]) > 0.999
    assert abs(np.angle(star.q_r[0])) < 0.05
    assert star.protocol == "ts"


def test_ts_solver_requires_fractions(setup):
    ch, _, state, rng = setup
    star = random_surface(CFG.m, rng, protocol="ts")
    with pytest.raises(ValueError, match="time fractions"):
        solve_ts_subproblem(ch, star, state, cfg=CFG)


def test_ms_zero_penalty_equals_es_solver(setup):
    ch, star, state, _ = setup
    relaxed = StarCoefficients(star.q_t, star.q_r, "ms")
    ref, _ = solve_es_subproblem(ch, relaxed, state, CFG)
    x = solve_ms_subproblem(ch, relaxed, state, CFG, 0.0)
    assert np.array_equal(x, surface_vector(ref))


def test_penalty_linearization_identity():
    rng = Stream.from_seed(9, "penalty")
    y = 1.3 * rng.cnormal(12)
    ref = np.abs(0.9 * rng.cnormal(12))
    expect = float(np.sum((ref - np.abs(y)) ** 2))
    assert abs(_penalty_delta(y, ref) + _binary_gap(y) - expect) < 1e-12
    # at a binary profile the linearization is exact
    snapped = snap_to_binary(1e-3 + y, 6)
    assert abs(_penalty_delta(snapped, np.abs(snapped))) < 1e-12
    assert binary_defect(snapped) < 1e-12


def test_snap_keeps_winner_phase():
    q_t = np.array([0.8 * np.exp(0.7j), 0.1 + 0j, 0j])
    q_r = np.array([0.2 + 0j, 0.5 * np.exp(-1.1j), 0j])
    x = snap_to_binary(np.concatenate([q_t, q_r]), 3)
    assert abs(x[0] - np.exp(0.7j)) < 1e-12       # transmit wins element 0
    assert x[3] == 0.0
    assert abs(x[4] - np.exp(-1.1j)) < 1e-12      # reflect wins element 1
    assert x[1] == 0.0
    assert x[5] == 1.0 and x[2] == 0.0            # dead pair parks at reflection
    np.testing.assert_allclose(snap_to_binary(x, 3), x, atol=1e-12)


def test_large_penalty_preserves_binary_profile(setup):
    ch, star, state, rng = setup
    x0 = snap_to_binary(surface_vector(random_surface(CFG.m, rng)), CFG.m)
    binary = surface_from_vector(x0, CFG.m, "ms")
    x = solve_ms_subproblem(ch, binary, state, CFG, 1e6)
    assert binary_defect(x) <= 1e-6


def test_subproblems_never_lose_rate(setup):
    ch, star, state, _ = setup
    exp0 = build_expansion(ch, star, state, CFG)
    start = true_wsr_of_surface(exp0, surface_vector(star))
    for solver in (solve_es_subproblem, solve_phase_subproblem):
        out, wsr = solver(ch, star, state, CFG)
        assert wsr >= start - 1e-9
        assert np.all(np.abs(out.q_t) ** 2 + np.abs(out.q_r) ** 2 <= 1.0 + 1e-9)


def test_phase_solver_freezes_amplitudes(setup):
    ch, star, state, _ = setup
    out, _ = solve_phase_subproblem(ch, star, state, CFG)
    np.testing.assert_allclose(np.abs(out.q_t), np.abs(star.q_t), atol=1e-12)
    np.testing.assert_allclose(np.abs(out.q_r), np.abs(star.q_r), atol=1e-12)


def test_penalty_loop_returns_binary_and_never_loses(setup):
    ch, _, state, rng = setup
    x0 = snap_to_binary(surface_vector(random_surface(CFG.m, rng)), CFG.m)
    binary = surface_from_vector(x0, CFG.m, "ms")
    exp0 = build_expansion(ch, binary, state, CFG)
    start = true_wsr_of_surface(exp0, x0)
    out, wsr = run_ms_penalty_loop(ch, binary, state, CFG)
    assert binary_defect(surface_vector(out)) < 1e-12
    assert wsr >= start - 1e-9


def test_time_fraction_grid():
    grid = enumerate_time_fractions(0.05)
    assert len(grid) == 1771
    assert grid == sorted(grid)
    arr = np.array(grid)
    np.testing.assert_allclose(arr.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(arr >= 0.0)
    with pytest.raises(ValueError, match="divide 1 evenly"):
        enumerate_time_fractions(0.3)


def test_rescale_state_drops_short_slots(setup):
    _, _, state, _ = setup
    tau = (0.4, 0.0, 0.35, 0.25)
    out = rescale_state_for_tau(state, CFG, tau, 0.05)
    assert np.all(out.w[1] == 0.0)
    used = 0.4 * float(np.sum(np.abs(out.w[0]) ** 2))
    assert abs(used - CFG.p_max_bs) < 1e-9 * CFG.p_max_bs
    np.testing.assert_allclose(out.rho, [CFG.p_max_ul / 0.35, CFG.p_max_ul / 0.25])
    check_power_feasible(out, CFG, ts=True)
    assert np.array_equal(out.tau, np.asarray(tau))


def test_fraction_search_balances_symmetric_streams():
    # One live DL stream and one live UL stream with identical
    # signal-to-noise products: the optimal split is half and half, and
    # the dead streams get no air time at all.
    cfg = SystemConfig(m=1, n_t=1, p_max_bs=1.0, p_max_ul=1.0,
                       sigma2_dl=1.0, sigma2_ul=1.0)
    ch = toy_channel(1, 1, {"f1": np.array([1.0 + 0j])})
    star = StarCoefficients(np.zeros(1, complex), np.zeros(1, complex), "ts")
    state = AllocationState(w=np.array([[1.0 + 0j], [0j]]),
                            rho=np.array([0.5, 0.0]),
                            u_comb=np.array([[1.0 + 0j], [0j]]),
                            u_det=np.zeros(2, complex),
                            mu_dl=np.ones(2), mu_ul=np.ones(2),
                            tau=np.array([0.25, 0.25, 0.25, 0.25]))
    out, wsr = search_time_fractions(ch, star, state, cfg, grid_step=0.1)
    assert np.array_equal(out.tau, [0.5, 0.0, 0.5, 0.0])
    # both live slots run at 2x average power, so each rate is log2(3)/2
    assert abs(wsr - 0.5 * np.log2(3.0)) < 1e-12
    assert abs(float(np.sum(np.abs(out.w[0]) ** 2)) - 2.0) < 1e-9
    np.testing.assert_allclose(out.rho, [2.0, 0.0])
