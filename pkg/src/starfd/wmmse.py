"""Weighted-MMSE alternating optimization of beamformers, powers, receivers.

Block order per iteration: beamformers and UL powers (separable given the
receive side), then combiners, detectors, and stream weights (closed
forms).  Every block solves its subproblem exactly, so the weighted-MSE
objective is non-increasing and the weighted sum rate non-decreasing.

With ``ts=True`` the same loop runs on the interference-free per-slot
model: stream weights pick up the time fractions, the beamformer budget
becomes slot-weighted, and each UL power box scales by its fraction.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .config import SystemConfig
from .kernels import KernelError, min_quadratic_ball, min_scalar_quadratic_box
from .rates import LN2, mse_dl, mse_ul, rates_ts, sinr_and_rates_fd, ul_covariance
from .types import (AllocationState, EffectiveChannels, RateReport,
                    SchemeProfile, NO_INTERFERENCE_FLAGS)

__all__ = [
    "FULL_PROFILE", "initial_allocation", "update_beamformers",
    "update_ul_powers", "update_combiners", "update_detectors",
    "update_weights", "wmmse_objective", "run_wmmse", "evaluate_report",
]

FULL_PROFILE = SchemeProfile()

_MIN_TAU = 1e-12


def _flags(profile: SchemeProfile, ts: bool):
    return NO_INTERFERENCE_FLAGS if ts else profile.flags


def _stream_weights(cfg: SystemConfig, profile: SchemeProfile, state: AllocationState,
                    ts: bool) -> np.ndarray:
    base = np.array([cfg.alpha1, cfg.alpha1, cfg.alpha2, cfg.alpha2])
    act = np.array([profile.dl_active[0], profile.dl_active[1],
                    profile.ul_active[0], profile.ul_active[1]], dtype=float)
    if ts:
        return base * act * state.tau
    return base * act


def _dl_rows(eff: EffectiveChannels):
    return (eff.hr1, eff.hr2)


def update_beamformers(eff: EffectiveChannels, state: AllocationState,
                       cfg: SystemConfig, profile: SchemeProfile = FULL_PROFILE,
                       ts: bool = False) -> np.ndarray:
    """Solve the joint beamformer block under the transmit power budget."""
    flags = _flags(profile, ts)
    weights = _stream_weights(cfg, profile, state, ts)
    n_t = state.n_t
    rows = _dl_rows(eff)
    tau = state.tau if ts else None

    active = []
    for k in range(2):
        if not profile.dl_active[k]:
            continue
        if ts and float(tau[k]) < _MIN_TAU:
            continue
        active.append(k)
    w_new = np.zeros((2, n_t), complex)
    if not active:
        return w_new

    rsi_coeff = 0.0
    if flags.rsi:
        for l in range(2):
            if profile.ul_active[l]:
                rsi_coeff += cfg.alpha2 * float(state.mu_ul[l]) * \
                    float(np.sum(np.abs(state.u_comb[l]) ** 2))
        rsi_coeff *= cfg.sigma2_rsi

    blocks = []
    rhs = []
    for k in active:
        h_own = rows[k]
        u = complex(state.u_det[k])
        a_k = weights[k] * float(state.mu_dl[k]) * abs(u) ** 2 * \
            np.outer(h_own.conj(), h_own)
        if flags.dl_stream_interference:
            k2 = 1 - k
            if profile.dl_active[k2]:
                h_other = rows[k2]
                u2 = complex(state.u_det[k2])
                a_k = a_k + weights[k2] * float(state.mu_dl[k2]) * abs(u2) ** 2 * \
                    np.outer(h_other.conj(), h_other)
        if rsi_coeff > 0.0:
            a_k = a_k + rsi_coeff * np.eye(n_t)
        b_k = weights[k] * float(state.mu_dl[k]) * np.conj(u) * h_own.conj()
        if ts:
            t = float(tau[k])
            a_k = a_k / t
            b_k = b_k / np.sqrt(t)
        blocks.append(a_k)
        rhs.append(b_k)

    dim = n_t * len(active)
    a_full = np.zeros((dim, dim), complex)
    b_full = np.zeros(dim, complex)
    for i, (a_k, b_k) in enumerate(zip(blocks, rhs)):
        sl = slice(i * n_t, (i + 1) * n_t)
        a_full[sl, sl] = a_k
        b_full[sl] = b_k
    x = min_quadratic_ball(a_full, b_full, cfg.p_max_bs)
    for i, k in enumerate(active):
        wk = x[i * n_t:(i + 1) * n_t]
        if ts:
            wk = wk / np.sqrt(float(tau[k]))
        w_new[k] = wk
    return w_new


def update_ul_powers(eff: EffectiveChannels, state: AllocationState,
                     cfg: SystemConfig, profile: SchemeProfile = FULL_PROFILE,
                     ts: bool = False) -> np.ndarray:
    """Closed-form UL transmit powers under the per-user budget."""
    flags = _flags(profile, ts)
    weights = _stream_weights(cfg, profile, state, ts)
    rho_new = np.zeros(2)
    own_gain = [np.vdot(state.u_comb[0], eff.hr3), np.vdot(state.u_comb[1], eff.gt3)]
    cross_gain = [np.vdot(state.u_comb[1], eff.hr3), np.vdot(state.u_comb[0], eff.gt3)]
    leak_gain = [eff.gt2, eff.gt1]  # UL user l leaking onto the other DL user
    for l in range(2):
        if not profile.ul_active[l]:
            continue
        ul_idx = 2 + l
        if ts and float(state.tau[ul_idx]) < _MIN_TAU:
            continue
        a = weights[ul_idx] * float(state.mu_ul[l]) * abs(own_gain[l]) ** 2
        if flags.ul_cross_interference and profile.ul_active[1 - l]:
            a += weights[2 + (1 - l)] * float(state.mu_ul[1 - l]) * abs(cross_gain[l]) ** 2
        k_other = 1 - l
        if flags.dl_user_interference and profile.dl_active[k_other]:
            a += weights[k_other] * float(state.mu_dl[k_other]) * \
                abs(complex(state.u_det[k_other])) ** 2 * abs(leak_gain[l]) ** 2
        b = weights[ul_idx] * float(state.mu_ul[l]) * float(np.real(own_gain[l]))
        box = cfg.p_max_ul / float(state.tau[ul_idx]) if ts else cfg.p_max_ul
        if a > 0.0:
            p = min_scalar_quadratic_box(a, b, box)
        elif b == 0.0:
            p = 0.0
        else:
            raise KernelError("UL power update lost its quadratic term")
        rho_new[l] = p * p
    return rho_new


def update_combiners(eff: EffectiveChannels, state: AllocationState,
                     cfg: SystemConfig, profile: SchemeProfile = FULL_PROFILE,
                     ts: bool = False) -> np.ndarray:
    """MMSE receive combiners for both UL streams."""
    flags = _flags(profile, ts)
    n_t = state.n_t
    u_new = np.zeros((2, n_t), complex)
    own = (eff.hr3, eff.gt3)
    for l in range(2):
        if not profile.ul_active[l]:
            continue
        rho_own = float(state.rho[l])
        if rho_own == 0.0:
            continue
        cov = ul_covariance(eff, state, cfg, flags, l=l)
        u_new[l] = np.linalg.solve(cov, np.sqrt(rho_own) * own[l])
    return u_new


def update_detectors(eff: EffectiveChannels, state: AllocationState,
                     cfg: SystemConfig, profile: SchemeProfile = FULL_PROFILE,
                     ts: bool = False) -> np.ndarray:
    """MMSE scalar detectors for both DL streams."""
    flags = _flags(profile, ts)
    rows = _dl_rows(eff)
    u_new = np.zeros(2, complex)
    for k in range(2):
        if not profile.dl_active[k]:
            continue
        c = np.dot(rows[k], state.w[k])
        total = abs(c) ** 2 + cfg.sigma2_dl
        if flags.dl_user_interference:
            total += float(state.rho[1 - k]) * abs((eff.gt1, eff.gt2)[k]) ** 2
        if flags.dl_stream_interference:
            total += abs(np.dot(rows[k], state.w[1 - k])) ** 2
        u_new[k] = np.conj(c) / total
    return u_new


def update_weights(eff: EffectiveChannels, state: AllocationState,
                   cfg: SystemConfig, profile: SchemeProfile = FULL_PROFILE,
                   ts: bool = False):
    """Inverse-MSE stream weights."""
    flags = _flags(profile, ts)
    mu_dl = np.ones(2)
    mu_ul = np.ones(2)
    for k in range(2):
        if profile.dl_active[k]:
            e = mse_dl(eff, state, cfg, k, flags)
            if e <= 0:
                raise KernelError(f"DL stream {k} MSE must be positive, got {e}")
            mu_dl[k] = 1.0 / e
    for l in range(2):
        if profile.ul_active[l]:
            e = mse_ul(eff, state, cfg, l, flags)
            if e <= 0:
                raise KernelError(f"UL stream {l} MSE must be positive, got {e}")
            mu_ul[l] = 1.0 / e
    return mu_dl, mu_ul


def wmmse_objective(eff: EffectiveChannels, state: AllocationState,
                    cfg: SystemConfig, profile: SchemeProfile = FULL_PROFILE,
                    ts: bool = False) -> float:
    """Weighted-MSE objective; equals sum(weights) - ln2 * WSR right after
    the receive-side closed-form updates."""
    flags = _flags(profile, ts)
    weights = _stream_weights(cfg, profile, state, ts)
    total = 0.0
    for k in range(2):
        if profile.dl_active[k]:
            e = mse_dl(eff, state, cfg, k, flags)
            mu = float(state.mu_dl[k])
            total += weights[k] * (mu * e - np.log(mu))
    for l in range(2):
        if profile.ul_active[l]:
            e = mse_ul(eff, state, cfg, l, flags)
            mu = float(state.mu_ul[l])
            total += weights[2 + l] * (mu * e - np.log(mu))
    return total


def evaluate_report(eff: EffectiveChannels, state: AllocationState,
                    cfg: SystemConfig, profile: SchemeProfile = FULL_PROFILE,
                    ts: bool = False) -> RateReport:
    if ts:
        return rates_ts(eff, state, cfg)
    return sinr_and_rates_fd(eff, state, cfg, profile.flags, profile.prelog)


def initial_allocation(eff: EffectiveChannels, cfg: SystemConfig,
                       profile: SchemeProfile = FULL_PROFILE,
                       tau=None) -> AllocationState:
    """Matched-filter beamformers at an equal conservative power split,
    half-budget UL powers, then one round of receive-side updates."""
    n_t = cfg.n_t
    ts = tau is not None
    w = np.zeros((2, n_t), complex)
    rows = _dl_rows(eff)
    for k in range(2):
        if profile.dl_active[k]:
            norm = float(np.linalg.norm(rows[k]))
            if norm > 0:
                w[k] = np.sqrt(cfg.p_max_bs / (2.0 * n_t)) * rows[k].conj() / norm
    rho = np.array([cfg.p_max_ul / 2.0 if profile.ul_active[l] else 0.0
                    for l in range(2)])
    state = AllocationState(w=w, rho=rho, u_comb=np.zeros((2, n_t), complex),
                            u_det=np.zeros(2, complex), mu_dl=np.ones(2),
                            mu_ul=np.ones(2),
                            tau=None if tau is None else np.asarray(tau, float))
    state = replace(state, u_comb=update_combiners(eff, state, cfg, profile, ts))
    state = replace(state, u_det=update_detectors(eff, state, cfg, profile, ts))
    mu_dl, mu_ul = update_weights(eff, state, cfg, profile, ts)
    return replace(state, mu_dl=mu_dl, mu_ul=mu_ul)


def run_wmmse(eff: EffectiveChannels, state: AllocationState, cfg: SystemConfig,
              profile: SchemeProfile = FULL_PROFILE, ts: bool = False,
              eps: float | None = None):
    """Alternate the block updates until the WSR change drops below eps
    (cfg.eps1 when not given).

    Returns (state, trace, converged) where trace lists (iteration, wsr).

    The receive side is retuned once up front: combiners, detectors and
    weights carried over from another surface start the objective above
    its rate-tight value, and a single descent round from there can end
    below the incoming rate.  Refreshing them first removes that dip and
    keeps every recorded step non-decreasing; on an already consistent
    state the refresh changes nothing.
    """
    state = replace(state, u_comb=update_combiners(eff, state, cfg, profile, ts))
    state = replace(state, u_det=update_detectors(eff, state, cfg, profile, ts))
    mu_dl, mu_ul = update_weights(eff, state, cfg, profile, ts)
    state = replace(state, mu_dl=mu_dl, mu_ul=mu_ul)
    wsr_prev = evaluate_report(eff, state, cfg, profile, ts).wsr
    trace = []
    converged = False
    for it in range(1, cfg.max_inner + 1):
        state = replace(state, w=update_beamformers(eff, state, cfg, profile, ts))
        state = replace(state, rho=update_ul_powers(eff, state, cfg, profile, ts))
        state = replace(state, u_comb=update_combiners(eff, state, cfg, profile, ts))
        state = replace(state, u_det=update_detectors(eff, state, cfg, profile, ts))
        mu_dl, mu_ul = update_weights(eff, state, cfg, profile, ts)
        state = replace(state, mu_dl=mu_dl, mu_ul=mu_ul)
        wsr = evaluate_report(eff, state, cfg, profile, ts).wsr
        trace.append((it, wsr))
        if abs(wsr - wsr_prev) < (cfg.eps1 if eps is None else eps):
            converged = True
            break
        wsr_prev = wsr
    return state, trace, converged
