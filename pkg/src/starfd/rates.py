"""Effective channels, SINRs, achievable rates, and stream MSEs."""

from __future__ import annotations

import numpy as np

from .config import SystemConfig
from .types import (AllocationState, ChannelSet, EffectiveChannels, RateReport,
                    StarCoefficients, TermFlags, FULL_FLAGS)

__all__ = [
    "effective_channels", "sinr_fd", "sinr_and_rates_fd", "rates_ts",
    "mse_dl", "mse_ul", "ul_covariance", "make_report",
]

LN2 = float(np.log(2.0))


def effective_channels(ch: ChannelSet, star: StarCoefficients) -> EffectiveChannels:
    """Combine the physical links with the surface coefficients.

    The composites c1..c6 depend only on the channel set; the effective
    links are linear in (q_t, q_r) through them, e.g. hr1 = q_r @ c1 + f1
    and gt3 = c6 @ q_t + conj(f2).
    """
    q_t, q_r = star.q_t, star.q_r
    c1 = ch.v_d.conj()[:, None] * ch.h_d
    c2 = ch.v_d.conj() * ch.g_u
    c3 = ch.g_d.conj()[:, None] * ch.h_d
    c4 = ch.g_d.conj() * ch.v_u
    hu_h = ch.h_u.conj().T
    c5 = hu_h * ch.v_u[None, :]
    c6 = hu_h * ch.g_u[None, :]
    return EffectiveChannels(
        hr1=q_r @ c1 + ch.f1,
        hr2=q_t @ c3 + ch.f2,
        gt1=complex(q_t @ c2 + ch.f3),
        gt2=complex(q_t @ c4 + ch.f3),
        hr3=c5 @ q_r + ch.f1.conj(),
        gt3=c6 @ q_t + ch.f2.conj(),
        c1=c1, c2=c2, c3=c3, c4=c4, c5=c5, c6=c6)


def _ratio(num: float, den: float) -> float:
    # A zero denominator only occurs with a zero numerator (dead stream).
    return num / den if den > 0.0 else 0.0


def sinr_fd(eff: EffectiveChannels, state: AllocationState, cfg: SystemConfig,
            flags: TermFlags = FULL_FLAGS):
    """Full-duplex SINRs: returns (dl_sinr[2], ul_sinr[2])."""
    w1, w2 = state.w[0], state.w[1]
    rho1, rho2 = float(state.rho[0]), float(state.rho[1])
    total_w = float(np.sum(np.abs(state.w) ** 2))

    s1 = abs(np.dot(eff.hr1, w1)) ** 2
    d1 = cfg.sigma2_dl
    if flags.dl_user_interference:
        d1 += rho2 * abs(eff.gt1) ** 2
    if flags.dl_stream_interference:
        d1 += abs(np.dot(eff.hr1, w2)) ** 2
    s2 = abs(np.dot(eff.hr2, w2)) ** 2
    d2 = cfg.sigma2_dl
    if flags.dl_user_interference:
        d2 += rho1 * abs(eff.gt2) ** 2
    if flags.dl_stream_interference:
        d2 += abs(np.dot(eff.hr2, w1)) ** 2
    dl = np.array([_ratio(s1, d1), _ratio(s2, d2)])

    ul = np.zeros(2)
    for l, (own, other, rho_own, rho_other) in enumerate(
            ((eff.hr3, eff.gt3, rho1, rho2), (eff.gt3, eff.hr3, rho2, rho1))):
        u = state.u_comb[l]
        nu = float(np.sum(np.abs(u) ** 2))
        num = rho_own * abs(np.vdot(u, own)) ** 2
        den = nu * cfg.sigma2_ul
        if flags.ul_cross_interference:
            den += rho_other * abs(np.vdot(u, other)) ** 2
        if flags.rsi:
            den += cfg.sigma2_rsi * nu * total_w
        ul[l] = _ratio(num, den)
    return dl, ul


def sinr_and_rates_fd(eff: EffectiveChannels, state: AllocationState,
                      cfg: SystemConfig, flags: TermFlags = FULL_FLAGS,
                      prelog: float = 1.0) -> RateReport:
    dl, ul = sinr_fd(eff, state, cfg, flags)
    return make_report(dl, ul, prelog * np.ones(4), cfg)


def rates_ts(eff: EffectiveChannels, state: AllocationState,
             cfg: SystemConfig) -> RateReport:
    """Time-switching rates: interference-free slots weighted by tau."""
    if state.tau is None:
        raise ValueError("TS rates need time fractions in the allocation state")
    w1, w2 = state.w[0], state.w[1]
    dl = np.array([
        _ratio(abs(np.dot(eff.hr1, w1)) ** 2, cfg.sigma2_dl),
        _ratio(abs(np.dot(eff.hr2, w2)) ** 2, cfg.sigma2_dl),
    ])
    ul = np.zeros(2)
    for l, (own, rho_own) in enumerate(((eff.hr3, float(state.rho[0])),
                                        (eff.gt3, float(state.rho[1])))):
        u = state.u_comb[l]
        nu = float(np.sum(np.abs(u) ** 2))
        ul[l] = _ratio(rho_own * abs(np.vdot(u, own)) ** 2, nu * cfg.sigma2_ul)
    return make_report(dl, ul, state.tau, cfg)


def make_report(dl_sinr, ul_sinr, prelog, cfg: SystemConfig,
                trace=(), converged: bool = True) -> RateReport:
    dl_sinr = np.asarray(dl_sinr, float)
    ul_sinr = np.asarray(ul_sinr, float)
    prelog = np.asarray(prelog, float)
    dl_rates = prelog[:2] * np.log2(1.0 + dl_sinr)
    ul_rates = prelog[2:] * np.log2(1.0 + ul_sinr)
    dl_sum = float(np.sum(dl_rates))
    ul_sum = float(np.sum(ul_rates))
    return RateReport(
        dl_sinr=dl_sinr, ul_sinr=ul_sinr, dl_rates=dl_rates, ul_rates=ul_rates,
        dl_sum=dl_sum, ul_sum=ul_sum,
        wsr=cfg.alpha1 * dl_sum + cfg.alpha2 * ul_sum,
        prelog=prelog, alpha1=cfg.alpha1, alpha2=cfg.alpha2,
        trace=trace, converged=converged)


def mse_dl(eff: EffectiveChannels, state: AllocationState, cfg: SystemConfig,
           k: int, flags: TermFlags = FULL_FLAGS) -> float:
    """MSE of DL stream k under the scalar detector u_det[k]."""
    w_own = state.w[k]
    w_other = state.w[1 - k]
    rho_other = float(state.rho[1 - k])
    gt = eff.gt1 if k == 0 else eff.gt2
    hr = eff.hr1 if k == 0 else eff.hr2
    u = complex(state.u_det[k])
    total = abs(np.dot(hr, w_own)) ** 2 + cfg.sigma2_dl
    if flags.dl_user_interference:
        total += rho_other * abs(gt) ** 2
    if flags.dl_stream_interference:
        total += abs(np.dot(hr, w_other)) ** 2
    return float(abs(u) ** 2 * total - 2.0 * (u * np.dot(hr, w_own)).real + 1.0)


def ul_covariance(eff: EffectiveChannels, state: AllocationState,
                  cfg: SystemConfig, flags: TermFlags = FULL_FLAGS,
                  l: int | None = None) -> np.ndarray:
    """Received covariance at the BS for the UL streams.

    With the cross term active the covariance is common to both streams;
    without it (genie bound, TS slots) it is per-stream, so l selects
    whose own-signal term to keep.
    """
    rho1, rho2 = float(state.rho[0]), float(state.rho[1])
    n_t = eff.hr3.shape[0]
    noise = cfg.sigma2_ul
    if flags.rsi:
        noise += cfg.sigma2_rsi * float(np.sum(np.abs(state.w) ** 2))
    cov = noise * np.eye(n_t, dtype=complex)
    if flags.ul_cross_interference:
        cov += rho1 * np.outer(eff.hr3, eff.hr3.conj())
        cov += rho2 * np.outer(eff.gt3, eff.gt3.conj())
    else:
        if l is None:
            raise ValueError("per-stream covariance needs a stream index")
        own, rho_own = (eff.hr3, rho1) if l == 0 else (eff.gt3, rho2)
        cov += rho_own * np.outer(own, own.conj())
    return cov


def mse_ul(eff: EffectiveChannels, state: AllocationState, cfg: SystemConfig,
           l: int, flags: TermFlags = FULL_FLAGS) -> float:
    """MSE of UL stream l under the receive combiner u_comb[l]."""
    u = state.u_comb[l]
    own, rho_own = (eff.hr3, float(state.rho[0])) if l == 0 else (eff.gt3, float(state.rho[1]))
    cov = ul_covariance(eff, state, cfg, flags, l=l)
    s = np.sqrt(rho_own) * own
    quad = float(np.real(np.vdot(u, cov @ u)))
    return quad - 2.0 * float(np.real(np.vdot(u, s))) + 1.0
