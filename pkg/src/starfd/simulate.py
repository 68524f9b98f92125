"""Monte-Carlo simulation of the transmit/receive signal model.

Draws unit-power data symbols, receiver noise, and a fresh self-
interference matrix per sample, forms the received signals directly, and
reports empirical SINRs and MSEs with standard errors.  This is the
independent check for the analytic expressions in :mod:`starfd.rates`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .rates import effective_channels
from .rng import Stream
from .types import AllocationState, ChannelSet, StarCoefficients

__all__ = ["SignalModelEstimate", "simulate_signal_model"]

_SHARD = 1 << 15


@dataclass(frozen=True)
class SignalModelEstimate:
    """Empirical link statistics with standard errors."""

    dl_sinr: np.ndarray       # (2,)
    dl_sinr_se: np.ndarray
    ul_sinr: np.ndarray
    ul_sinr_se: np.ndarray
    dl_mse: np.ndarray
    dl_mse_se: np.ndarray
    ul_mse: np.ndarray
    ul_mse_se: np.ndarray
    dl_signal: np.ndarray     # mean received signal power per DL user
    dl_denom: np.ndarray      # mean interference-plus-noise power per DL user
    ul_signal: np.ndarray
    ul_denom: np.ndarray
    n_samples: int


class _Moments:
    """Running first and second moments of a scalar sequence."""

    def __init__(self):
        self.n = 0
        self.s1 = 0.0
        self.s2 = 0.0

    def add(self, values: np.ndarray):
        self.n += values.size
        self.s1 += float(np.sum(values))
        self.s2 += float(np.sum(values ** 2))

    def mean(self) -> float:
        return self.s1 / self.n

    def se(self) -> float:
        m = self.mean()
        var = max(self.s2 / self.n - m * m, 0.0)
        return np.sqrt(var / self.n)


def _ratio_se(num: _Moments, den: _Moments) -> float:
    """Delta-method standard error of mean(num)/mean(den), independent parts."""
    a, b = num.mean(), den.mean()
    if b <= 0.0:
        return 0.0
    return np.sqrt((num.se() / b) ** 2 + (a * den.se() / b ** 2) ** 2)


def simulate_signal_model(ch: ChannelSet, star: StarCoefficients,
                          state: AllocationState, cfg: SystemConfig,
                          n_samples: int, rng: Stream) -> SignalModelEstimate:
    """Simulate n_samples uses of the channel and measure SINRs and MSEs.

    The self-interference matrix is an i.i.d. CN(0, sigma2_rsi) draw per
    sample; data symbols and noise are CN(0, 1) scaled by their powers.
    Sample counts are processed in fixed-size shards so results depend
    only on (rng, n_samples).
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    eff = effective_channels(ch, star)
    w1, w2 = state.w[0], state.w[1]
    p1, p2 = np.sqrt(float(state.rho[0])), np.sqrt(float(state.rho[1]))
    u_det = state.u_det
    u1c, u2c = state.u_comb[0].conj(), state.u_comb[1].conj()
    n_t = ch.n_t

    # Scalar projections that do not change per sample.
    hw = np.array([[np.dot(eff.hr1, w1), np.dot(eff.hr1, w2)],
                   [np.dot(eff.hr2, w1), np.dot(eff.hr2, w2)]])
    gt = np.array([eff.gt1, eff.gt2])
    uh = np.array([np.dot(u1c, eff.hr3), np.dot(u2c, eff.hr3)])
    ug = np.array([np.dot(u1c, eff.gt3), np.dot(u2c, eff.gt3)])

    dl_sig = [_Moments(), _Moments()]
    dl_den = [_Moments(), _Moments()]
    dl_mse = [_Moments(), _Moments()]
    ul_sig = [_Moments(), _Moments()]
    ul_den = [_Moments(), _Moments()]
    ul_mse = [_Moments(), _Moments()]

    sigma_rsi = np.sqrt(cfg.sigma2_rsi)
    noise_dl = np.sqrt(cfg.sigma2_dl)
    noise_ul = np.sqrt(cfg.sigma2_ul)

    remaining = n_samples
    while remaining > 0:
        ns = min(_SHARD, remaining)
        remaining -= ns
        s = rng.cnormal((ns, 2))          # DL data symbols
        q = rng.cnormal((ns, 2))          # UL data symbols
        n_dl = noise_dl * rng.cnormal((ns, 2))
        n_ul = noise_ul * rng.cnormal((ns, n_t))
        h_si = sigma_rsi * rng.cnormal((ns, n_t, n_t))

        for k in range(2):
            sig = hw[k, k] * s[:, k]
            inter = hw[k, 1 - k] * s[:, 1 - k] \
                + gt[k] * (p2 if k == 0 else p1) * q[:, 1 - k] \
                + n_dl[:, k]
            y = sig + inter
            dl_sig[k].add(np.abs(sig) ** 2)
            dl_den[k].add(np.abs(inter) ** 2)
            dl_mse[k].add(np.abs(u_det[k] * y - s[:, k]) ** 2)

        # BS receive path: transmitted DL vector passes through the fresh
        # self-interference matrix each sample.
        x = s[:, :1] * w1[None, :] + s[:, 1:2] * w2[None, :]
        si = np.einsum("sij,sj->si", h_si, x)
        for l, (uc, own_gain, other_gain) in enumerate(
                ((u1c, uh[0] * p1, ug[0] * p2), (u2c, ug[1] * p2, uh[1] * p1))):
            own_sym = q[:, l]
            other_sym = q[:, 1 - l]
            sig = own_gain * own_sym
            inter = other_gain * other_sym + si @ uc + n_ul @ uc
            ul_sig[l].add(np.abs(sig) ** 2)
            ul_den[l].add(np.abs(inter) ** 2)
            ul_mse[l].add(np.abs(sig + inter - own_sym) ** 2)

    def ratios(sig, den):
        est = np.array([_safe_div(sig[i].mean(), den[i].mean()) for i in range(2)])
        se = np.array([_ratio_se(sig[i], den[i]) for i in range(2)])
        return est, se

    dl_est, dl_se = ratios(dl_sig, dl_den)
    ul_est, ul_se = ratios(ul_sig, ul_den)
    return SignalModelEstimate(
        dl_sinr=dl_est, dl_sinr_se=dl_se,
        ul_sinr=ul_est, ul_sinr_se=ul_se,
        dl_mse=np.array([m.mean() for m in dl_mse]),
        dl_mse_se=np.array([m.se() for m in dl_mse]),
        ul_mse=np.array([m.mean() for m in ul_mse]),
        ul_mse_se=np.array([m.se() for m in ul_mse]),
        dl_signal=np.array([m.mean() for m in dl_sig]),
        dl_denom=np.array([m.mean() for m in dl_den]),
        ul_signal=np.array([m.mean() for m in ul_sig]),
        ul_denom=np.array([m.mean() for m in ul_den]),
        n_samples=n_samples)


def _safe_div(a: float, b: float) -> float:
    return a / b if b > 0.0 else 0.0
