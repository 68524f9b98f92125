"""Concave lower bounds on the stream rates as functions of (q_t, q_r).

Each stream rate log2(1 + |chi|^2 / zeta) has chi affine in the surface
coefficients and zeta a convex quadratic (interference plus noise).  The
bound linearizes around an expansion point and is tight there:

    ln(1 + g~) - g~ + 2 Re{conj(chi~) chi} / zeta~
        - g~ / (zeta~ + |chi~|^2) * (|chi|^2 + zeta),   g~ = |chi~|^2 / zeta~

Values are in bits per channel use; the TS variant multiplies by the
stream's time fraction and has a constant zeta (no co-channel terms).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .rates import LN2, effective_channels
from .types import (AllocationState, ChannelSet, StarCoefficients, TermFlags,
                    FULL_FLAGS)

__all__ = [
    "StreamBound", "SurrogateExpansion", "build_expansion",
    "surrogate_lower_bound", "surrogate_objective", "surrogate_gradient",
    "true_wsr_of_surface",
]


@dataclass(frozen=True)
class StreamBound:
    """One stream's linearized rate bound around a fixed expansion point."""

    alpha: float                 # WSR weight of this stream
    prelog: float                # time factor (1 for FD, tau for TS)
    chi_t: np.ndarray | None     # chi = chi_c + chi_t @ q_t + chi_r @ q_r
    chi_r: np.ndarray | None
    chi_c: complex
    terms: tuple                 # ((weight, coef_t, coef_r, const), ...) for zeta
    noise: float                 # constant part of zeta
    chi_ref: complex
    zeta_ref: float
    active: bool = True

    def chi(self, q_t, q_r) -> complex:
        v = self.chi_c
        if self.chi_t is not None:
            v = v + np.dot(self.chi_t, q_t)
        if self.chi_r is not None:
            v = v + np.dot(self.chi_r, q_r)
        return v

    def zeta(self, q_t, q_r) -> float:
        v = self.noise
        for weight, ct, cr, c0 in self.terms:
            a = c0
            if ct is not None:
                a = a + np.dot(ct, q_t)
            if cr is not None:
                a = a + np.dot(cr, q_r)
            v += weight * abs(a) ** 2
        return v

    def value(self, q_t, q_r) -> float:
        """Bound in bpcu, prelog included."""
        if not self.active:
            return 0.0
        gr = abs(self.chi_ref) ** 2 / self.zeta_ref
        chi = self.chi(q_t, q_r)
        zeta = self.zeta(q_t, q_r)
        ccoef = gr / (self.zeta_ref + abs(self.chi_ref) ** 2)
        core = (np.log(1.0 + gr) - gr
                + 2.0 * (np.conj(self.chi_ref) * chi).real / self.zeta_ref
                - ccoef * (abs(chi) ** 2 + zeta))
        return self.prelog * core / LN2

    def true_rate(self, q_t, q_r) -> float:
        """The rate the bound approximates, at the same (q_t, q_r)."""
        if not self.active:
            return 0.0
        chi = self.chi(q_t, q_r)
        zeta = self.zeta(q_t, q_r)
        return self.prelog * np.log1p(abs(chi) ** 2 / zeta) / LN2

    def add_gradient(self, q_t, q_r, g_t, g_r) -> None:
        """Accumulate the Wirtinger gradient d(value)/d(conj q) in place."""
        if not self.active:
            return
        gr = abs(self.chi_ref) ** 2 / self.zeta_ref
        ccoef = gr / (self.zeta_ref + abs(self.chi_ref) ** 2)
        factor = self.prelog / LN2
        chi = self.chi(q_t, q_r)
        lead = factor * (self.chi_ref / self.zeta_ref - ccoef * chi)
        if self.chi_t is not None:
            g_t += lead * self.chi_t.conj()
        if self.chi_r is not None:
            g_r += lead * self.chi_r.conj()
        for weight, ct, cr, c0 in self.terms:
            a = c0
            if ct is not None:
                a = a + np.dot(ct, q_t)
            if cr is not None:
                a = a + np.dot(cr, q_r)
            scale = -factor * ccoef * weight * a
            if ct is not None:
                g_t += scale * ct.conj()
            if cr is not None:
                g_r += scale * cr.conj()


@dataclass(frozen=True)
class SurrogateExpansion:
    """Per-stream bounds sharing one expansion point."""

    streams: tuple               # four StreamBound entries: dl1, dl2, ul1, ul2
    q_t_ref: np.ndarray
    q_r_ref: np.ndarray
    m: int


def build_expansion(ch: ChannelSet, star: StarCoefficients,
                    state: AllocationState, cfg: SystemConfig, *,
                    flags: TermFlags = FULL_FLAGS,
                    active=(True, True, True, True),
                    tau=None) -> SurrogateExpansion:
    """Linearize the four stream rates around the surface state in ``star``.

    ``tau`` switches to the interference-free TS bounds with per-stream
    time factors; ``active`` drops streams that carry no data.
    """
    eff = effective_channels(ch, star)
    q_t, q_r = star.q_t, star.q_r
    w1, w2 = state.w[0], state.w[1]
    rho1, rho2 = float(state.rho[0]), float(state.rho[1])
    p1, p2 = np.sqrt(rho1), np.sqrt(rho2)
    # The UL ratios are invariant to combiner scale, and a collapsing
    # power drags ||U_l|| toward zero with it; unit combiners keep every
    # zeta_ref at or above the noise floor instead of underflowing.
    norm1 = float(np.linalg.norm(state.u_comb[0]))
    norm2 = float(np.linalg.norm(state.u_comb[1]))
    u1c = state.u_comb[0].conj() / norm1 if norm1 > 0.0 else np.zeros(cfg.n_t, complex)
    u2c = state.u_comb[1].conj() / norm2 if norm2 > 0.0 else np.zeros(cfg.n_t, complex)
    nu1 = 1.0 if norm1 > 0.0 else 0.0
    nu2 = 1.0 if norm2 > 0.0 else 0.0
    total_w = float(np.sum(np.abs(state.w) ** 2))
    ts = tau is not None
    prelog = np.asarray(tau, float) if ts else np.ones(4)
    alphas = (cfg.alpha1, cfg.alpha1, cfg.alpha2, cfg.alpha2)

    rsi1 = cfg.sigma2_rsi * nu1 * total_w
    rsi2 = cfg.sigma2_rsi * nu2 * total_w

    chi_defs = [
        (None, eff.c1 @ w1, complex(np.dot(ch.f1, w1))),
        (eff.c3 @ w2, None, complex(np.dot(ch.f2, w2))),
        (None, p1 * (u1c @ eff.c5), complex(p1 * np.dot(u1c, ch.f1.conj()))),
        (p2 * (u2c @ eff.c6), None, complex(p2 * np.dot(u2c, ch.f2.conj()))),
    ]

    term_defs: list = [[], [], [], []]
    noise = [cfg.sigma2_dl, cfg.sigma2_dl,
             nu1 * cfg.sigma2_ul, nu2 * cfg.sigma2_ul]
    if not ts:
        if flags.dl_user_interference:
            term_defs[0].append((rho2, eff.c2, None, complex(ch.f3)))
            term_defs[1].append((rho1, eff.c4, None, complex(ch.f3)))
        if flags.dl_stream_interference:
            term_defs[0].append((1.0, None, eff.c1 @ w2, complex(np.dot(ch.f1, w2))))
            term_defs[1].append((1.0, eff.c3 @ w1, None, complex(np.dot(ch.f2, w1))))
        if flags.ul_cross_interference:
            term_defs[2].append((rho2, u1c @ eff.c6, None, complex(np.dot(u1c, ch.f2.conj()))))
            term_defs[3].append((rho1, None, u2c @ eff.c5, complex(np.dot(u2c, ch.f1.conj()))))
        if flags.rsi:
            noise[2] += rsi1
            noise[3] += rsi2

    streams = []
    for s in range(4):
        ct, cr, cc = chi_defs[s]
        bound = StreamBound(alpha=alphas[s], prelog=float(prelog[s]),
                            chi_t=ct, chi_r=cr, chi_c=cc,
                            terms=tuple(term_defs[s]), noise=noise[s],
                            chi_ref=0.0, zeta_ref=1.0, active=False)
        zeta_ref = bound.zeta(q_t, q_r)
        is_active = bool(active[s]) and zeta_ref > 0.0
        streams.append(StreamBound(
            alpha=alphas[s], prelog=float(prelog[s]),
            chi_t=ct, chi_r=cr, chi_c=cc,
            terms=tuple(term_defs[s]), noise=noise[s],
            chi_ref=bound.chi(q_t, q_r) if is_active else 0.0,
            zeta_ref=zeta_ref if is_active else 1.0,
            active=is_active))
    return SurrogateExpansion(streams=tuple(streams),
                              q_t_ref=q_t.copy(), q_r_ref=q_r.copy(), m=star.m)


def surrogate_lower_bound(exp: SurrogateExpansion, q_t, q_r, stream: int) -> float:
    """Bound for one stream at (q_t, q_r), in bpcu."""
    return exp.streams[stream].value(np.asarray(q_t), np.asarray(q_r))


def surrogate_objective(exp: SurrogateExpansion, x: np.ndarray) -> float:
    """Weighted sum of the four bounds; x stacks (q_t, q_r)."""
    m = exp.m
    q_t, q_r = x[:m], x[m:]
    return sum(s.alpha * s.value(q_t, q_r) for s in exp.streams)


def surrogate_gradient(exp: SurrogateExpansion, x: np.ndarray) -> np.ndarray:
    """Wirtinger gradient of the objective with respect to conj(x)."""
    m = exp.m
    q_t, q_r = x[:m], x[m:]
    g_t = np.zeros(m, complex)
    g_r = np.zeros(m, complex)
    for s in exp.streams:
        if s.active:
            gt_s = np.zeros(m, complex)
            gr_s = np.zeros(m, complex)
            s.add_gradient(q_t, q_r, gt_s, gr_s)
            g_t += s.alpha * gt_s
            g_r += s.alpha * gr_s
    return np.concatenate([g_t, g_r])


def true_wsr_of_surface(exp: SurrogateExpansion, x: np.ndarray) -> float:
    """Weighted sum of the true stream rates at x, holding the state fixed."""
    m = exp.m
    q_t, q_r = x[:m], x[m:]
    return sum(s.alpha * s.true_rate(q_t, q_r) for s in exp.streams)
