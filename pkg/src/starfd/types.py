"""Shared value types: channels, surface coefficients, allocation state, reports.

Array-holding types copy their inputs and mark them read-only, so a value
cannot change after construction.  Constructors validate shapes and the
cheap structural invariants; power-budget checks need a SystemConfig and
live in :func:`check_power_feasible`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import SystemConfig

__all__ = [
    "ES", "MS", "TS", "EQUAL_ES", "CONVENTIONAL_RIS", "NONE", "PROTOCOLS",
    "PAIR_TOL",
    "TermFlags", "FULL_FLAGS", "NO_INTERFERENCE_FLAGS", "UPPER_BOUND_FLAGS",
    "SchemeProfile",
    "ChannelSet", "StarCoefficients", "AllocationState", "EffectiveChannels",
    "RateReport", "check_power_feasible",
    "uniform_es", "unit_ts", "zero_surface", "conventional_split",
]

# Surface operating protocols.
ES = "es"                      # energy splitting
MS = "ms"                      # mode selection (binary amplitudes)
TS = "ts"                      # time switching (unit-modulus modes)
EQUAL_ES = "equal_es"          # energy splitting with amplitudes fixed at 1/sqrt(2)
CONVENTIONAL_RIS = "conventional_ris"  # half the elements reflect-only, half transmit-only
NONE = "none"                  # no surface (coefficients all zero)
PROTOCOLS = frozenset({ES, MS, TS, EQUAL_ES, CONVENTIONAL_RIS, NONE})

PAIR_TOL = 1e-9


def _frozen_array(a, dtype, shape, name):
    arr = np.array(a, dtype=dtype)
    if arr.shape != shape:
        raise ValueError(f"{name}: expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: entries must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TermFlags:
    """Which interference terms enter the SINRs, MSEs, and surrogates.

    All flags on is the full-duplex model.  The genie bound drops the
    UL-on-DL term, the cross term at the BS, and the residual
    self-interference while keeping inter-stream DL interference.  All
    flags off gives the interference-free per-slot model.
    """

    dl_user_interference: bool = True    # UL transmit power leaking onto DL users
    dl_stream_interference: bool = True  # other DL stream at each DL user
    ul_cross_interference: bool = True   # other UL user's signal at the BS combiner
    rsi: bool = True                     # residual self-interference at the BS


FULL_FLAGS = TermFlags()
NO_INTERFERENCE_FLAGS = TermFlags(False, False, False, False)
UPPER_BOUND_FLAGS = TermFlags(dl_user_interference=False,
                              dl_stream_interference=True,
                              ul_cross_interference=False,
                              rsi=False)


@dataclass(frozen=True)
class SchemeProfile:
    """Stream activity and rate accounting for one transmission scheme."""

    flags: TermFlags = FULL_FLAGS
    dl_active: tuple = (True, True)
    ul_active: tuple = (True, True)
    prelog: float = 1.0          # time-sharing factor applied to every rate


@dataclass(frozen=True)
class ChannelSet:
    """One realization of every link in the system.

    Shapes: h_d and h_u are (m, n_t) surface-side matrices whose conjugate
    transposes appear in the effective channels; v_d, v_u, g_d, g_u are
    (m,) surface-user links; f1, f2 are (n_t,) direct BS-user rows; f3 is
    the scalar inter-user link.
    """

    h_d: np.ndarray      # BS -> surface, DL side
    h_u: np.ndarray      # surface -> BS, UL side (stored so h_u^H is n_t x m)
    v_d: np.ndarray      # surface -> U1 (reflection region), DL
    v_u: np.ndarray      # U1 -> surface, UL
    g_d: np.ndarray      # surface -> U2 (transmission region), DL
    g_u: np.ndarray      # U2 -> surface, UL
    f1: np.ndarray       # BS -> U1 direct
    f2: np.ndarray       # BS -> U2 direct
    f3: complex          # U1 -> U2 direct
    m: int
    n_t: int

    def __post_init__(self):
        m, n_t = self.m, self.n_t
        object.__setattr__(self, "h_d", _frozen_array(self.h_d, complex, (m, n_t), "h_d"))
        object.__setattr__(self, "h_u", _frozen_array(self.h_u, complex, (m, n_t), "h_u"))
        for name in ("v_d", "v_u", "g_d", "g_u"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), complex, (m,), name))
        for name in ("f1", "f2"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), complex, (n_t,), name))
        f3 = complex(self.f3)
        if not np.isfinite(f3):
            raise ValueError("f3: must be finite")
        object.__setattr__(self, "f3", f3)


@dataclass(frozen=True)
class StarCoefficients:
    """Transmit and reflect coefficient vectors plus the protocol tag.

    For every protocol but TS each element's pair obeys
    |q_t|^2 + |q_r|^2 <= 1; TS constrains each mode separately to the
    unit disc because its modes never transmit simultaneously.
    """

    q_t: np.ndarray
    q_r: np.ndarray
    protocol: str = ES

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        q_t = np.array(self.q_t, dtype=complex)
        q_r = np.array(self.q_r, dtype=complex)
        if q_t.ndim != 1 or q_t.shape != q_r.shape:
            raise ValueError("q_t and q_r must be 1-D with equal length")
        if not (np.all(np.isfinite(q_t)) and np.all(np.isfinite(q_r))):
            raise ValueError("surface coefficients must be finite")
        if self.protocol == TS:
            if np.any(np.abs(q_t) ** 2 > 1.0 + PAIR_TOL) or np.any(np.abs(q_r) ** 2 > 1.0 + PAIR_TOL):
                raise ValueError("TS coefficients must lie in the unit disc per mode")
        else:
            if np.any(np.abs(q_t) ** 2 + np.abs(q_r) ** 2 > 1.0 + PAIR_TOL):
                raise ValueError("per-element energy |q_t|^2 + |q_r|^2 must not exceed 1")
        q_t.setflags(write=False)
        q_r.setflags(write=False)
        object.__setattr__(self, "q_t", q_t)
        object.__setattr__(self, "q_r", q_r)

    @property
    def m(self) -> int:
        return self.q_t.shape[0]

    def check_binary(self, tol: float = 1e-3) -> None:
        """Mode-selection output check: amplitudes binary, one mode on per element."""
        beta_t = np.abs(self.q_t) ** 2
        beta_r = np.abs(self.q_r) ** 2
        for beta in (beta_t, beta_r):
            off = np.minimum(np.abs(beta), np.abs(beta - 1.0))
            if np.any(off > tol):
                raise ValueError(f"amplitudes not binary within {tol}")
        if np.any(np.abs(beta_t + beta_r - 1.0) > tol):
            raise ValueError("each element must activate exactly one mode")


def uniform_es(m: int, phase_t=0.0, phase_r=0.0, protocol: str = ES) -> StarCoefficients:
    amp = 1.0 / np.sqrt(2.0)
    q_t = amp * np.exp(1j * (phase_t + np.zeros(m)))
    q_r = amp * np.exp(1j * (phase_r + np.zeros(m)))
    return StarCoefficients(q_t, q_r, protocol)


def unit_ts(m: int) -> StarCoefficients:
    return StarCoefficients(np.ones(m, complex), np.ones(m, complex), TS)


def zero_surface(m: int) -> StarCoefficients:
    return StarCoefficients(np.zeros(m, complex), np.zeros(m, complex), NONE)


def conventional_split(m: int) -> StarCoefficients:
    """First half reflect-only at full amplitude, second half transmit-only."""
    if m % 2 != 0:
        raise ValueError("conventional split needs an even element count")
    q_t = np.zeros(m, complex)
    q_r = np.zeros(m, complex)
    q_r[: m // 2] = 1.0
    q_t[m // 2:] = 1.0
    return StarCoefficients(q_t, q_r, CONVENTIONAL_RIS)


@dataclass(frozen=True)
class AllocationState:
    """Beamformers, UL powers, receivers, and WMMSE weights.

    tau is None for full-duplex operation; for TS it holds the four time
    fractions (dl1, dl2, ul1, ul2) summing to one.
    """

    w: np.ndarray          # (2, n_t) DL beamformers
    rho: np.ndarray        # (2,) UL transmit powers, W
    u_comb: np.ndarray     # (2, n_t) BS receive combiners
    u_det: np.ndarray      # (2,) scalar DL detectors
    mu_dl: np.ndarray      # (2,) positive DL stream weights
    mu_ul: np.ndarray      # (2,) positive UL stream weights
    tau: np.ndarray | None = None

    def __post_init__(self):
        n_t = np.asarray(self.w).shape[-1]
        object.__setattr__(self, "w", _frozen_array(self.w, complex, (2, n_t), "w"))
        object.__setattr__(self, "u_comb", _frozen_array(self.u_comb, complex, (2, n_t), "u_comb"))
        object.__setattr__(self, "u_det", _frozen_array(self.u_det, complex, (2,), "u_det"))
        rho = _frozen_array(self.rho, float, (2,), "rho")
        if np.any(rho < 0):
            raise ValueError("rho: UL powers must be nonnegative")
        object.__setattr__(self, "rho", rho)
        for name in ("mu_dl", "mu_ul"):
            mu = _frozen_array(getattr(self, name), float, (2,), name)
            if np.any(mu <= 0):
                raise ValueError(f"{name}: stream weights must be positive")
            object.__setattr__(self, name, mu)
        if self.tau is not None:
            tau = _frozen_array(self.tau, float, (4,), "tau")
            if np.any(tau < -PAIR_TOL) or np.any(tau > 1.0 + PAIR_TOL):
                raise ValueError("tau: fractions must lie in [0, 1]")
            if abs(float(np.sum(tau)) - 1.0) > PAIR_TOL:
                raise ValueError("tau: fractions must sum to 1")
            object.__setattr__(self, "tau", tau)

    @property
    def n_t(self) -> int:
        return self.w.shape[1]


def check_power_feasible(state: AllocationState, cfg: SystemConfig, ts: bool = False) -> None:
    """Raise when a power budget is violated beyond tolerance.

    Full duplex: total beamformer power <= p_max_bs, each rho <= p_max_ul.
    TS: slot-weighted beamformer power and slot-weighted UL energies obey
    the same budgets.
    """
    slack = 1.0 + PAIR_TOL
    w_pow = np.sum(np.abs(state.w) ** 2, axis=1)
    if ts:
        if state.tau is None:
            raise ValueError("TS feasibility check needs time fractions")
        tau = state.tau
        if float(tau[0] * w_pow[0] + tau[1] * w_pow[1]) > cfg.p_max_bs * slack:
            raise ValueError("slot-weighted beamformer power exceeds the BS budget")
        if float(tau[2] * state.rho[0]) > cfg.p_max_ul * slack or \
           float(tau[3] * state.rho[1]) > cfg.p_max_ul * slack:
            raise ValueError("slot-weighted UL power exceeds the per-user budget")
    else:
        if float(np.sum(w_pow)) > cfg.p_max_bs * slack:
            raise ValueError("beamformer power exceeds the BS budget")
        if np.any(state.rho > cfg.p_max_ul * slack):
            raise ValueError("UL power exceeds the per-user budget")


@dataclass(frozen=True)
class EffectiveChannels:
    """Surface-dependent effective links plus surface-independent composites.

    hr1, hr2 are the (n_t,) DL rows; gt1, gt2 the scalar cross links;
    hr3, gt3 the (n_t,) UL columns.  c1..c6 are composite vectors such
    that, e.g., hr1 = q_r @ c1 + f1 and hr3 = c5 @ q_r + conj(f1).
    """

    hr1: np.ndarray
    hr2: np.ndarray
    gt1: complex
    gt2: complex
    hr3: np.ndarray
    gt3: np.ndarray
    c1: np.ndarray       # (m, n_t)
    c2: np.ndarray       # (m,)
    c3: np.ndarray       # (m, n_t)
    c4: np.ndarray       # (m,)
    c5: np.ndarray       # (n_t, m)
    c6: np.ndarray       # (n_t, m)

    def __post_init__(self):
        m, n_t = self.c1.shape
        object.__setattr__(self, "hr1", _frozen_array(self.hr1, complex, (n_t,), "hr1"))
        object.__setattr__(self, "hr2", _frozen_array(self.hr2, complex, (n_t,), "hr2"))
        object.__setattr__(self, "hr3", _frozen_array(self.hr3, complex, (n_t,), "hr3"))
        object.__setattr__(self, "gt3", _frozen_array(self.gt3, complex, (n_t,), "gt3"))
        object.__setattr__(self, "c1", _frozen_array(self.c1, complex, (m, n_t), "c1"))
        object.__setattr__(self, "c2", _frozen_array(self.c2, complex, (m,), "c2"))
        object.__setattr__(self, "c3", _frozen_array(self.c3, complex, (m, n_t), "c3"))
        object.__setattr__(self, "c4", _frozen_array(self.c4, complex, (m,), "c4"))
        object.__setattr__(self, "c5", _frozen_array(self.c5, complex, (n_t, m), "c5"))
        object.__setattr__(self, "c6", _frozen_array(self.c6, complex, (n_t, m), "c6"))
        object.__setattr__(self, "gt1", complex(self.gt1))
        object.__setattr__(self, "gt2", complex(self.gt2))


@dataclass(frozen=True)
class RateReport:
    """Per-user SINRs and rates, aggregates, and the outer iteration trace.

    prelog holds the per-stream time factors (dl1, dl2, ul1, ul2): ones
    for full duplex, 0.5 for half-duplex baselines, the time fractions
    for TS.  Rates are prelog * log2(1 + sinr); wsr is the alpha-weighted
    sum of the DL and UL totals, in bits per channel use.
    """

    dl_sinr: np.ndarray
    ul_sinr: np.ndarray
    dl_rates: np.ndarray
    ul_rates: np.ndarray
    dl_sum: float
    ul_sum: float
    wsr: float
    prelog: np.ndarray
    alpha1: float
    alpha2: float
    trace: tuple = ()
    converged: bool = True

    def __post_init__(self):
        for name in ("dl_sinr", "ul_sinr", "dl_rates", "ul_rates"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), float, (2,), name))
        object.__setattr__(self, "prelog", _frozen_array(self.prelog, float, (4,), "prelog"))
        if np.any(self.dl_sinr < 0) or np.any(self.ul_sinr < 0):
            raise ValueError("SINRs must be nonnegative")
        expect_dl = self.prelog[:2] * np.log2(1.0 + self.dl_sinr)
        expect_ul = self.prelog[2:] * np.log2(1.0 + self.ul_sinr)
        tol = 1e-12
        if np.any(np.abs(expect_dl - self.dl_rates) > tol * (1.0 + np.abs(expect_dl))) or \
           np.any(np.abs(expect_ul - self.ul_rates) > tol * (1.0 + np.abs(expect_ul))):
            raise ValueError("rates are inconsistent with the stored SINRs")
        if abs(self.dl_sum - float(np.sum(self.dl_rates))) > tol * (1.0 + abs(self.dl_sum)):
            raise ValueError("dl_sum does not match the DL rates")
        if abs(self.ul_sum - float(np.sum(self.ul_rates))) > tol * (1.0 + abs(self.ul_sum)):
            raise ValueError("ul_sum does not match the UL rates")
        expect_wsr = self.alpha1 * self.dl_sum + self.alpha2 * self.ul_sum
        if abs(self.wsr - expect_wsr) > tol * (1.0 + abs(expect_wsr)):
            raise ValueError("wsr does not match the weighted rate sums")
        object.__setattr__(self, "trace", tuple((int(i), float(v)) for i, v in self.trace))

    def with_trace(self, trace, converged: bool) -> "RateReport":
        return replace(self, trace=tuple(trace), converged=bool(converged))
