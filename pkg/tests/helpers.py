"""Shared builders for the test suite: channels, random surfaces, states."""

import numpy as np

from starfd.channel import generate_channel_set, randomized_users
from starfd.config import SystemConfig
from starfd.kernels import project_pair_ball_vec, project_unit_disc
from starfd.rng import Stream
from starfd.types import AllocationState, ChannelSet, StarCoefficients


def convergence_channel(cfg: SystemConfig, seed: int) -> ChannelSet:
    """Channel draw used by the convergence experiment: per-seed user discs."""
    geom = randomized_users(cfg, Stream.from_seed(seed, "positions"))
    return generate_channel_set(geom, cfg, Stream.from_seed(seed, "channel"))


def random_surface(m: int, rng: Stream, protocol: str = "es") -> StarCoefficients:
    if protocol == "ts":
        q_t = project_unit_disc(rng.cnormal(m))
        q_r = project_unit_disc(rng.cnormal(m))
    else:
        q_t, q_r = project_pair_ball_vec(0.7 * rng.cnormal(m),
                                         0.7 * rng.cnormal(m))
    return StarCoefficients(q_t, q_r, protocol)


def random_state(cfg: SystemConfig, rng: Stream, tau=None) -> AllocationState:
    """Feasible random allocation; powers stay inside both budgets."""
    w = rng.cnormal((2, cfg.n_t))
    w = w * np.sqrt(0.9 * cfg.p_max_bs / float(np.sum(np.abs(w) ** 2)))
    return AllocationState(
        w=w,
        rho=cfg.p_max_ul * rng.uniform(2),
        u_comb=rng.cnormal((2, cfg.n_t)),
        u_det=0.3 * rng.cnormal(2),
        mu_dl=0.5 + rng.uniform(2),
        mu_ul=0.5 + rng.uniform(2),
        tau=tau)


def toy_channel(m: int, n_t: int, fill: dict | None = None) -> ChannelSet:
    """All-zero channel set with selected links overridden by name."""
    base = {
        "h_d": np.zeros((m, n_t), complex),
        "h_u": np.zeros((m, n_t), complex),
        "v_d": np.zeros(m, complex),
        "v_u": np.zeros(m, complex),
        "g_d": np.zeros(m, complex),
        "g_u": np.zeros(m, complex),
        "f1": np.zeros(n_t, complex),
        "f2": np.zeros(n_t, complex),
        "f3": 0j,
    }
    if fill:
        base.update(fill)
    return ChannelSet(m=m, n_t=n_t, **base)


def trace_monotone(trace, rel_slack: float = 1e-6) -> bool:
    values = [v for _, v in trace]
    return all(b >= a - rel_slack * max(1.0, abs(a))
               for a, b in zip(values, values[1:]))
