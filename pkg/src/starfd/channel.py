"""Geometry, path loss, and small-scale fading for every link.

Surface-side links are Rician with uniformly drawn arrival/departure
angles; direct links are Rayleigh.  Large-scale gain follows
PL_dB = -35.6 - 10 * alpha * log10(d), applied as an amplitude factor
sqrt(10^(PL/10)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, db_to_linear
from .rng import Stream
from .types import ChannelSet

__all__ = [
    "MIN_DISTANCE", "Geometry", "path_loss_db", "path_loss_amplitude",
    "steering_vector", "rician_matrix", "rician_vector", "generate_channel_set",
]

# Below this separation (metres) the large-scale model is meaningless.
MIN_DISTANCE = 1e-3


@dataclass(frozen=True)
class Geometry:
    """2-D node positions in metres."""

    bs: tuple
    ris: tuple
    u1: tuple
    u2: tuple

    def __post_init__(self):
        for name in ("bs", "ris", "u1", "u2"):
            p = tuple(float(c) for c in getattr(self, name))
            if len(p) != 2 or not all(math.isfinite(c) for c in p):
                raise ValueError(f"{name}: position must be a finite 2-D point")
            object.__setattr__(self, name, p)
        names = ("bs", "ris", "u1", "u2")
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                if _dist(getattr(self, a), getattr(self, b)) < MIN_DISTANCE:
                    raise ValueError(f"degenerate geometry: {a} and {b} nearly coincide")

    @classmethod
    def from_config(cls, cfg: SystemConfig) -> "Geometry":
        return cls(cfg.bs_pos, cfg.ris_pos, cfg.u1_pos, cfg.u2_pos)

    def distance(self, a: str, b: str) -> float:
        return _dist(getattr(self, a), getattr(self, b))


def _dist(p, q) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def randomized_users(cfg: SystemConfig, rng: Stream,
                     centers=((120.0, 5.0), (120.0, -5.0)),
                     radius: float = 10.0) -> Geometry:
    """Geometry with each user drawn uniformly from a disc around its centre."""
    points = []
    for cx, cy in centers:
        r = radius * math.sqrt(float(rng.uniform()))
        phi = float(rng.angle())
        points.append((cx + r * math.cos(phi), cy + r * math.sin(phi)))
    return Geometry(cfg.bs_pos, cfg.ris_pos, points[0], points[1])


def path_loss_db(d: float, alpha: float) -> float:
    """Large-scale gain in dB at distance d (m) with exponent alpha."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    return -35.6 - 10.0 * alpha * math.log10(d)


def path_loss_amplitude(d: float, alpha: float) -> float:
    return math.sqrt(db_to_linear(path_loss_db(d, alpha)))


def steering_vector(n: int, theta: float, spacing_ratio: float = 0.5) -> np.ndarray:
    """Uniform linear array response; first entry is exactly 1."""
    idx = np.arange(n)
    return np.exp(2j * np.pi * spacing_ratio * idx * np.sin(theta))


def rician_matrix(rows: int, cols: int, kappa: float, rng: Stream,
                  spacing_ratio: float = 0.5) -> np.ndarray:
    """Rician fading matrix with a rank-one line-of-sight component.

    The LOS part is the outer product of arrival and departure steering
    vectors at angles drawn uniformly on [0, 2*pi); the remainder is
    i.i.d. CN(0, 1).  Every entry has unit mean-square magnitude.
    """
    if kappa < 0:
        raise ValueError(f"Rician factor must be nonnegative, got {kappa}")
    theta_arr = float(rng.angle())
    theta_dep = float(rng.angle())
    los = np.outer(steering_vector(rows, theta_arr, spacing_ratio),
                   steering_vector(cols, theta_dep, spacing_ratio).conj())
    nlos = rng.cnormal((rows, cols))
    return math.sqrt(kappa / (1.0 + kappa)) * los + math.sqrt(1.0 / (1.0 + kappa)) * nlos


def rician_vector(n: int, kappa: float, rng: Stream,
                  spacing_ratio: float = 0.5) -> np.ndarray:
    """Rician fading vector; the LOS part is a single steering vector."""
    if kappa < 0:
        raise ValueError(f"Rician factor must be nonnegative, got {kappa}")
    theta = float(rng.angle())
    los = steering_vector(n, theta, spacing_ratio)
    nlos = rng.cnormal(n)
    return math.sqrt(kappa / (1.0 + kappa)) * los + math.sqrt(1.0 / (1.0 + kappa)) * nlos


def generate_channel_set(geom: Geometry, cfg: SystemConfig, rng: Stream) -> ChannelSet:
    """Draw every link for one realization.

    Each link uses its own labelled child stream, so the direct links do
    not depend on the element count and a given link is reproducible from
    (seed, label) alone.
    """
    kappa = cfg.kappa
    sr = cfg.spacing_ratio
    m, n_t = cfg.m, cfg.n_t

    a_bs_ris = path_loss_amplitude(geom.distance("bs", "ris"), cfg.ple_bs_ris)
    a_ris_u1 = path_loss_amplitude(geom.distance("ris", "u1"), cfg.ple_ris_user)
    a_ris_u2 = path_loss_amplitude(geom.distance("ris", "u2"), cfg.ple_ris_user)
    a_bs_u1 = path_loss_amplitude(geom.distance("bs", "u1"), cfg.ple_bs_user)
    a_bs_u2 = path_loss_amplitude(geom.distance("bs", "u2"), cfg.ple_bs_user)
    a_u1_u2 = path_loss_amplitude(geom.distance("u1", "u2"), cfg.ple_user_user)

    h_d = a_bs_ris * rician_matrix(m, n_t, kappa, rng.child("h_d"), sr)
    h_u = a_bs_ris * rician_matrix(m, n_t, kappa, rng.child("h_u"), sr)
    v_d = a_ris_u1 * rician_vector(m, kappa, rng.child("v_d"), sr)
    v_u = a_ris_u1 * rician_vector(m, kappa, rng.child("v_u"), sr)
    g_d = a_ris_u2 * rician_vector(m, kappa, rng.child("g_d"), sr)
    g_u = a_ris_u2 * rician_vector(m, kappa, rng.child("g_u"), sr)
    f1 = a_bs_u1 * rng.child("f1").cnormal(n_t)
    f2 = a_bs_u2 * rng.child("f2").cnormal(n_t)
    f3 = a_u1_u2 * complex(rng.child("f3").cnormal())
    return ChannelSet(h_d=h_d, h_u=h_u, v_d=v_d, v_u=v_u, g_d=g_d, g_u=g_u,
                      f1=f1, f2=f2, f3=f3, m=m, n_t=n_t)
