"""System configuration: unit conversions, validation, and file parsing.

All powers are stored internally in linear watts and all ratios in linear
scale.  dBm/dB values appear only at the boundary: conversion helpers and
the ``*_dbm`` / ``*_db`` keys of the plain-text config format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

__all__ = [
    "ConfigError",
    "SystemConfig",
    "dbm_to_watt",
    "watt_to_dbm",
    "db_to_linear",
    "linear_to_db",
    "validate_config",
    "parse_config_text",
    "load_config",
]


class ConfigError(ValueError):
    """A configuration value violates its constraints."""


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt: float) -> float:
    if watt <= 0:
        raise ConfigError(f"power must be positive to express in dBm, got {watt}")
    return 30.0 + 10.0 * math.log10(watt)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ConfigError(f"ratio must be positive to express in dB, got {x}")
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class SystemConfig:
    """Scalar system parameters.  Defaults give the desk-scale setup."""

    n_t: int = 4                      # BS antennas
    m: int = 16                       # surface elements
    k_dl: int = 2                     # DL users (fixed)
    l_ul: int = 2                     # UL users (fixed)
    p_max_bs: float = 10.0 ** 0.5     # 35 dBm BS transmit budget, W
    p_max_ul: float = 10.0 ** -1.9    # 11 dBm per-user UL budget, W
    sigma2_dl: float = 1e-13          # -100 dBm DL noise, W
    sigma2_ul: float = 1e-14          # -110 dBm UL noise, W
    sigma2_rsi: float = 10.0 ** -12.5  # -95 dBm residual self-interference gain
    alpha1: float = 0.5               # DL sum-rate weight
    alpha2: float = 0.5               # UL sum-rate weight
    kappa: float = 10.0 ** 0.4        # 4 dB Rician factor, linear
    ple_bs_ris: float = 2.1
    ple_ris_user: float = 2.2
    ple_bs_user: float = 4.0
    ple_user_user: float = 3.1
    bs_pos: tuple = (0.0, 0.0)        # metres
    ris_pos: tuple = (120.0, 0.0)
    u1_pos: tuple = (120.0, 20.0)     # reflection-side user
    u2_pos: tuple = (120.0, -20.0)    # transmission-side user
    spacing_ratio: float = 0.5        # antenna spacing over wavelength
    eps1: float = 1e-3                # WMMSE loop tolerance (absolute WSR delta)
    eps2: float = 1e-3                # inner surrogate loop tolerance (relative)
    eps3: float = 1e-4                # outer loop tolerance / binarity target
    eps4: float = 1e-3                # extra outer tolerance for the mode-selection loop
    mu0: float = 1e-2                 # initial penalty weight
    omega: float = 10.0               # penalty growth factor, > 1
    max_outer: int = 50               # cap on outer alternation iterations
    max_inner: int = 500              # cap on WMMSE iterations
    seed: int = 1

    def noise_dl_dbm(self) -> float:
        return watt_to_dbm(self.sigma2_dl)

    def noise_ul_dbm(self) -> float:
        return watt_to_dbm(self.sigma2_ul)


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Check every field; raise ConfigError naming the first violation."""
    if cfg.n_t < 1:
        raise ConfigError(f"n_t: antenna count must be >= 1, got {cfg.n_t}")
    if cfg.m < 1:
        raise ConfigError(f"m: element count must be >= 1, got {cfg.m}")
    if cfg.k_dl != 2 or cfg.l_ul != 2:
        raise ConfigError("k_dl/l_ul: only the two-DL, two-UL configuration is supported")
    for name in ("p_max_bs", "p_max_ul", "sigma2_dl", "sigma2_ul", "sigma2_rsi", "kappa"):
        value = getattr(cfg, name)
        if not (value > 0) or not math.isfinite(value):
            raise ConfigError(f"{name}: must be strictly positive, got {value}")
    if cfg.alpha1 < 0 or cfg.alpha2 < 0:
        raise ConfigError(f"alpha1/alpha2: weights must be nonnegative, got {cfg.alpha1}, {cfg.alpha2}")
    if cfg.alpha1 == 0 and cfg.alpha2 == 0:
        raise ConfigError("alpha1/alpha2: weights both zero")
    for name in ("ple_bs_ris", "ple_ris_user", "ple_bs_user", "ple_user_user"):
        if getattr(cfg, name) <= 0:
            raise ConfigError(f"{name}: path-loss exponent must be positive")
    for name in ("bs_pos", "ris_pos", "u1_pos", "u2_pos"):
        pos = getattr(cfg, name)
        if len(pos) != 2 or not all(math.isfinite(float(c)) for c in pos):
            raise ConfigError(f"{name}: must be a finite 2-D coordinate")
    if not (cfg.spacing_ratio > 0):
        raise ConfigError(f"spacing_ratio: must be positive, got {cfg.spacing_ratio}")
    for name in ("eps1", "eps2", "eps3", "eps4"):
        if not (getattr(cfg, name) > 0):
            raise ConfigError(f"{name}: tolerance must be strictly positive")
    if not (cfg.mu0 > 0):
        raise ConfigError(f"mu0: initial penalty must be positive, got {cfg.mu0}")
    if not (cfg.omega > 1):
        raise ConfigError(f"omega: penalty growth must exceed 1, got {cfg.omega}")
    if cfg.max_outer < 1 or cfg.max_inner < 1:
        raise ConfigError("max_outer/max_inner: iteration caps must be >= 1")
    if cfg.seed < 0:
        raise ConfigError(f"seed: must be nonnegative, got {cfg.seed}")
    return cfg


# File keys -> (config field, converter).  Geometry coordinates are
# assembled into position tuples after parsing.
_INT_KEYS = {"nt": "n_t", "m": "m", "max_outer": "max_outer",
             "max_inner": "max_inner", "seed": "seed"}
_DBM_KEYS = {"pmax_bs_dbm": "p_max_bs", "pmax_ul_dbm": "p_max_ul",
             "noise_dl_dbm": "sigma2_dl", "noise_ul_dbm": "sigma2_ul",
             "rsi_dbm": "sigma2_rsi"}
_DB_KEYS = {"rician_db": "kappa"}
_FLOAT_KEYS = {"alpha1": "alpha1", "alpha2": "alpha2",
               "ple_bs_ris": "ple_bs_ris", "ple_ris_user": "ple_ris_user",
               "ple_bs_user": "ple_bs_user", "ple_user_user": "ple_user_user",
               "eps1": "eps1", "eps2": "eps2", "eps3": "eps3", "eps4": "eps4",
               "mu0": "mu0", "omega": "omega"}
_COORD_KEYS = {"bs_x": ("bs_pos", 0), "bs_y": ("bs_pos", 1),
               "ris_x": ("ris_pos", 0), "ris_y": ("ris_pos", 1),
               "u1_x": ("u1_pos", 0), "u1_y": ("u1_pos", 1),
               "u2_x": ("u2_pos", 0), "u2_y": ("u2_pos", 1)}


def parse_config_text(text: str, base: SystemConfig | None = None) -> SystemConfig:
    """Parse "key = value" lines ('#' starts a comment) into a SystemConfig.

    Unknown keys and malformed lines raise ConfigError.  Keys not present
    keep their values from ``base`` (defaults if base is None).
    """
    cfg = base if base is not None else SystemConfig()
    updates: dict = {}
    coords = {"bs_pos": list(cfg.bs_pos), "ris_pos": list(cfg.ris_pos),
              "u1_pos": list(cfg.u1_pos), "u2_pos": list(cfg.u2_pos)}
    coord_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        try:
            if key in _INT_KEYS:
                updates[_INT_KEYS[key]] = int(value)
            elif key in _DBM_KEYS:
                updates[_DBM_KEYS[key]] = dbm_to_watt(float(value))
            elif key in _DB_KEYS:
                updates[_DB_KEYS[key]] = db_to_linear(float(value))
            elif key in _FLOAT_KEYS:
                updates[_FLOAT_KEYS[key]] = float(value)
            elif key in _COORD_KEYS:
                field, idx = _COORD_KEYS[key]
                coords[field][idx] = float(value)
                coord_seen = True
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc
    if coord_seen:
        for field, pair in coords.items():
            updates[field] = tuple(pair)
    return validate_config(replace(cfg, **updates))


def load_config(path: str, base: SystemConfig | None = None) -> SystemConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base=base)
