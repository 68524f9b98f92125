"""Weighted sum-rate optimization for a surface-assisted full-duplex link.

A base station serves two downlink users and receives from two uplink
users through a transmissive-reflective surface.  The package provides
the rate model, the WMMSE inner solver, the surface coefficient
optimizers for the three operating protocols, the baseline schemes, and
experiment sweeps with CSV output.
"""

from .config import (ConfigError, SystemConfig, load_config, parse_config_text,
                     validate_config, dbm_to_watt, watt_to_dbm)
from .channel import Geometry, generate_channel_set
from .experiments import (channel_for, run_cell, run_convergence,
                          sweep_elements, sweep_location, sweep_power,
                          write_csv)
from .protocols import (SchemeResult, get_scheme, optimize_scheme,
                        scheme_names)
from .rates import effective_channels, sinr_and_rates_fd, rates_ts
from .rng import Stream
from .types import (AllocationState, ChannelSet, EffectiveChannels, RateReport,
                    SchemeProfile, StarCoefficients, TermFlags,
                    check_power_feasible)
from .wmmse import initial_allocation, run_wmmse

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "SystemConfig", "load_config", "parse_config_text",
    "validate_config", "dbm_to_watt", "watt_to_dbm",
    "Geometry", "generate_channel_set",
    "channel_for", "run_cell", "run_convergence", "sweep_elements",
    "sweep_location", "sweep_power", "write_csv",
    "SchemeResult", "get_scheme", "optimize_scheme", "scheme_names",
    "effective_channels", "sinr_and_rates_fd", "rates_ts",
    "Stream",
    "AllocationState", "ChannelSet", "EffectiveChannels", "RateReport",
    "SchemeProfile", "StarCoefficients", "TermFlags", "check_power_feasible",
    "initial_allocation", "run_wmmse",
    "__version__",
]
