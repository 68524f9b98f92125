"""Experiment sweeps over seeds, element counts, geometry, and power.

Channel draws depend only on (seed, link), never on the scheme or the
swept value, so rows along a sweep axis stay comparable: schemes share
realizations seed by seed, direct links are unaffected by the element
count, and power sweeps reuse identical channels at every point.

Every cell failure becomes a CSV row with an error status instead of
aborting the sweep.  Rows are sorted and numbers written with 12
significant digits so repeated runs produce byte-identical files.
"""

from __future__ import annotations

import csv
from dataclasses import replace

from .channel import Geometry, generate_channel_set, randomized_users
from .config import SystemConfig, dbm_to_watt, validate_config
from .protocols import SchemeResult, optimize_scheme
from .rng import Stream
from .types import ChannelSet

__all__ = [
    "channel_for", "run_cell", "run_convergence", "sweep_elements",
    "sweep_location", "sweep_power", "write_csv",
    "CONVERGENCE_COLUMNS", "SWEEP_COLUMNS",
]

CONVERGENCE_COLUMNS = ("scheme", "seed", "iteration", "wsr", "status")
SWEEP_COLUMNS_TAIL = ("seed", "wsr", "dl_sum", "ul_sum",
                      "outer_iterations", "converged", "status")
SWEEP_COLUMNS = {
    "elements": ("scheme", "m") + SWEEP_COLUMNS_TAIL,
    "location": ("scheme", "ris_x") + SWEEP_COLUMNS_TAIL,
    "power": ("scheme", "pmax_dbm") + SWEEP_COLUMNS_TAIL,
}


def _fmt(value: float) -> str:
    return format(float(value), ".12g")


def channel_for(cfg: SystemConfig, seed: int) -> ChannelSet:
    """One channel realization; draws keyed by (seed, link) only."""
    geom = Geometry.from_config(cfg)
    return generate_channel_set(geom, cfg, Stream.from_seed(seed, "channel"))


def run_cell(cfg: SystemConfig, scheme: str, seed: int,
             grid_step: float = 0.05) -> SchemeResult:
    return optimize_scheme(channel_for(cfg, seed), cfg, scheme, grid_step)


def _sweep_rows(base_cfg: SystemConfig, cell_cfgs, axis_fmt, schemes, seeds,
                grid_step: float):
    """cell_cfgs: sequence of (axis_value, cfg).  Returns sorted rows."""
    rows = []
    for pos, (axis_value, cfg) in enumerate(cell_cfgs):
        for scheme in schemes:
            for seed in seeds:
                head = [scheme, axis_fmt(axis_value), seed]
                sort_key = (scheme, pos, seed)
                try:
                    res = run_cell(cfg, scheme, seed, grid_step)
                except Exception as exc:  # keep the sweep going
                    rows.append((sort_key, head + ["", "", "", "", "",
                                                   f"error: {type(exc).__name__}"]))
                    continue
                rep = res.report
                rows.append((sort_key, head + [
                    _fmt(rep.wsr), _fmt(rep.dl_sum), _fmt(rep.ul_sum),
                    res.outer_iterations,
                    "true" if rep.converged else "false",
                    "ok" if rep.converged else "cap"]))
    rows.sort(key=lambda item: item[0])
    return [row for _, row in rows]


def run_convergence(cfg: SystemConfig, seeds, schemes=("es", "ms", "ts"),
                    grid_step: float = 0.05):
    """Outer-loop WSR trace per scheme and seed.

    Each seed redraws the two user positions uniformly from discs on
    either side of the surface; all schemes share a seed's draw, so
    their traces describe the same scenario.
    """
    rows = []
    for scheme in schemes:
        for seed in seeds:
            geom = randomized_users(cfg, Stream.from_seed(seed, "positions"))
            try:
                ch = generate_channel_set(geom, cfg,
                                          Stream.from_seed(seed, "channel"))
                res = optimize_scheme(ch, cfg, scheme, grid_step)
            except Exception as exc:
                rows.append(((scheme, seed, 0),
                             [scheme, seed, 0, "", f"error: {type(exc).__name__}"]))
                continue
            status = "ok" if res.report.converged else "cap"
            for i, value in res.report.trace:
                rows.append(((scheme, seed, i),
                             [scheme, seed, i, _fmt(value), status]))
    rows.sort(key=lambda item: item[0])
    return CONVERGENCE_COLUMNS, [row for _, row in rows]


def sweep_elements(cfg: SystemConfig, seeds, m_list=(8, 16, 32),
                   schemes=("es", "ms", "ts", "equal_es", "conventional_ris",
                            "no_ris"),
                   grid_step: float = 0.05):
    cells = [(m, validate_config(replace(cfg, m=int(m)))) for m in m_list]
    return SWEEP_COLUMNS["elements"], _sweep_rows(
        cfg, cells, lambda m: int(m), schemes, seeds, grid_step)


def sweep_location(cfg: SystemConfig, seeds, x_list=(40.0, 80.0, 120.0, 160.0, 200.0),
                   schemes=("es", "no_ris"), grid_step: float = 0.05):
    cells = [(x, validate_config(replace(cfg, ris_pos=(float(x), cfg.ris_pos[1]))))
             for x in x_list]
    return SWEEP_COLUMNS["location"], _sweep_rows(
        cfg, cells, _fmt, schemes, seeds, grid_step)


def sweep_power(cfg: SystemConfig, seeds, dbm_list, axis: str = "bs",
                schemes=None, grid_step: float = 0.05):
    """Sweep the BS or the per-user UL power budget, given in dBm."""
    if axis == "bs":
        cells = [(dbm, validate_config(replace(cfg, p_max_bs=dbm_to_watt(dbm))))
                 for dbm in dbm_list]
        schemes = schemes or ("es", "ul_hd")
    elif axis == "ul":
        cells = [(dbm, validate_config(replace(cfg, p_max_ul=dbm_to_watt(dbm))))
                 for dbm in dbm_list]
        schemes = schemes or ("es", "dl_hd")
    else:
        raise ValueError(f"power axis must be 'bs' or 'ul', got {axis!r}")
    return SWEEP_COLUMNS["power"], _sweep_rows(
        cfg, cells, _fmt, schemes, seeds, grid_step)


def write_csv(path: str, columns, rows) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
