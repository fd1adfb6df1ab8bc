"""
Parameter-grid scans over the trine family and the noisy-Z family.

Every grid point is an independent pair of tester SDPs (measure-and-prepare
and Lüders), so points are farmed out to a process pool and gathered back in
grid order. The worker count is capped by ``LUDERSCOPE_THREADS``.
"""

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import closed_form, qobjects
from .errors import LuderscopeError
from .tester import ADVANTAGE_GUARD, discriminate

log = logging.getLogger(__name__)

CSV_FIELDS = ("axis1", "axis2", "p_meas", "p_inst", "advantage", "gap_meas", "gap_inst")
NOISY_EXTRA_FIELDS = ("p_meas_analytic", "locc_lower")
ROW_TOL = 1e-6
SUCCESS_LEVEL_SPACING = 0.002
TRINE_ADVANTAGE_SPACING = 0.00165
MAX_LEVELS = 2000

DEFAULT_RANGES = {
    "trine": ((0.0, 2 * np.pi), (0.0, np.pi)),
    "noisy": ((0.0, 2 * np.pi), (0.0, 1.0)),
}


@dataclass
class ScanConfig:
    """
    Grid definition. The theta axis is sampled half-open ``[lo, hi)`` (it is
    periodic); the second axis (phi or p) includes both ends.
    """

    family: str
    grid_n: int = 50
    theta_range: tuple = None
    second_axis_range: tuple = None
    mode: str = "both"
    output_path: str = None
    format: str = "csv"
    emit_heatmap: bool = False
    level_spacing: float = None

    def __post_init__(self):
        if self.family not in DEFAULT_RANGES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.mode not in ("measurement", "instrument", "both"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.grid_n < 2:
            raise ValueError("grid_n must be at least 2")
        theta, second = DEFAULT_RANGES[self.family]
        self.theta_range = tuple(self.theta_range or theta)
        self.second_axis_range = tuple(self.second_axis_range or second)
        for lo, hi in (self.theta_range, self.second_axis_range):
            if not lo < hi:
                raise ValueError(f"empty range ({lo}, {hi})")
        if self.family == "noisy":
            lo, hi = self.second_axis_range
            if lo < 0 or hi > 1:
                raise ValueError("noise parameter range must lie in [0, 1]")

    def axes(self):
        theta = np.linspace(*self.theta_range, self.grid_n, endpoint=False)
        second = np.linspace(*self.second_axis_range, self.grid_n)
        return theta, second


@dataclass
class ScanRow:
    axis1: float
    axis2: float
    p_meas: float = None
    p_inst: float = None
    advantage: float = None
    gap_meas: float = None
    gap_inst: float = None
    p_meas_analytic: float = None
    locc_lower: float = None
    flag: str = field(default="", compare=False)


def _pair(family, a1, a2):
    if family == "trine":
        return qobjects.trine_povm(0.0, 0.0), qobjects.trine_povm(a1, a2)
    return qobjects.z_povm(), qobjects.noisy_z_povm(a1, a2)


def scan_point(family, a1, a2, mode="both"):
    """Evaluate one grid point; solver trouble is recorded in ``flag`` instead of raised."""
    row = ScanRow(float(a1), float(a2))
    pair = _pair(family, a1, a2)
    flags = []
    modes = ("measurement", "instrument") if mode == "both" else (mode,)
    for m in modes:
        try:
            _, _, report = discriminate(pair, (0.5, 0.5), m)
        except LuderscopeError as exc:
            flags.append(f"{m}: {exc}")
            continue
        if report.status != "optimal":
            flags.append(f"{m}: {report.status}")
        if m == "measurement":
            row.p_meas, row.gap_meas = report.primal_value, report.gap
        else:
            row.p_inst, row.gap_inst = report.primal_value, report.gap
    if row.p_meas is not None and row.p_inst is not None and 4 * (row.p_meas - 0.5) > ADVANTAGE_GUARD:
        row.advantage = (row.p_inst - 0.5) / (row.p_meas - 0.5)
    if family == "noisy" and a1 == 0.0:
        row.p_meas_analytic = closed_form.noisy_z_measurement_success(a2)
        row.locc_lower = closed_form.noisy_z_sequential_optimum(a2)
    row.flag = "; ".join(flags)
    return row


def _scan_point_args(args):
    return scan_point(*args)


def worker_count():
    cap = os.environ.get("LUDERSCOPE_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def run_scan(cfg, workers=None):
    """Rows in grid order: theta outermost, the second axis innermost."""
    theta, second = cfg.axes()
    tasks = [(cfg.family, float(t), float(s), cfg.mode) for t in theta for s in second]
    workers = worker_count() if workers is None else workers
    if workers <= 1:
        rows = [_scan_point_args(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_scan_point_args, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    for row in rows:
        if row.flag:
            log.warning("point (%g, %g) flagged: %s", row.axis1, row.axis2, row.flag)
    return rows


def run_scan_trine(cfg, workers=None):
    if cfg.family != "trine":
        raise ValueError("run_scan_trine needs family='trine'")
    return run_scan(cfg, workers)


def run_scan_noisy(cfg, workers=None):
    if cfg.family != "noisy":
        raise ValueError("run_scan_noisy needs family='noisy'")
    return run_scan(cfg, workers)


def row_violations(rows, tol=ROW_TOL):
    """Rows breaking ``1/2 <= p_meas <= p_inst <= 1`` (within ``tol``)."""
    bad = []
    for row in rows:
        if row.p_meas is None or row.p_inst is None:
            continue
        if not (0.5 - tol <= row.p_meas <= row.p_inst + tol and row.p_inst <= 1 + tol):
            bad.append(row)
    return bad


def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.9g}"


def _fields(family):
    return CSV_FIELDS + (NOISY_EXTRA_FIELDS if family == "noisy" else ())


def write_csv(rows, path, family):
    fields = _fields(family)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for row in rows:
            w.writerow([_fmt(getattr(row, f)) for f in fields])


def write_json(rows, path, family):
    fields = _fields(family)
    out = [{f: (None if getattr(row, f) is None else float(f"{getattr(row, f):.9g}")) for f in fields} for row in rows]
    with open(path, "w", newline="\n") as fh:
        json.dump(out, fh, indent=1)
        fh.write("\n")


def _grid(rows, metric, cfg):
    theta, second = cfg.axes()
    z = np.full((len(second), len(theta)), np.nan)
    for k, row in enumerate(rows):
        i, j = divmod(k, len(second))
        val = getattr(row, metric)
        if val is not None:
            z[j, i] = val
    return theta, second, z


def write_heatmap(rows, cfg, metric, path, spacing):
    """Banded color map: filled bands every ``spacing`` plus thin black separators."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    theta, second, z = _grid(rows, metric, cfg)
    finite = z[np.isfinite(z)]
    if finite.size == 0:
        return None
    lo = np.floor(finite.min() / spacing) * spacing
    hi = np.ceil(finite.max() / spacing) * spacing + spacing
    n_levels = int(round((hi - lo) / spacing)) + 1
    if n_levels > MAX_LEVELS:
        spacing = (hi - lo) / MAX_LEVELS
        n_levels = MAX_LEVELS + 1
    levels = lo + spacing * np.arange(n_levels)

    plt.rcParams["svg.hashsalt"] = "luderscope"
    fig, ax = plt.subplots(figsize=(6, 4.5))
    masked = np.ma.masked_invalid(z)
    filled = ax.contourf(theta, second, masked, levels=levels, cmap="viridis")
    ax.contour(theta, second, masked, levels=levels, colors="k", linewidths=0.15)
    fig.colorbar(filled, ax=ax, label=metric)
    ax.set_xlabel("theta (rad)")
    ax.set_ylabel("phi (rad)" if cfg.family == "trine" else "p")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def default_spacing(cfg, metric):
    if cfg.level_spacing is not None:
        return cfg.level_spacing
    if metric == "advantage" and cfg.family == "trine":
        return TRINE_ADVANTAGE_SPACING
    return SUCCESS_LEVEL_SPACING


def write_outputs(rows, cfg):
    """Write the table (and heatmaps when requested); returns the written paths."""
    path = Path(cfg.output_path)
    written = []
    if cfg.format == "csv":
        write_csv(rows, path, cfg.family)
    else:
        write_json(rows, path, cfg.family)
    written.append(path)
    if cfg.emit_heatmap:
        metrics = {"measurement": ("p_meas",), "instrument": ("p_inst",)}.get(cfg.mode, ("p_meas", "p_inst", "advantage"))
        for metric in metrics:
            out = path.with_name(f"{path.stem}_{metric}.svg")
            if write_heatmap(rows, cfg, metric, out, default_spacing(cfg, metric)):
                written.append(out)
    return written


def advantage_curve(theta, p_values, workers=None):
    """Rows of ``(p, p_meas, p_inst, advantage, sequential_advantage)`` for Z vs W(theta, p)."""
    tasks = [("noisy", float(theta), float(p), "both") for p in p_values]
    workers = worker_count() if workers is None else workers
    if workers <= 1:
        rows = [_scan_point_args(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_scan_point_args, tasks))
    out = []
    for row in rows:
        seq = None
        if theta == 0.0 and row.axis2 > 0:
            seq = closed_form.noisy_z_sequential_advantage(row.axis2)
        out.append({**asdict(row), "sequential_advantage": seq})
    return out
