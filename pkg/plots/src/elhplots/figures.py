"""Figure builders over the solver artifacts.

Every builder is a pure function of its input files: fixed figure
geometry, no timestamps, deterministic rasterization, so identical inputs
give identical image bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .readers import TimeSeries, read_snapshot, read_timeseries

FIGSIZE = (7.0, 4.5)
DPI = 120

FIGURE_KINDS = ("energy", "drift", "order", "snapshot")


@dataclass
class FigureSpec:
    """One figure request: inputs, kind, output path, axis options."""

    inputs: list[str]
    kind: str
    output: str
    yscale: str = "linear"  # linear | log (time-series figures only)

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"kind must be one of {FIGURE_KINDS}, got {self.kind!r}")
        if self.yscale not in ("linear", "log"):
            raise ValueError("yscale must be linear or log")
        if not self.inputs:
            raise ValueError("at least one input path is required")

    def render(self) -> float | None:
        """Build the figure; the order kind returns the fitted slope."""
        if self.kind == "energy":
            plot_energy(self.inputs[0], self.output, yscale=self.yscale)
        elif self.kind == "drift":
            plot_drift(self.inputs[0], self.output, yscale=self.yscale)
        elif self.kind == "order":
            return plot_order(self.inputs, self.output)
        else:
            plot_snapshot(self.inputs[0], self.output)
        return None


def _save(fig, out_path: str) -> None:
    fig.savefig(out_path, dpi=DPI, metadata={"Software": "elhplots"})
    plt.close(fig)


def _scale(ax, mode: str) -> None:
    if mode == "log":
        ax.set_yscale("log")


def plot_energy(csv_path: str, out_path: str, yscale: str = "linear") -> None:
    """Energy curves with the accumulated dissipation on a twin axis."""
    ts = read_timeseries(csv_path)
    t = ts["t"]
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(t, ts["E_basic"], label="quadratic energy", color="tab:blue")
    ax.plot(t, ts["E_hs"], label="Sobolev energy", color="tab:orange")
    eta = ts["E_eta"]
    if np.isfinite(eta).any():
        ax.plot(t, eta, label="weighted energy", color="tab:green")
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    _scale(ax, yscale)
    twin = ax.twinx()
    if t.size > 1:
        cumulative = np.concatenate(
            [[0.0], np.cumsum(0.5 * (ts["D_total"][1:] + ts["D_total"][:-1]) * np.diff(t))]
        )
    else:
        cumulative = np.zeros_like(t)
    twin.plot(t, cumulative, label="integrated dissipation", color="tab:red",
              linestyle="--")
    twin.set_ylabel("integrated dissipation")
    lines, labels = ax.get_legend_handles_labels()
    l2, lb2 = twin.get_legend_handles_labels()
    ax.legend(lines + l2, labels + lb2, loc="best")
    ax.set_title("energy decay and dissipation balance")
    _save(fig, out_path)


def plot_drift(csv_path: str, out_path: str, yscale: str = "log") -> None:
    """Unit-length drift curves against the 1e-6 guide line."""
    ts = read_timeseries(csv_path)
    t = ts["t"]
    fig, ax = plt.subplots(figsize=FIGSIZE)
    floor = 1e-18  # keep exact zeros visible on the log axis
    ax.plot(t, np.maximum(ts["h_max"], floor), label="max ||d|^2 - 1|")
    ax.plot(t, np.maximum(ts["h_l2"], floor), label="L2 of |d|^2 - 1")
    ax.plot(t, np.maximum(ts["tangency_max"], floor), label="max |d.w|")
    ax.axhline(1e-6, color="black", linestyle=":", label="1e-6 guide")
    ax.set_xlabel("t")
    ax.set_ylabel("constraint drift")
    _scale(ax, yscale)
    ax.legend(loc="best")
    ax.set_title("unit-length constraint drift")
    _save(fig, out_path)


def residual_level(ts: TimeSeries) -> float:
    res = ts["residual"]
    res = res[np.isfinite(res)]
    if res.size == 0:
        raise ValueError("no residual samples in time series")
    return float(res.max())


def infer_dt(ts: TimeSeries) -> float:
    t = ts["t"]
    if t.size < 2:
        raise ValueError("need at least two samples to infer the step size")
    return float(np.median(np.diff(t)))


def plot_order(csv_paths: list[str], out_path: str) -> float:
    """Fit and annotate the residual-vs-step-size slope; returns the slope."""
    if len(csv_paths) < 2:
        raise ValueError("order plot needs at least two time series at different dt")
    dts, residuals = [], []
    for path in csv_paths:
        ts = read_timeseries(path)
        dts.append(infer_dt(ts))
        residuals.append(residual_level(ts))
    dts = np.array(dts)
    residuals = np.array(residuals)
    slope, intercept = np.polyfit(np.log(dts), np.log(residuals), 1)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.loglog(dts, residuals, "o", label="max residual")
    xs = np.array([dts.min(), dts.max()])
    ax.loglog(xs, np.exp(intercept) * xs**slope, "--",
              label=f"fit: slope {slope:.2f}")
    ax.set_xlabel("step size")
    ax.set_ylabel("max energy-balance residual")
    ax.legend(loc="best")
    ax.set_title("residual convergence order")
    _save(fig, out_path)
    return float(slope)


def plot_snapshot(snap_path: str, out_path: str, quiver_stride: int = 0) -> None:
    """Director quiver over the speed heatmap (2-D snapshots)."""
    snap = read_snapshot(snap_path)
    if snap.dim != 2:
        raise ValueError("snapshot figures support 2-D fields only")
    speed = np.sqrt(snap.u[0] ** 2 + snap.u[1] ** 2)
    n = snap.n
    stride = quiver_stride or max(1, n // 16)
    x = 2.0 * np.pi * np.arange(n) / n
    X, Y = np.meshgrid(x, x, indexing="ij")
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    im = ax.pcolormesh(X, Y, speed, shading="auto", cmap="viridis")
    fig.colorbar(im, ax=ax, label="|u|")
    sl = (slice(None, None, stride), slice(None, None, stride))
    ax.quiver(X[sl], Y[sl], snap.d[0][sl], snap.d[1][sl],
              color="white", scale=30, width=0.003)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"director field over speed, t = {snap.time:g}")
    _save(fig, out_path)
