"""Figure rendering. One job per call; output is a pure function of the
input files and style options, so re-rendering a job is byte-identical."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import (
    branch_counts,
    read_arcs,
    read_bifurcation,
    read_fig1,
    read_stable_minima,
    read_trajectory,
)

KINDS = ("fig1", "bifurcation", "stable_minima", "trajectory")

# fixed style so raster output never depends on user rc files
_RC = {
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "svg.hashsalt": "gdplots",
    "figure.figsize": (6.0, 4.0),
}


@dataclass(frozen=True)
class PlotJob:
    kind: str
    inputs: tuple[str, ...]
    output: str
    fmt: str = "png"
    title: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown plot kind {self.kind!r}")
        if self.fmt not in ("svg", "png"):
            raise ValueError("format must be svg or png")


def _save(fig, job: PlotJob) -> None:
    Path(job.output).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(job.output, format=job.fmt, metadata=_no_dates(job.fmt))
    plt.close(fig)


def _no_dates(fmt: str) -> dict:
    # SVG embeds a creation date by default; strip it for reproducibility
    return {"Date": None} if fmt == "svg" else {}


def _render_fig1(job: PlotJob):
    doc = read_fig1(job.inputs[0], job.inputs[1])
    fig, ax = plt.subplots()
    ax.plot(doc.theta_in, doc.theta_out, color="tab:blue", lw=1.5, label="one step image")
    ax.axvspan(*doc.interval, color="tab:orange", alpha=0.2, label="input interval")
    if doc.theta_out:
        lo, hi = min(doc.theta_out), max(doc.theta_out)
        ax.axhspan(lo, hi, color="tab:green", alpha=0.25, label="image interval")
        ax.annotate(
            f"image width = {doc.diameter:.3g}",
            xy=(doc.interval[0], hi),
            xytext=(0.05, 0.05),
            textcoords="axes fraction",
        )
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel(r"$G_\eta(\theta)$")
    ax.set_title(job.title or f"one gradient step, eta = {doc.eta:g}")
    ax.legend(loc="best")
    return fig


def _render_bifurcation(job: PlotJob):
    rows = read_bifurcation(job.inputs[0])
    fig, ax = plt.subplots()
    stable = [r for r in rows if r.stable]
    unstable = [r for r in rows if not r.stable]
    ax.scatter(
        [r.eta for r in stable], [r.theta for r in stable],
        s=6, color="tab:blue", label="stable",
    )
    ax.scatter(
        [r.eta for r in unstable], [r.theta for r in unstable],
        s=6, facecolors="none", edgecolors="tab:red", linestyle="--", label="unstable",
    )
    ax.set_xlabel(r"$\eta$")
    ax.set_ylabel(r"$\theta$")
    ax.set_title(job.title or "periodic orbits vs step-size")
    if rows:
        ax.legend(loc="best")
    return fig


def _render_stable_minima(job: PlotJob):
    rows = read_stable_minima(job.inputs[0])
    arcs = read_arcs(job.inputs[1]) if len(job.inputs) > 1 else None
    fig, ax = plt.subplots()
    ax.plot(
        [r.theta1 for r in rows], [r.theta2 for r in rows],
        color="0.6", lw=1.0, label="minimum hyperbola",
    )
    if arcs is not None:
        for i, (lo, hi) in enumerate(arcs.gd):
            seg = [r for r in rows if lo <= r.theta1 <= hi]
            ax.plot(
                [r.theta1 for r in seg], [r.theta2 for r in seg],
                color="tab:blue", lw=4.0, label="GD stable" if i == 0 else None,
            )
        for i, (lo, hi) in enumerate(arcs.sgd):
            seg = [r for r in rows if lo <= r.theta1 <= hi]
            ax.plot(
                [r.theta1 for r in seg], [r.theta2 for r in seg],
                color="tab:red", lw=2.0, label="SGD stable" if i == 0 else None,
            )
    ax.set_xlabel(r"$\theta_1$")
    ax.set_ylabel(r"$\theta_2$")
    ax.set_title(job.title or "stable minima on the hyperbola")
    if rows:
        ax.legend(loc="best")
    return fig


def _render_trajectory(job: PlotJob):
    rows = read_trajectory(job.inputs[0])
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0))
    if rows and len(rows[0].theta) == 2:
        axes[0].plot(
            [r.theta[0] for r in rows], [r.theta[1] for r in rows],
            marker=".", ms=3, lw=0.8, color="tab:blue",
        )
        axes[0].set_xlabel(r"$\theta_1$")
        axes[0].set_ylabel(r"$\theta_2$")
    else:
        for i in range(len(rows[0].theta) if rows else 0):
            axes[0].plot([r.step for r in rows], [r.theta[i] for r in rows], lw=1.0)
        axes[0].set_xlabel("step")
        axes[0].set_ylabel(r"$\theta$")
    axes[1].semilogy(
        [r.step for r in rows],
        [max(r.loss, 1e-300) for r in rows],
        color="tab:orange", lw=1.0,
    )
    axes[1].set_xlabel("step")
    axes[1].set_ylabel("loss")
    fig.suptitle(job.title or "trajectory")
    return fig


_RENDERERS = {
    "fig1": _render_fig1,
    "bifurcation": _render_bifurcation,
    "stable_minima": _render_stable_minima,
    "trajectory": _render_trajectory,
}

_EXPECTED_INPUTS = {"fig1": 2, "bifurcation": 1, "stable_minima": 2, "trajectory": 1}


def render(job: PlotJob) -> str:
    """Render ``job`` and return the output path."""
    if len(job.inputs) != _EXPECTED_INPUTS[job.kind]:
        raise ValueError(
            f"{job.kind} expects {_EXPECTED_INPUTS[job.kind]} input file(s), got {len(job.inputs)}"
        )
    with plt.rc_context(_RC):
        fig = _RENDERERS[job.kind](job)
        _save(fig, job)
    return job.output
