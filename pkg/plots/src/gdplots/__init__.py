from .io import (
    ArcsDoc,
    BifurcationRow,
    Fig1Doc,
    SchemaError,
    StableMinimaRow,
    TrajectoryRow,
    branch_counts,
    read_arcs,
    read_bifurcation,
    read_fig1,
    read_stable_minima,
    read_trajectory,
)
from .render import KINDS, PlotJob, render

__all__ = [
    "ArcsDoc",
    "BifurcationRow",
    "Fig1Doc",
    "KINDS",
    "PlotJob",
    "SchemaError",
    "StableMinimaRow",
    "TrajectoryRow",
    "branch_counts",
    "read_arcs",
    "read_bifurcation",
    "read_fig1",
    "read_stable_minima",
    "read_trajectory",
    "render",
]
