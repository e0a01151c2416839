"""The GD/SGD maps as dynamical systems: Jacobians, spectra, singular
step-sizes, trajectory iteration and Monte-Carlo non-singularity probes.

The GD map is ``G_eta(theta) = theta - eta * grad L(theta)``; its Jacobian
on an analytic cell is ``I - eta * H_L(theta)`` with determinant
``prod(1 - eta * lambda_i)`` over the Hessian eigenvalues, so the map is
singular exactly at the reciprocal eigenvalues of the Hessian.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .linalg import jacobi_eigenvalues, lu_det, symmetry_defect


@dataclass(frozen=True)
class GDConfig:
    eta: float
    schedule: Optional[tuple[float, ...]] = None
    rng_seed: int = 0
    batch_size: Optional[int] = None

    def __post_init__(self) -> None:
        if self.eta <= 0 and self.schedule is None:
            raise ValueError("step-size must be positive")
        if self.schedule is not None and any(e <= 0 for e in self.schedule):
            raise ValueError("all scheduled step-sizes must be positive")


@dataclass
class TrajectoryStep:
    step: int
    theta: np.ndarray
    loss: float
    grad_norm: float
    breakpoint_hits: int
    eta: float
    batch: Optional[tuple[int, ...]] = None


@dataclass
class Trajectory:
    steps: list[TrajectoryStep] = field(default_factory=list)

    @property
    def thetas(self) -> np.ndarray:
        return np.stack([s.theta for s in self.steps])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        dim = self.steps[0].theta.size
        w.writerow(
            ["step"]
            + [f"theta{i}" for i in range(dim)]
            + ["loss", "grad_norm", "bp_hits", "eta", "batch"]
        )
        for s in self.steps:
            w.writerow(
                [s.step]
                + [f"{v:.17g}" for v in s.theta]
                + [
                    f"{s.loss:.17g}",
                    f"{s.grad_norm:.17g}",
                    s.breakpoint_hits,
                    f"{s.eta:.17g}",
                    ";".join(map(str, s.batch)) if s.batch is not None else "",
                ]
            )
        return buf.getvalue()


def step_rng(seed: int, step: int) -> np.random.Generator:
    """Deterministic per-step stream: splitting the seed by step index
    makes SGD runs replayable bit-for-bit regardless of batch size."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, step))))


def gd_map(objective, theta, eta: float) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    res = objective.value_grad_hess(theta)
    return theta - eta * res.grad


def sgd_step(
    objective, theta, eta: float, rng: np.random.Generator, batch_size: int
) -> tuple[np.ndarray, tuple[int, ...]]:
    """One SGD step on a batch sampled without replacement by the dataset
    weights.  The batch is applied in sorted index order."""
    theta = np.asarray(theta, dtype=float)
    data = objective.data
    if data is None:
        raise ValueError("objective has no dataset to sample from")
    if batch_size > data.m:
        raise ValueError("batch_size exceeds dataset size")
    idx = rng.choice(data.m, size=batch_size, replace=False, p=np.asarray(data.weights))
    batch = tuple(sorted(int(i) for i in idx))
    res = objective.batch_grad(theta, batch)
    return theta - eta * res.grad, batch


def gd_jacobian(objective, theta, eta: float) -> tuple[np.ndarray, bool]:
    """``I - eta * H_L(theta)``; the boolean marks a breakpoint hit, in
    which case the one-sided convention value is returned but unreliable."""
    theta = np.asarray(theta, dtype=float)
    res = objective.value_grad_hess(theta)
    n = theta.size
    return np.eye(n) - eta * res.hess, res.breakpoint_hits > 0


def det_and_eigs(matrix: np.ndarray) -> tuple[float, np.ndarray]:
    """Determinant (LU, partial pivoting) and eigenvalues (cyclic Jacobi)
    of a symmetric matrix."""
    matrix = np.asarray(matrix, dtype=float)
    if symmetry_defect(matrix) > 1e-9:
        raise ValueError("matrix is not symmetric")
    return lu_det(matrix), jacobi_eigenvalues(matrix)


def singular_stepsizes(objective, theta, zero_tol: float = 1e-12) -> list[float]:
    """Step-sizes ``1/lambda_i`` over the nonzero Hessian eigenvalues:
    exactly the eta at which det DG_eta(theta) vanishes."""
    res = objective.value_grad_hess(np.asarray(theta, dtype=float))
    eigs = jacobi_eigenvalues(res.hess)
    return sorted(float(1.0 / lam) for lam in eigs if abs(lam) > zero_tol)


def iterate(objective, theta0, config: GDConfig, steps: int) -> Trajectory:
    """Run ``steps`` updates of GD (or SGD when ``batch_size`` is set);
    with a schedule, step t uses its t-th step-size."""
    theta = np.asarray(theta0, dtype=float)
    traj = Trajectory()
    for t in range(steps + 1):
        if not np.all(np.isfinite(theta)) or np.max(np.abs(theta)) > 1e150:
            # diverged: record the offending iterate and stop early
            traj.steps.append(
                TrajectoryStep(
                    step=t,
                    theta=theta.copy(),
                    loss=math.nan,
                    grad_norm=math.nan,
                    breakpoint_hits=0,
                    eta=config.eta,
                )
            )
            break
        res = objective.value_grad_hess(theta)
        eta = (
            config.schedule[t] if config.schedule is not None and t < len(config.schedule)
            else config.eta
        )
        rec = TrajectoryStep(
            step=t,
            theta=theta.copy(),
            loss=res.value,
            grad_norm=float(np.linalg.norm(res.grad)),
            breakpoint_hits=res.breakpoint_hits,
            eta=eta,
        )
        traj.steps.append(rec)
        if t == steps:
            break
        if config.batch_size is None:
            theta = theta - eta * res.grad
        else:
            rng = step_rng(config.rng_seed, t)
            theta, batch = sgd_step(objective, theta, eta, rng, config.batch_size)
            rec.batch = batch
    return traj


# ---------------------------------------------------------------------------
# probes
# ---------------------------------------------------------------------------


@dataclass
class RegionProbeResult:
    diameter: float
    bounding_box: tuple[tuple[float, float], ...]
    collapsed: bool
    inputs: np.ndarray
    images: np.ndarray


def region_image_probe(objective, region, eta: float, n_samples: int) -> RegionProbeResult:
    """Map a lattice over ``region`` through one GD step and measure the
    image; a wide region collapsing to (numerically) a point witnesses a
    singular map."""
    region = np.atleast_2d(np.asarray(region, dtype=float))  # (dim, 2)
    dim = region.shape[0]
    if np.any(region[:, 1] <= region[:, 0]):
        raise ValueError("region must be nondegenerate")
    per_axis = max(2, int(round(n_samples ** (1.0 / dim))))
    axes = [np.linspace(lo, hi, per_axis if dim > 1 else n_samples) for lo, hi in region]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    images = np.stack([gd_map(objective, p, eta) for p in grid])
    lo, hi = images.min(axis=0), images.max(axis=0)
    diameter = float(np.linalg.norm(hi - lo))
    region_diam = float(np.linalg.norm(region[:, 1] - region[:, 0]))
    return RegionProbeResult(
        diameter=diameter,
        bounding_box=tuple((float(a), float(b)) for a, b in zip(lo, hi)),
        collapsed=diameter < 1e-10 and region_diam > 1e-2,
        inputs=grid,
        images=images,
    )


@dataclass
class DetProbeResult:
    sample_count: int
    eps_grid: tuple[float, ...]
    fractions: tuple[float, ...]
    singular_eta_candidates: tuple[float, ...]
    breakpoint_samples: int
    abs_dets: np.ndarray

    def loglog_slope(self) -> Optional[float]:
        """Least-squares slope of log fraction vs log eps over the eps
        with nonzero fraction; None when fewer than two are nonzero."""
        pts = [
            (math.log(e), math.log(f))
            for e, f in zip(self.eps_grid, self.fractions)
            if f > 0
        ]
        if len(pts) < 2:
            return None
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        return float(np.polyfit(xs, ys, 1)[0])


def det_probe(
    objective,
    box,
    eta: float,
    n_samples: int,
    eps_grid: Sequence[float],
    rng: np.random.Generator,
) -> DetProbeResult:
    """Sample ``box`` uniformly and record |det DG_eta| at each point.

    Samples landing exactly on an activation breakpoint are counted
    separately (the one-sided Jacobian there is conventional).
    """
    box = np.atleast_2d(np.asarray(box, dtype=float))
    dim = box.shape[0]
    if np.any(box[:, 1] <= box[:, 0]):
        raise ValueError("box must be nondegenerate")
    eps_grid = tuple(sorted((float(e) for e in eps_grid), reverse=True))
    dets = np.empty(n_samples)
    bp = 0
    eye = np.eye(dim)
    for i in range(n_samples):
        theta = box[:, 0] + rng.random(dim) * (box[:, 1] - box[:, 0])
        res = objective.value_grad_hess(theta)
        if res.breakpoint_hits > 0:
            bp += 1
        dets[i] = abs(lu_det(eye - eta * res.hess))
    fractions = tuple(float(np.mean(dets < e)) for e in eps_grid)
    candidates = (eta,) if bool(np.any(dets < 1e-12)) else ()
    return DetProbeResult(
        sample_count=n_samples,
        eps_grid=eps_grid,
        fractions=fractions,
        singular_eta_candidates=candidates,
        breakpoint_samples=bp,
        abs_dets=dets,
    )
