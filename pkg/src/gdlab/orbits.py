"""Periodic points of the GD map: root finding, stability, sweeps.

The one-dimensional finder works on any scalar map supplied as
``x -> (g(x), g'(x))``; for the two-parameter experiments the map is the
diagonal reduction of the full gradient step, evaluated at (x, x) so the
search stays consistent with whatever loss convention the objective uses.
Roots come from sign-change bracketing on a dense grid followed by Newton
refinement; the iterated map is only piecewise smooth, so no global
polynomial solver is applicable.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

NEUTRAL_TOL = 1e-8  # |multiplier - 1| below this is manifold-tangent
RESIDUAL_TOL_1D = 1e-12
RESIDUAL_TOL_ND = 1e-10
PRIMITIVITY_TOL = 1e-6

ScalarMap = Callable[[float], tuple[float, float]]


def diagonal_map(objective, eta: float) -> ScalarMap:
    """Scalar reduction of a symmetric 2-parameter objective along the
    diagonal: g(x) = first component of G_eta((x, x)), with derivative
    d/dx g = 1 - eta * (H[0,0] + H[0,1])."""

    memo: dict[float, tuple[float, float]] = {}

    def g(x: float) -> tuple[float, float]:
        hit = memo.get(x)
        if hit is not None:
            return hit
        res = objective.value_grad_hess(np.array([x, x]))
        out = (x - eta * res.grad[0], 1.0 - eta * (res.hess[0, 0] + res.hess[0, 1]))
        memo[x] = out
        return out

    return g


def iterate_scalar(g: ScalarMap, x: float, k: int) -> tuple[float, float]:
    """k-fold composition value and derivative (chain rule)."""
    d = 1.0
    for _ in range(k):
        x, dx = g(x)
        d *= dx
    return x, d


@dataclass
class Root1D:
    x: float
    residual: float
    converged: bool
    bracket: Optional[tuple[float, float]] = None


def _newton_1d(g: ScalarMap, k: int, x0: float, max_iter: int = 100) -> tuple[float, float, bool]:
    x = x0
    for _ in range(max_iter):
        gx, dgx = iterate_scalar(g, x, k)
        f = gx - x
        if abs(f) < RESIDUAL_TOL_1D:
            return x, abs(f), True
        df = dgx - 1.0
        if df == 0.0:
            break
        x = x - f / df
        if not math.isfinite(x):
            break
    gx, _ = iterate_scalar(g, x, k)
    return x, abs(gx - x), abs(gx - x) < RESIDUAL_TOL_1D


def find_periodic_1d(
    g: ScalarMap,
    k: int,
    search_interval: tuple[float, float],
    grid_n: int = 2001,
) -> list[Root1D]:
    """Primitive k-periodic points of ``g`` inside ``search_interval``.

    Grid scan for sign changes of g^k(x) - x, Newton refinement, then
    dedup (1e-8) and discard points already fixed by a proper divisor of k.
    """
    lo, hi = search_interval
    xs = np.linspace(lo, hi, grid_n)
    fs = np.array([iterate_scalar(g, float(x), k)[0] - float(x) for x in xs])
    candidates: list[Root1D] = []
    for i in range(grid_n):
        if fs[i] == 0.0:
            candidates.append(Root1D(float(xs[i]), 0.0, True))
        if i + 1 < grid_n and fs[i] * fs[i + 1] < 0.0:
            a, b = float(xs[i]), float(xs[i + 1])
            x, res, ok = _newton_1d(g, k, 0.5 * (a + b))
            if ok and a - 1e-12 <= x <= b + 1e-12:
                candidates.append(Root1D(x, res, True))
            else:
                # fall back to bisection inside the bracket
                fa = fs[i]
                aa, bb = a, b
                for _ in range(200):
                    mid = 0.5 * (aa + bb)
                    fm = iterate_scalar(g, mid, k)[0] - mid
                    if fm == 0.0 or (bb - aa) < 1e-15:
                        break
                    if fa * fm < 0.0:
                        bb = mid
                    else:
                        aa, fa = mid, fm
                mid = 0.5 * (aa + bb)
                res = abs(iterate_scalar(g, mid, k)[0] - mid)
                candidates.append(Root1D(mid, res, res < RESIDUAL_TOL_1D, bracket=(a, b)))

    roots: list[Root1D] = []
    for c in sorted(candidates, key=lambda r: r.x):
        if roots and abs(c.x - roots[-1].x) < 1e-8:
            continue
        primitive = True
        for d in range(1, k):
            if k % d == 0:
                gd, _ = iterate_scalar(g, c.x, d)
                if abs(gd - c.x) <= PRIMITIVITY_TOL:
                    primitive = False
                    break
        if primitive:
            roots.append(c)
    return roots


@dataclass
class OrbitRecord:
    period: int
    points: list[np.ndarray]
    multipliers: np.ndarray
    stable: bool
    eta: float
    residual: float
    neutral: tuple[bool, ...] = ()
    reliable: bool = True


def _orbit_points_nd(objective, theta0: np.ndarray, eta: float, k: int) -> list[np.ndarray]:
    pts = [np.asarray(theta0, dtype=float)]
    for _ in range(k - 1):
        res = objective.value_grad_hess(pts[-1])
        pts.append(pts[-1] - eta * res.grad)
    return pts


def _cycle_jacobian(objective, points: Sequence[np.ndarray], eta: float) -> tuple[np.ndarray, bool]:
    n = points[0].size
    jac = np.eye(n)
    hit = False
    for p in points:
        res = objective.value_grad_hess(p)
        hit = hit or res.breakpoint_hits > 0
        jac = (np.eye(n) - eta * res.hess) @ jac
    return jac, hit


def classify_orbit(objective, points: Sequence[np.ndarray], eta: float, k: Optional[int] = None) -> OrbitRecord:
    """Multipliers (eigenvalues of the cycle Jacobian) and stability.

    Multipliers within ``NEUTRAL_TOL`` of 1 are tangent to a manifold of
    fixed points; they are flagged neutral and excluded from the verdict.
    """
    points = [np.asarray(p, dtype=float) for p in points]
    k = k or len(points)
    jac, hit = _cycle_jacobian(objective, points, eta)
    mult = np.linalg.eigvals(jac)
    neutral = tuple(bool(abs(m - 1.0) < NEUTRAL_TOL) for m in mult)
    considered = [abs(m) for m, nt in zip(mult, neutral) if not nt]
    stable = all(a < 1.0 for a in considered) if considered else True
    res = objective.value_grad_hess(points[0])
    nxt = points[0] - eta * res.grad
    residual = float(
        np.linalg.norm(
            (points[1] if k > 1 else points[0]) - nxt
        )
    )
    return OrbitRecord(
        period=k,
        points=points,
        multipliers=mult,
        stable=stable,
        eta=eta,
        residual=residual,
        neutral=neutral,
        reliable=not hit,
    )


def find_periodic_nd(
    objective, k: int, eta: float, seeds: Sequence[Sequence[float]], max_iter: int = 100
) -> list[OrbitRecord]:
    """Newton on F(theta) = G_eta^k(theta) - theta with the cycle-product
    Jacobian; orbits are deduplicated by orbit-set equality (1e-6)."""
    records: list[OrbitRecord] = []
    n = None
    for seed in seeds:
        theta = np.asarray(seed, dtype=float)
        n = theta.size
        ok = False
        for _ in range(max_iter):
            pts = _orbit_points_nd(objective, theta, eta, k)
            res = objective.value_grad_hess(pts[-1])
            gk = pts[-1] - eta * res.grad
            f = gk - theta
            if np.linalg.norm(f) < RESIDUAL_TOL_ND:
                ok = True
                break
            jac, _ = _cycle_jacobian(objective, pts, eta)
            a = jac - np.eye(n)
            try:
                delta = np.linalg.solve(a, -f)
            except np.linalg.LinAlgError:
                break
            theta = theta + delta
            if not np.all(np.isfinite(theta)):
                break
        if not ok:
            continue
        pts = _orbit_points_nd(objective, theta, eta, k)
        orbit_set = np.stack(pts)
        duplicate = False
        for r in records:
            other = np.stack(r.points)
            d = max(
                float(np.min(np.linalg.norm(other - p, axis=1))) for p in orbit_set
            )
            if d < 1e-6:
                duplicate = True
                break
        if duplicate:
            continue
        # discard non-primitive orbits
        primitive = True
        for d in range(1, k):
            if k % d == 0:
                pd = _orbit_points_nd(objective, theta, eta, d + 1)
                if np.linalg.norm(pd[d] - theta) <= PRIMITIVITY_TOL:
                    primitive = False
                    break
        if not primitive:
            continue
        records.append(classify_orbit(objective, pts, eta, k))
    return records


@dataclass
class SweepRecord:
    eta: float
    period: int
    x: float
    multiplier: float
    stable: bool


def bifurcation_sweep(
    objective,
    eta_range: tuple[float, float],
    eta_steps: int,
    k_max: int,
    search_interval: tuple[float, float],
    grid_n: int = 801,
) -> list[SweepRecord]:
    """Sweep step-sizes on the diagonal reduction, reporting every
    primitive orbit up to period ``k_max`` with its 1-D multiplier."""
    records: list[SweepRecord] = []
    if eta_steps <= 0:
        return records
    etas = np.linspace(eta_range[0], eta_range[1], eta_steps)
    for eta in etas:
        g = diagonal_map(objective, float(eta))
        for k in range(1, k_max + 1):
            for root in find_periodic_1d(g, k, search_interval, grid_n):
                if not root.converged:
                    continue
                _, dgk = iterate_scalar(g, root.x, k)
                records.append(
                    SweepRecord(
                        eta=float(eta),
                        period=k,
                        x=root.x,
                        multiplier=dgk,
                        stable=abs(dgk) < 1.0,
                    )
                )
    return records


def sweep_to_csv(records: Sequence[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["eta", "k", "point_index", "theta", "multiplier_real", "multiplier_imag", "stable"])
    for r in records:
        w.writerow(
            [
                f"{r.eta:.17g}",
                r.period,
                0,
                f"{r.x:.17g}",
                f"{r.multiplier:.17g}",
                "0",
                int(r.stable),
            ]
        )
    return buf.getvalue()
