"""Closed-form GD/SGD stability exponents for the two-point experiment and
the generic multiplier-based classifier.

For the two-layer scalar ReLU model on data points (a, a), (b, b) with
sampling weight ``p`` on the first, the exponents on the minimum hyperbola
(theta2 = 1/theta1, theta1 > 0) are

    mu(theta)     = log|1 - eta * (p a^2 + (1-p) b^2) * r|
    lambda(theta) = p log|1 - eta a^2 r| + (1-p) log|1 - eta b^2 r|

with r = theta1^2 + theta2^2.  The symmetric form above is the default;
``literal_lambda=True`` selects a variant that drops eta from the second
logarithm, kept only for comparison against transcriptions that omit it.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import jacobi_eigenvalues

NEUTRAL_TOL = 1e-8


@dataclass(frozen=True)
class StabilityConfig:
    eta: float
    p: float
    a: float = 0.9
    b: float = 2.5

    def __post_init__(self) -> None:
        if not (0.0 <= self.p <= 1.0):
            raise ValueError("p must be in [0, 1]")
        if self.eta <= 0:
            raise ValueError("eta must be positive")

    @property
    def mean_coeff(self) -> float:
        # p*a^2 + (1-p)*b^2; equals 3.53 at the default data with p=0.5
        return self.p * (self.a * self.a) + (1.0 - self.p) * (self.b * self.b)


def _log_abs(x: float) -> float:
    if x == 0.0:
        return -math.inf
    return math.log(abs(x))


def mu(theta, config: StabilityConfig) -> float:
    t1, t2 = (float(v) for v in theta)
    r = t1 * t1 + t2 * t2
    return _log_abs(1.0 - config.eta * config.mean_coeff * r)


def mu_of_r(r: float, config: StabilityConfig) -> float:
    return _log_abs(1.0 - config.eta * config.mean_coeff * r)


def lambda_of_r(r: float, config: StabilityConfig, literal_lambda: bool = False) -> float:
    acc = 0.0
    first = 1.0 - config.eta * (config.a * config.a) * r
    eta2 = 1.0 if literal_lambda else config.eta
    second = 1.0 - eta2 * (config.b * config.b) * r
    # zero-weight terms are skipped so p in {0, 1} degenerates exactly to mu
    if config.p != 0.0:
        acc += config.p * _log_abs(first)
    if config.p != 1.0:
        acc += (1.0 - config.p) * _log_abs(second)
    return acc


def lambda_sgd(theta, config: StabilityConfig, literal_lambda: bool = False) -> float:
    t1, t2 = (float(v) for v in theta)
    return lambda_of_r(t1 * t1 + t2 * t2, config, literal_lambda)


@dataclass
class StabilityReport:
    theta: tuple[float, float]
    mu: float
    lam: float
    gd_stable: bool
    sgd_stable: bool


def report(theta, config: StabilityConfig) -> StabilityReport:
    m = mu(theta, config)
    l = lambda_sgd(theta, config)
    return StabilityReport(
        theta=(float(theta[0]), float(theta[1])),
        mu=m,
        lam=l,
        gd_stable=m < 0,
        sgd_stable=l < 0,
    )


# ---------------------------------------------------------------------------
# stable arcs on the hyperbola theta2 = 1/theta1, theta1 > 0
# ---------------------------------------------------------------------------

R_MIN = 2.0  # r = t1^2 + 1/t1^2 attains its minimum 2 at t1 = 1


def _theta1_pair(r: float) -> tuple[float, float]:
    """The two theta1 values on the hyperbola with curvature radius r:
    roots of t^2 - r t + 1 = 0 in t = theta1^2."""
    disc = math.sqrt(max(r * r - 4.0, 0.0))
    t_lo = (r - disc) / 2.0
    t_hi = (r + disc) / 2.0
    return math.sqrt(t_lo), math.sqrt(t_hi)


def _negative_intervals(fn, r_max: float, grid_n: int = 20_001) -> list[tuple[float, float]]:
    """Connected components of {r in [R_MIN, r_max] : fn(r) < 0}, with
    endpoints refined by bisection on the sign changes."""
    rs = np.linspace(R_MIN, r_max, grid_n)
    vals = np.array([fn(float(r)) for r in rs])
    neg = vals < 0

    def refine(a: float, b: float) -> float:
        fa = fn(a)
        for _ in range(80):
            mid = 0.5 * (a + b)
            fm = fn(mid)
            if fm == 0.0:
                return mid
            if (fa < 0) == (fm < 0):
                a, fa = mid, fm
            else:
                b = mid
        return 0.5 * (a + b)

    intervals: list[tuple[float, float]] = []
    i = 0
    n = len(rs)
    while i < n:
        if neg[i]:
            start = rs[i] if i == 0 else refine(float(rs[i - 1]), float(rs[i]))
            j = i
            while j + 1 < n and neg[j + 1]:
                j += 1
            end = rs[j] if j == n - 1 else refine(float(rs[j + 1]), float(rs[j]))
            intervals.append((float(start), float(end)))
            i = j + 1
        else:
            i += 1
    return intervals


def _r_intervals_to_theta1(intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Map r-intervals to theta1-intervals on both hyperbola branches.

    An interval touching r = R_MIN crosses theta1 = 1 and yields a single
    arc; otherwise each side of the hyperbola contributes one arc.
    """
    arcs: list[tuple[float, float]] = []
    for r_lo, r_hi in intervals:
        lo_pair = _theta1_pair(r_lo)
        hi_pair = _theta1_pair(r_hi)
        if r_lo <= R_MIN + 1e-12:
            arcs.append((hi_pair[0], hi_pair[1]))
        else:
            arcs.append((hi_pair[0], lo_pair[0]))
            arcs.append((lo_pair[1], hi_pair[1]))
    return sorted(arcs)


@dataclass
class StableArcs:
    gd: list[tuple[float, float]]
    sgd: list[tuple[float, float]]

    def to_json(self) -> str:
        return json.dumps(
            {"gd": [list(a) for a in self.gd], "sgd": [list(a) for a in self.sgd]},
            indent=2,
        )


def stable_arcs(
    config: StabilityConfig, r_max: float = 1e3, literal_lambda: bool = False
) -> StableArcs:
    """GD and SGD stable arcs (theta1 intervals) on the minimum hyperbola.

    GD comes from the closed form mu < 0 iff r < 2 / (eta * mean_coeff);
    SGD from the sign of lambda, located numerically.
    """
    r_star = 2.0 / (config.eta * config.mean_coeff)
    if r_star <= R_MIN:
        gd: list[tuple[float, float]] = []
    else:
        gd = _r_intervals_to_theta1([(R_MIN, min(r_star, r_max))])
    def lam(r: float) -> float:
        return lambda_of_r(r, config, literal_lambda)

    sgd = _r_intervals_to_theta1(_negative_intervals(lam, r_max))
    return StableArcs(gd=gd, sgd=sgd)


# ---------------------------------------------------------------------------
# generic classifier via multipliers of I - eta H
# ---------------------------------------------------------------------------


@dataclass
class MinimumClassification:
    verdict: str  # "stable" | "unstable" | "neutral"
    multipliers: np.ndarray
    neutral: tuple[bool, ...]
    reliable: bool


def classify_minimum_generic(objective, theta_star, eta: float) -> MinimumClassification:
    """Stability of a critical point from the multipliers of I - eta*H,
    ignoring multipliers within NEUTRAL_TOL of 1 (manifold tangents)."""
    theta_star = np.asarray(theta_star, dtype=float)
    res = objective.value_grad_hess(theta_star)
    if np.linalg.norm(res.grad) >= 1e-8:
        raise ValueError("not a critical point: ||grad|| >= 1e-8")
    eigs = jacobi_eigenvalues(res.hess)
    mult = 1.0 - eta * eigs
    neutral = tuple(bool(abs(m - 1.0) < NEUTRAL_TOL) for m in mult)
    considered = [abs(m) for m, nt in zip(mult, neutral) if not nt]
    if not considered:
        verdict = "neutral"
    elif all(a < 1.0 for a in considered):
        verdict = "stable"
    else:
        verdict = "unstable"
    return MinimumClassification(
        verdict=verdict,
        multipliers=mult,
        neutral=neutral,
        reliable=res.breakpoint_hits == 0,
    )


def sample_hyperbola_csv(config: StabilityConfig, theta1_values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["theta1", "theta2", "mu", "lambda", "gd_stable", "sgd_stable"])
    for t1 in theta1_values:
        t1 = float(t1)
        t2 = 1.0 / t1
        rep = report((t1, t2), config)
        w.writerow(
            [
                f"{t1:.17g}",
                f"{t2:.17g}",
                f"{rep.mu:.17g}",
                f"{rep.lam:.17g}",
                int(rep.gd_stable),
                int(rep.sgd_stable),
            ]
        )
    return buf.getvalue()
