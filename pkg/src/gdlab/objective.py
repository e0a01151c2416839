"""Datasets, per-sample losses and the (weighted) empirical objective.

The weighted form ``L(theta) = sum_i p_i * l(y_i, f_theta(x_i))`` recovers
the plain empirical mean for uniform weights and the two-point weighted
objective used throughout the stability experiments for weights (p, 1-p).

Loss convention: ``half_squared`` is l(y, yhat) = 0.5 * ||y - yhat||^2.
With the two data points (0.9, 0.9), (2.5, 2.5) at equal weight this gives
L = 1.765 (1 - t1 t2)^2 on the positive quadrant, whose gradient field is
exactly the 3.53-coefficient map used in the periodic-orbit experiments.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .calculus import Jet2, PiecewiseFn, eval012, figure1_loss, jet2_mul, jet2_scale
from .network import Dense, NetworkSpec, forward, forward_jet2, breakpoint_proximity


@dataclass(frozen=True)
class Dataset:
    xs: tuple[tuple[float, ...], ...]
    ys: tuple[tuple[float, ...], ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        m = len(self.xs)
        if m < 1:
            raise ValueError("dataset needs at least one sample")
        if len(self.ys) != m or len(self.weights) != m:
            raise ValueError("inconsistent dataset lengths")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")

    @property
    def m(self) -> int:
        return len(self.xs)

    @staticmethod
    def uniform(xs: Sequence[Sequence[float]], ys: Sequence[Sequence[float]]) -> "Dataset":
        m = len(xs)
        w = 1.0 / m
        return Dataset(
            tuple(tuple(float(v) for v in x) for x in xs),
            tuple(tuple(float(v) for v in y) for y in ys),
            tuple(w for _ in range(m)),
        )

    @staticmethod
    def weighted(
        xs: Sequence[Sequence[float]],
        ys: Sequence[Sequence[float]],
        weights: Sequence[float],
    ) -> "Dataset":
        return Dataset(
            tuple(tuple(float(v) for v in x) for x in xs),
            tuple(tuple(float(v) for v in y) for y in ys),
            tuple(float(w) for w in weights),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        nx, ny = len(self.xs[0]), len(self.ys[0])
        w = csv.writer(buf)
        w.writerow([f"x{i}" for i in range(nx)] + [f"y{i}" for i in range(ny)] + ["weight"])
        for x, y, p in zip(self.xs, self.ys, self.weights):
            w.writerow([f"{v:.17g}" for v in (*x, *y, p)])
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "Dataset":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        nx = sum(1 for h in header if h.startswith("x"))
        ny = sum(1 for h in header if h.startswith("y"))
        xs, ys, ws = [], [], []
        for r in body:
            vals = [float(v) for v in r]
            xs.append(vals[:nx])
            ys.append(vals[nx : nx + ny])
            ws.append(vals[nx + ny])
        return Dataset.weighted(xs, ys, ws)


# per-sample losses on jets; extensible by name
SampleLossJet = Callable[[np.ndarray, list[Jet2]], Jet2]


def _half_squared_jet(y: np.ndarray, yhat: list[Jet2]) -> Jet2:
    n = yhat[0].n
    acc = Jet2.constant(0.0, n)
    for yk, uk in zip(y, yhat):
        diff = uk + Jet2.constant(-float(yk), n)
        acc = acc + jet2_mul(diff, diff)
    return jet2_scale(acc, 0.5)


def _half_squared_value(y: np.ndarray, yhat: np.ndarray) -> float:
    d = yhat - y
    return 0.5 * float(d @ d)


LOSSES: dict[str, tuple[Callable, SampleLossJet]] = {
    "half_squared": (_half_squared_value, _half_squared_jet),
}


@dataclass(frozen=True)
class LossSpec:
    kind: str = "half_squared"

    def __post_init__(self) -> None:
        if self.kind not in LOSSES:
            raise KeyError(f"unknown loss {self.kind!r}")


class LossJetResult:
    def __init__(self, value: float, grad: np.ndarray, hess: np.ndarray, hits: int):
        self.value = value
        self.grad = grad
        self.hess = hess
        self.breakpoint_hits = hits


def _batch_loss_jet(
    spec: NetworkSpec,
    theta,
    data: Dataset,
    loss: LossSpec,
    indices: Sequence[int],
    weights: Sequence[float],
) -> LossJetResult:
    n = spec.n_params
    _, jet_loss = LOSSES[loss.kind]
    total = Jet2.constant(0.0, n)
    hits = 0
    for i, w in zip(indices, weights):
        x = np.asarray(data.xs[i])
        y = np.asarray(data.ys[i])
        out = forward_jet2(spec, theta, x)
        hits += out.breakpoint_hits
        yhat = [Jet2(out.value[k], out.grad[k], out.hess[k]) for k in range(out.value.size)]
        total = total + jet2_scale(jet_loss(y, yhat), w)
    return LossJetResult(total.value, total.grad, total.hess, hits)


def empirical_loss(spec: NetworkSpec, theta, data: Dataset, loss: LossSpec) -> float:
    value_fn, _ = LOSSES[loss.kind]
    acc = 0.0
    for x, y, w in zip(data.xs, data.ys, data.weights):
        yhat = forward(spec, theta, np.asarray(x))
        acc += w * value_fn(np.asarray(y), yhat)
    return acc


def loss_jet2(spec: NetworkSpec, theta, data: Dataset, loss: LossSpec) -> LossJetResult:
    """Exact value, gradient and Hessian of the weighted empirical loss."""
    return _batch_loss_jet(spec, theta, data, loss, range(data.m), data.weights)


def minibatch_loss(
    spec: NetworkSpec, theta, data: Dataset, loss: LossSpec, batch: Sequence[int]
) -> LossJetResult:
    """Mini-batch loss with uniform 1/n weights over ``batch``.

    Indices are processed in sorted order so that a full uniform batch is
    bit-identical to :func:`loss_jet2` on a uniformly weighted dataset.
    """
    batch = sorted(int(i) for i in batch)
    if len(set(batch)) != len(batch):
        raise ValueError("duplicate batch index")
    if batch and (batch[0] < 0 or batch[-1] >= data.m):
        raise ValueError("batch index out of range")
    w = 1.0 / len(batch)
    return _batch_loss_jet(spec, theta, data, loss, batch, [w] * len(batch))


# ---------------------------------------------------------------------------
# objectives: the uniform surface the dynamics layer drives
# ---------------------------------------------------------------------------


class NetworkObjective:
    """Empirical loss of a network on a dataset, as a map on theta."""

    def __init__(self, spec: NetworkSpec, data: Dataset, loss: LossSpec | None = None):
        self.spec = spec
        self.data = data
        self.loss = loss or LossSpec()

    @property
    def n_params(self) -> int:
        return self.spec.n_params

    def value(self, theta) -> float:
        return empirical_loss(self.spec, theta, self.data, self.loss)

    def value_grad_hess(self, theta) -> LossJetResult:
        return loss_jet2(self.spec, theta, self.data, self.loss)

    def batch_grad(self, theta, batch: Sequence[int]) -> LossJetResult:
        return minibatch_loss(self.spec, theta, self.data, self.loss, batch)

    def breakpoint_proximity(self, theta) -> float:
        return min(
            breakpoint_proximity(self.spec, theta, np.asarray(x)) for x in self.data.xs
        )


class ScalarObjective:
    """A one-parameter objective given directly as a piecewise function."""

    def __init__(self, f: PiecewiseFn):
        self.f = f
        self.data = None

    @property
    def n_params(self) -> int:
        return 1

    def value(self, theta) -> float:
        t = float(np.asarray(theta).reshape(()))
        return eval012(self.f, t).value

    def value_grad_hess(self, theta) -> LossJetResult:
        t = float(np.asarray(theta).reshape(()))
        r = eval012(self.f, t)
        return LossJetResult(
            r.value, np.array([r.d1]), np.array([[r.d2]]), int(r.at_breakpoint)
        )

    def breakpoint_proximity(self, theta) -> float:
        t = float(np.asarray(theta).reshape(()))
        if not self.f.breakpoints:
            return math.inf
        return min(abs(t - b) for b in self.f.breakpoints)


APPENDIX_C_POINTS = ((0.9,), (2.5,))


def appendix_c_objective(p: float = 0.5) -> NetworkObjective:
    """Two-layer scalar ReLU model ReLU(t2 ReLU(t1 x)) on the two data
    points (0.9, 0.9) and (2.5, 2.5), with weight ``p`` on the first."""
    spec = NetworkSpec((Dense(1, 1, "relu"), Dense(1, 1, "relu")))
    data = Dataset.weighted(
        APPENDIX_C_POINTS, APPENDIX_C_POINTS, (float(p), 1.0 - float(p))
    )
    return NetworkObjective(spec, data)


def figure1_objective() -> ScalarObjective:
    return ScalarObjective(figure1_loss())


def quadratic_objective() -> ScalarObjective:
    """L(t) = t^2, the simplest smooth test objective."""
    from .calculus import square

    return ScalarObjective(square())


NAMED_OBJECTIVES: dict[str, Callable[[], object]] = {
    "figure1": figure1_objective,
    "appendixC": appendix_c_objective,
    "quadratic": quadratic_objective,
}


def objective_by_name(name: str, **kwargs):
    if name not in NAMED_OBJECTIVES:
        raise KeyError(f"unknown objective {name!r}")
    return NAMED_OBJECTIVES[name](**kwargs)
