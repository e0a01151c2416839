"""Scalar piecewise analytic functions and second-order forward-mode jets.

A piecewise analytic function is represented by a finite, strictly increasing
breakpoint sequence together with one evaluator per open piece (including the
two unbounded end pieces).  Each evaluator returns ``(value, d1, d2)`` at a
point.  Exactly on a breakpoint the value comes from an explicit boundary
value and the derivatives from the left piece; callers can see that this
happened through the ``at_breakpoint`` flag.

Jets carry a value, a gradient over the full parameter vector and a dense
symmetric Hessian.  All operations are pure and keep the Hessian exactly
symmetric by construction.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

PieceEvaluator = Callable[[float], tuple[float, float, float]]


class PiecewiseValidationError(ValueError):
    pass


@dataclass(frozen=True)
class PiecewiseFn:
    """A scalar function, analytic between consecutive breakpoints."""

    breakpoints: tuple[float, ...]
    pieces: tuple[PieceEvaluator, ...]
    boundary_values: tuple[float, ...]


class EvalResult(NamedTuple):
    value: float
    d1: float
    d2: float
    at_breakpoint: bool


def make_piecewise(
    breakpoints: Sequence[float],
    pieces: Sequence[PieceEvaluator],
    boundary_values: Sequence[float],
) -> PiecewiseFn:
    """Validate and build a :class:`PiecewiseFn`.

    Requires ``len(pieces) == len(breakpoints) + 1`` and a strictly
    increasing breakpoint sequence.
    """
    bps = tuple(float(b) for b in breakpoints)
    if any(not math.isfinite(b) for b in bps):
        raise PiecewiseValidationError("breakpoints must be finite")
    if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
        raise PiecewiseValidationError("breakpoints must be strictly increasing")
    if len(pieces) != len(bps) + 1:
        raise PiecewiseValidationError(
            f"need {len(bps) + 1} pieces for {len(bps)} breakpoints, got {len(pieces)}"
        )
    if len(boundary_values) != len(bps):
        raise PiecewiseValidationError(
            f"need {len(bps)} boundary values, got {len(boundary_values)}"
        )
    return PiecewiseFn(bps, tuple(pieces), tuple(float(v) for v in boundary_values))


def eval012(f: PiecewiseFn, x: float) -> EvalResult:
    """Evaluate value and first two derivatives of ``f`` at ``x``.

    On a breakpoint the value is the stored boundary value and the
    derivatives are the left piece's one-sided limits; ``at_breakpoint``
    is set so probes can count these measure-zero encounters.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite input {x!r}")
    bps = f.breakpoints
    for i, b in enumerate(bps):
        if x == b:
            _, d1, d2 = f.pieces[i](x)
            return EvalResult(f.boundary_values[i], d1, d2, True)
    idx = bisect_right(bps, x)
    v, d1, d2 = f.pieces[idx](x)
    return EvalResult(v, d1, d2, False)


def breakpoint_distance(f: PiecewiseFn, x: float) -> float:
    """Distance from ``x`` to the nearest breakpoint (inf if none)."""
    if not f.breakpoints:
        return math.inf
    return min(abs(x - b) for b in f.breakpoints)


# ---------------------------------------------------------------------------
# second-order jets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and dense symmetric Hessian w.r.t. the parameters."""

    value: float
    grad: np.ndarray
    hess: np.ndarray

    @staticmethod
    def constant(value: float, n: int) -> "Jet2":
        return Jet2(float(value), np.zeros(n), np.zeros((n, n)))

    @staticmethod
    def seed(value: float, index: int, n: int) -> "Jet2":
        g = np.zeros(n)
        g[index] = 1.0
        return Jet2(float(value), g, np.zeros((n, n)))

    @property
    def n(self) -> int:
        return self.grad.shape[0]

    def __add__(self, other: "Jet2") -> "Jet2":
        return jet2_add(self, other)

    def __sub__(self, other: "Jet2") -> "Jet2":
        return jet2_add(self, jet2_scale(other, -1.0))

    def __mul__(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return jet2_mul(self, other)
        return jet2_scale(self, other)

    __rmul__ = __mul__

    def __neg__(self) -> "Jet2":
        return jet2_scale(self, -1.0)


def _check_dims(a: Jet2, b: Jet2) -> None:
    if a.grad.shape != b.grad.shape:
        raise ValueError(f"jet dimension mismatch: {a.grad.shape} vs {b.grad.shape}")


def jet2_add(a: Jet2, b: Jet2) -> Jet2:
    _check_dims(a, b)
    return Jet2(a.value + b.value, a.grad + b.grad, a.hess + b.hess)


def jet2_scale(a: Jet2, c: float) -> Jet2:
    c = float(c)
    return Jet2(c * a.value, c * a.grad, c * a.hess)


def jet2_mul(a: Jet2, b: Jet2) -> Jet2:
    # outer(a,b) + outer(b,a) is exactly symmetric in floating point
    _check_dims(a, b)
    value = a.value * b.value
    grad = a.value * b.grad + b.value * a.grad
    hess = (
        a.value * b.hess
        + b.value * a.hess
        + np.outer(a.grad, b.grad)
        + np.outer(b.grad, a.grad)
    )
    return Jet2(value, grad, hess)


def jet2_chain(u: Jet2, v: float, d1: float, d2: float) -> Jet2:
    """Apply a scalar function given by its local 2-jet ``(v, d1, d2)`` at
    ``u.value`` to the jet ``u`` (Faa di Bruno to second order)."""
    grad = d1 * u.grad
    hess = d1 * u.hess + d2 * np.outer(u.grad, u.grad)
    return Jet2(v, grad, hess)


def jet2_lift(f: PiecewiseFn, u: Jet2) -> tuple[Jet2, bool]:
    """Compose a piecewise function with a jet; propagates the
    breakpoint-hit flag of the underlying evaluation."""
    r = eval012(f, u.value)
    return jet2_chain(u, r.value, r.d1, r.d2), r.at_breakpoint


def jet2_exp(u: Jet2) -> Jet2:
    e = math.exp(u.value)
    return jet2_chain(u, e, e, e)


def jet2_reciprocal(u: Jet2) -> Jet2:
    if u.value == 0.0:
        raise ZeroDivisionError("jet reciprocal at zero")
    inv = 1.0 / u.value
    return jet2_chain(u, inv, -inv * inv, 2.0 * inv * inv * inv)


# ---------------------------------------------------------------------------
# named activations and objectives
# ---------------------------------------------------------------------------


def _analytic(fn3: PieceEvaluator) -> PiecewiseFn:
    """A piecewise function with a single analytic piece (S(f) empty)."""
    return make_piecewise([], [fn3], [])


def relu() -> PiecewiseFn:
    return make_piecewise(
        [0.0],
        [lambda x: (0.0, 0.0, 0.0), lambda x: (x, 1.0, 0.0)],
        [0.0],
    )


def leaky_relu(alpha: float) -> PiecewiseFn:
    a = float(alpha)
    return make_piecewise(
        [0.0],
        [lambda x: (a * x, a, 0.0), lambda x: (x, 1.0, 0.0)],
        [0.0],
    )


def max1() -> PiecewiseFn:
    # x |-> max{1, x}
    return make_piecewise(
        [1.0],
        [lambda x: (1.0, 0.0, 0.0), lambda x: (x, 1.0, 0.0)],
        [1.0],
    )


def sigmoid() -> PiecewiseFn:
    def ev(x: float) -> tuple[float, float, float]:
        s = 1.0 / (1.0 + math.exp(-x))
        d1 = s * (1.0 - s)
        return s, d1, d1 * (1.0 - 2.0 * s)

    return _analytic(ev)


def tanh() -> PiecewiseFn:
    def ev(x: float) -> tuple[float, float, float]:
        t = math.tanh(x)
        d1 = 1.0 - t * t
        return t, d1, -2.0 * t * d1

    return _analytic(ev)


def identity() -> PiecewiseFn:
    return _analytic(lambda x: (x, 1.0, 0.0))


def square() -> PiecewiseFn:
    return _analytic(lambda x: (x * x, 2.0 * x, 2.0))


def figure1_loss() -> PiecewiseFn:
    """The illustrative one-parameter objective
    ``0.5*t^4 - 3*t^2 + 8`` on [-2, 2] and ``t^2`` outside.

    The function is C^1 at +-2 but the curvature jumps (18 inside vs 2
    outside), so both points are genuine breakpoints of the second
    derivative.
    """

    def outer(x: float) -> tuple[float, float, float]:
        return x * x, 2.0 * x, 2.0

    def inner(x: float) -> tuple[float, float, float]:
        return (
            0.5 * x**4 - 3.0 * x * x + 8.0,
            2.0 * x**3 - 6.0 * x,
            6.0 * x * x - 6.0,
        )

    return make_piecewise([-2.0, 2.0], [outer, inner, outer], [4.0, 4.0])


def activation_from_key(key: str) -> PiecewiseFn:
    """Build a named activation, e.g. ``"relu"`` or ``"leaky_relu(0.1)"``."""
    key = key.strip()
    if key.startswith("leaky_relu(") and key.endswith(")"):
        return leaky_relu(float(key[len("leaky_relu(") : -1]))
    simple = {
        "relu": relu,
        "sigmoid": sigmoid,
        "tanh": tanh,
        "max1": max1,
        "identity": identity,
        "square": square,
        "figure1": figure1_loss,
    }
    if key not in simple:
        raise KeyError(f"unknown activation {key!r}")
    return simple[key]()
