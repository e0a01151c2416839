"""Small bias-free network architectures with exact parameter derivatives.

Three layer kinds: dense, tied-weight (convolution expressed as a tie
pattern over the weight matrix) and single-head softmax attention.  All
derivatives are with respect to the flattened parameter vector, computed by
propagating second-order jets; attention is analytic so the same jet
arithmetic covers it exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .calculus import (
    Jet2,
    PiecewiseFn,
    activation_from_key,
    breakpoint_distance,
    eval012,
    jet2_exp,
    jet2_lift,
    jet2_mul,
    jet2_reciprocal,
)


@dataclass(frozen=True)
class Dense:
    out_dim: int
    in_dim: int
    activation: str = "identity"

    @property
    def n_params(self) -> int:
        return self.out_dim * self.in_dim


@dataclass(frozen=True)
class Tied:
    """Dense layer whose matrix entries share parameters by a fixed pattern.

    ``tie_pattern[i][j]`` is the shared-parameter index of matrix position
    (i, j); indices must cover 0..max contiguously.
    """

    out_dim: int
    in_dim: int
    tie_pattern: tuple[tuple[int, ...], ...]
    activation: str = "identity"

    def __post_init__(self) -> None:
        pat = np.asarray(self.tie_pattern, dtype=int)
        if pat.shape != (self.out_dim, self.in_dim):
            raise ValueError(
                f"tie_pattern shape {pat.shape} != ({self.out_dim}, {self.in_dim})"
            )
        used = set(pat.ravel().tolist())
        if used != set(range(max(used) + 1)):
            raise ValueError("tie_pattern indices must be contiguous from 0")

    @property
    def n_params(self) -> int:
        return int(np.max(self.tie_pattern)) + 1


@dataclass(frozen=True)
class SoftmaxAttention:
    """Single-head attention: softmax(Q K^T / sqrt(seq_len)) V with
    Q = Wq X, K = Wk X, V = Wv X; the softmax is applied row-wise."""

    model_dim: int
    seq_len: int

    @property
    def n_params(self) -> int:
        return 3 * self.model_dim * self.model_dim


LayerSpec = Union[Dense, Tied, SoftmaxAttention]


def conv1d_tie_pattern(dim: int) -> tuple[tuple[int, ...], ...]:
    """Circulant pattern: each row is the row above shifted by one, so a
    square matrix carries only ``dim`` distinct parameters."""
    return tuple(tuple((j - i) % dim for j in range(dim)) for i in range(dim))


@dataclass(frozen=True)
class NetworkSpec:
    layers: tuple[LayerSpec, ...]

    def __post_init__(self) -> None:
        for prev, cur in zip(self.layers, self.layers[1:]):
            out = prev.model_dim if isinstance(prev, SoftmaxAttention) else prev.out_dim
            seq = prev.seq_len if isinstance(prev, SoftmaxAttention) else 1
            if isinstance(cur, SoftmaxAttention):
                if out != cur.model_dim or seq != cur.seq_len:
                    raise ValueError("attention layer dimension mismatch")
            else:
                # matrix outputs are column-stacked before a dense layer
                if out * seq != cur.in_dim:
                    raise ValueError(
                        f"layer chain mismatch: {out * seq} -> {cur.in_dim}"
                    )

    @property
    def n_params(self) -> int:
        return sum(l.n_params for l in self.layers)

    def param_offsets(self) -> list[int]:
        offs, total = [], 0
        for l in self.layers:
            offs.append(total)
            total += l.n_params
        return offs


class ParamVector:
    """Flat parameter vector plus the per-layer offset table."""

    def __init__(self, spec: NetworkSpec, theta: Sequence[float]):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (spec.n_params,):
            raise ValueError(
                f"expected {spec.n_params} parameters, got {theta.shape}"
            )
        self.spec = spec
        self.theta = theta
        self.offsets = spec.param_offsets()


def _as_theta(spec: NetworkSpec, theta) -> np.ndarray:
    if isinstance(theta, ParamVector):
        return theta.theta
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.n_params,):
        raise ValueError(f"expected {spec.n_params} parameters, got {theta.shape}")
    return theta


def _weight_matrix(layer: LayerSpec, params: np.ndarray) -> np.ndarray:
    if isinstance(layer, Dense):
        return params.reshape(layer.out_dim, layer.in_dim)
    if isinstance(layer, Tied):
        pat = np.asarray(layer.tie_pattern, dtype=int)
        return params[pat]
    raise TypeError(layer)


def softmax_rows(m: np.ndarray) -> np.ndarray:
    shifted = m - m.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


_ACT_CACHE: dict[str, PiecewiseFn] = {}


def _activation(key: str) -> PiecewiseFn:
    if key not in _ACT_CACHE:
        _ACT_CACHE[key] = activation_from_key(key)
    return _ACT_CACHE[key]


# ---------------------------------------------------------------------------
# plain forward pass
# ---------------------------------------------------------------------------


def forward(spec: NetworkSpec, theta, x) -> np.ndarray:
    """Network output at parameters ``theta`` and input ``x``.

    ``x`` is a vector for dense chains or a (model_dim, seq_len) matrix for
    attention stacks; matrix activations are column-stacked before a dense
    layer and in the final output.
    """
    th = _as_theta(spec, theta)
    z = np.asarray(x, dtype=float)
    for layer, off in zip(spec.layers, spec.param_offsets()):
        p = th[off : off + layer.n_params]
        if isinstance(layer, SoftmaxAttention):
            if z.ndim != 2:
                raise ValueError("attention layer needs a matrix input")
            d = layer.model_dim
            wq, wk, wv = (p[i * d * d : (i + 1) * d * d].reshape(d, d) for i in range(3))
            q, k, v = wq @ z, wk @ z, wv @ z
            a = softmax_rows(q @ k.T / math.sqrt(layer.seq_len))
            z = a @ v
        else:
            if z.ndim == 2:
                z = z.reshape(-1, order="F")
            if z.shape[0] != layer.in_dim:
                raise ValueError(
                    f"input dim {z.shape[0]} != layer in_dim {layer.in_dim}"
                )
            w = _weight_matrix(layer, p)
            pre = w @ z
            act = _activation(layer.activation)
            z = np.array([eval012(act, t).value for t in pre])
    if z.ndim == 2:
        z = z.reshape(-1, order="F")
    return z


def breakpoint_proximity(spec: NetworkSpec, theta, x) -> float:
    """Minimum distance from any pre-activation to an activation
    breakpoint along the forward pass (inf when none exist)."""
    th = _as_theta(spec, theta)
    z = np.asarray(x, dtype=float)
    best = math.inf
    for layer, off in zip(spec.layers, spec.param_offsets()):
        p = th[off : off + layer.n_params]
        if isinstance(layer, SoftmaxAttention):
            d = layer.model_dim
            wq, wk, wv = (p[i * d * d : (i + 1) * d * d].reshape(d, d) for i in range(3))
            a = softmax_rows((wq @ z) @ (wk @ z).T / math.sqrt(layer.seq_len))
            z = a @ (wv @ z)
        else:
            if z.ndim == 2:
                z = z.reshape(-1, order="F")
            w = _weight_matrix(layer, p)
            pre = w @ z
            act = _activation(layer.activation)
            for t in pre:
                best = min(best, breakpoint_distance(act, t))
            z = np.array([eval012(act, t).value for t in pre])
    return best


# ---------------------------------------------------------------------------
# jet forward pass
# ---------------------------------------------------------------------------


def _jet_dot(row: list[Jet2], zs: list[Jet2], n: int) -> Jet2:
    acc = Jet2.constant(0.0, n)
    for wj, zj in zip(row, zs):
        acc = acc + jet2_mul(wj, zj)
    return acc


def _jet_softmax_row(row: list[Jet2]) -> list[Jet2]:
    exps = [jet2_exp(u) for u in row]
    total = exps[0]
    for e in exps[1:]:
        total = total + e
    inv = jet2_reciprocal(total)
    return [jet2_mul(e, inv) for e in exps]


class JetForwardResult:
    def __init__(self, value: np.ndarray, grad: np.ndarray, hess: np.ndarray, hits: int):
        self.value = value
        self.grad = grad  # (n_out, n_theta)
        self.hess = hess  # (n_out, n_theta, n_theta)
        self.breakpoint_hits = hits


def forward_jet2(spec: NetworkSpec, theta, x) -> JetForwardResult:
    """Forward pass carrying exact second-order parameter jets.

    Tied positions reuse the same seed jet, so their gradient
    contributions accumulate across all occurrences automatically.
    """
    th = _as_theta(spec, theta)
    n = spec.n_params
    hits = 0

    xa = np.asarray(x, dtype=float)
    if xa.ndim == 1:
        z: list[list[Jet2]] = [[Jet2.constant(v, n)] for v in xa]  # rows x 1 col
        cols = 1
    else:
        z = [[Jet2.constant(v, n) for v in row] for row in xa]
        cols = xa.shape[1]

    for layer, off in zip(spec.layers, spec.param_offsets()):
        if isinstance(layer, SoftmaxAttention):
            d, s = layer.model_dim, layer.seq_len
            if len(z) != d or cols != s:
                raise ValueError("attention layer needs a (model_dim, seq_len) input")
            mats = []
            for m in range(3):  # Wq, Wk, Wv seeds
                base = off + m * d * d
                mats.append(
                    [
                        [Jet2.seed(th[base + i * d + j], base + i * d + j, n) for j in range(d)]
                        for i in range(d)
                    ]
                )
            wq, wk, wv = mats

            def matmul(a, b, rows, inner, colsn):
                return [
                    [_jet_dot([a[i][k] for k in range(inner)], [b[k][j] for k in range(inner)], n) for j in range(colsn)]
                    for i in range(rows)
                ]

            q = matmul(wq, z, d, d, s)
            k = matmul(wk, z, d, d, s)
            v = matmul(wv, z, d, d, s)
            scale = 1.0 / math.sqrt(s)
            logits = [
                [
                    jet2_mul(Jet2.constant(scale, n), _jet_dot(q[i], k[j], n))
                    for j in range(d)
                ]
                for i in range(d)
            ]
            attn = [_jet_softmax_row(row) for row in logits]
            z = matmul(attn, v, d, d, s)
            cols = s
        else:
            if cols > 1:
                # column-stack the matrix into a vector of jets
                z = [[z[i][j]] for j in range(cols) for i in range(len(z))]
                cols = 1
            if len(z) != layer.in_dim:
                raise ValueError(f"input dim {len(z)} != layer in_dim {layer.in_dim}")
            p_off = off
            if isinstance(layer, Dense):
                wjets = [
                    [
                        Jet2.seed(th[p_off + i * layer.in_dim + j], p_off + i * layer.in_dim + j, n)
                        for j in range(layer.in_dim)
                    ]
                    for i in range(layer.out_dim)
                ]
            else:
                pat = layer.tie_pattern
                wjets = [
                    [Jet2.seed(th[p_off + pat[i][j]], p_off + pat[i][j], n) for j in range(layer.in_dim)]
                    for i in range(layer.out_dim)
                ]
            act = _activation(layer.activation)
            zin = [row[0] for row in z]
            out = []
            for i in range(layer.out_dim):
                pre = _jet_dot(wjets[i], zin, n)
                post, hit = jet2_lift(act, pre)
                hits += int(hit)
                out.append([post])
            z = out

    flat = [z[i][j] for j in range(cols) for i in range(len(z))]
    value = np.array([u.value for u in flat])
    grad = np.stack([u.grad for u in flat])
    hess = np.stack([u.hess for u in flat])
    return JetForwardResult(value, grad, hess, hits)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def spec_to_json(spec: NetworkSpec) -> str:
    layers = []
    for l in spec.layers:
        if isinstance(l, Dense):
            layers.append(
                {"kind": "dense", "dims": [l.out_dim, l.in_dim], "activation": l.activation}
            )
        elif isinstance(l, Tied):
            layers.append(
                {
                    "kind": "tied",
                    "dims": [l.out_dim, l.in_dim],
                    "activation": l.activation,
                    "tie_pattern": [list(r) for r in l.tie_pattern],
                }
            )
        else:
            layers.append({"kind": "attention", "dims": [l.model_dim, l.seq_len]})
    return json.dumps({"layers": layers}, indent=2)


def spec_from_json(doc: str) -> NetworkSpec:
    data = json.loads(doc)
    layers: list[LayerSpec] = []
    for l in data["layers"]:
        kind = l["kind"]
        if kind == "dense":
            layers.append(Dense(l["dims"][0], l["dims"][1], l.get("activation", "identity")))
        elif kind == "tied":
            layers.append(
                Tied(
                    l["dims"][0],
                    l["dims"][1],
                    tuple(tuple(r) for r in l["tie_pattern"]),
                    l.get("activation", "identity"),
                )
            )
        elif kind == "attention":
            layers.append(SoftmaxAttention(l["dims"][0], l["dims"][1]))
        else:
            raise ValueError(f"unknown layer kind {kind!r}")
    return NetworkSpec(tuple(layers))
