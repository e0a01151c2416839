import math

import numpy as np
import pytest

from gdlab.network import (
    Dense,
    NetworkSpec,
    ParamVector,
    SoftmaxAttention,
    Tied,
    breakpoint_proximity,
    conv1d_tie_pattern,
    forward,
    forward_jet2,
    softmax_rows,
    spec_from_json,
    spec_to_json,
)

RELU2 = NetworkSpec((Dense(1, 1, "relu"), Dense(1, 1, "relu")))


def test_forward_two_layer_relu_positive():
    assert forward(RELU2, [1.0, 1.0], [1.0]) == pytest.approx([1.0])


def test_forward_two_layer_relu_dead():
    assert forward(RELU2, [-1.0, 1.0], [1.0]) == pytest.approx([0.0])


def test_forward_dim_mismatch():
    with pytest.raises(ValueError):
        forward(RELU2, [1.0, 1.0], [1.0, 2.0])


def test_spec_rejects_bad_chain():
    with pytest.raises(ValueError):
        NetworkSpec((Dense(2, 1), Dense(1, 3)))


def test_param_vector_length_check():
    with pytest.raises(ValueError):
        ParamVector(RELU2, [1.0])


def test_attention_zero_queries_average_values(rng):
    spec = NetworkSpec((SoftmaxAttention(2, 3),))
    d = 2
    wv = rng.normal(size=(d, d))
    theta = np.concatenate([np.zeros(d * d), np.zeros(d * d), wv.ravel()])
    x = rng.normal(size=(d, 3))
    out = forward(spec, theta, x).reshape(d, 3, order="F")
    v = wv @ x
    expected = np.repeat(v.mean(axis=0, keepdims=True).T, 1, axis=1)
    # uniform attention averages the value matrix rows
    uniform = np.full((d, d), 1.0 / d) @ v
    assert np.allclose(out, uniform, atol=1e-14)


def test_softmax_rows_sum_to_one(rng):
    m = rng.normal(size=(5, 5)) * 10
    s = softmax_rows(m)
    assert np.max(np.abs(s.sum(axis=1) - 1.0)) < 1e-12


def test_forward_jet2_two_layer_example():
    res = forward_jet2(RELU2, [1.0, 2.0], [1.0])
    assert res.value == pytest.approx([2.0])
    assert np.allclose(res.grad, [[2.0, 1.0]])
    assert np.allclose(res.hess[0], [[0.0, 1.0], [1.0, 0.0]])
    assert res.breakpoint_hits == 0


def test_forward_jet2_linear_layer_zero_hessian(rng):
    spec = NetworkSpec((Dense(2, 3, "identity"),))
    theta = rng.normal(size=6)
    res = forward_jet2(spec, theta, rng.normal(size=3))
    assert np.all(res.hess == 0.0)


def test_forward_jet2_tied_accumulates():
    spec = NetworkSpec((Tied(2, 1, ((0,), (0,)), "identity"), Dense(1, 2, "identity")))
    # head weights fixed at 1 so the output is the sum over tied positions
    res = forward_jet2(spec, [3.0, 1.0, 1.0], [1.0])
    assert res.grad[0, 0] == pytest.approx(2.0)


def test_tied_pattern_validation():
    with pytest.raises(ValueError):
        Tied(2, 1, ((0,), (2,)), "identity")  # index 1 missing
    with pytest.raises(ValueError):
        Tied(2, 2, ((0, 1),), "identity")  # wrong shape


def test_conv1d_tie_pattern_is_circulant():
    pat = conv1d_tie_pattern(3)
    assert pat == ((0, 1, 2), (2, 0, 1), (1, 2, 0))
    Tied(3, 3, pat, "identity")  # validates


def test_breakpoint_proximity_examples():
    assert breakpoint_proximity(RELU2, [0.0, 1.0], [1.0]) == 0.0
    assert breakpoint_proximity(RELU2, [1.0, 1.0], [1.0]) == 1.0
    sig = NetworkSpec((Dense(1, 1, "sigmoid"), Dense(1, 1, "sigmoid")))
    assert breakpoint_proximity(sig, [1.0, 1.0], [1.0]) == math.inf


def test_breakpoint_hit_counted():
    res = forward_jet2(RELU2, [0.0, 1.0], [1.0])
    assert res.breakpoint_hits >= 1


def test_json_roundtrip():
    spec = NetworkSpec(
        (
            SoftmaxAttention(2, 2),
            Dense(3, 4, "relu"),
            Tied(3, 3, conv1d_tie_pattern(3), "tanh"),
            Dense(1, 3, "leaky_relu(0.1)"),
        )
    )
    assert spec_from_json(spec_to_json(spec)) == spec


def _fd_grad(spec, theta, x, h=1e-6):
    n = theta.size
    out0 = forward(spec, theta, x)
    g = np.zeros((out0.size, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        g[:, i] = (forward(spec, theta + e, x) - forward(spec, theta - e, x)) / (2 * h)
    return g


def _fd_hess(spec, theta, x, h=1e-4):
    n = theta.size
    g0 = forward_jet2(spec, theta, x).grad
    hs = np.zeros((g0.shape[0], n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        hs[:, :, i] = (
            forward_jet2(spec, theta + e, x).grad - forward_jet2(spec, theta - e, x).grad
        ) / (2 * h)
    return hs


SPECS = [
    NetworkSpec((Dense(2, 2, "relu"), Dense(1, 2, "tanh"))),
    NetworkSpec((Dense(3, 2, "sigmoid"), Dense(2, 3, "relu"), Dense(1, 2, "identity"))),
    NetworkSpec((Tied(3, 3, conv1d_tie_pattern(3), "relu"), Dense(1, 3, "tanh"))),
    NetworkSpec((SoftmaxAttention(2, 2), Dense(1, 4, "tanh"))),
]


@pytest.mark.parametrize("spec", SPECS)
def test_jets_match_finite_differences(spec, rng):
    for _ in range(10):
        theta = rng.normal(size=spec.n_params)
        if isinstance(spec.layers[0], SoftmaxAttention):
            x = rng.normal(size=(spec.layers[0].model_dim, spec.layers[0].seq_len))
        else:
            x = rng.normal(size=spec.layers[0].in_dim)
        if breakpoint_proximity(spec, theta, x) <= 1e-3:
            continue
        res = forward_jet2(spec, theta, x)
        scale_g = max(1.0, np.max(np.abs(res.grad)))
        assert np.max(np.abs(res.grad - _fd_grad(spec, theta, x))) / scale_g < 1e-5
        scale_h = max(1.0, np.max(np.abs(res.hess)))
        assert np.max(np.abs(res.hess - _fd_hess(spec, theta, x))) / scale_h < 1e-3
        assert np.max(np.abs(res.hess - res.hess.transpose(0, 2, 1))) < 1e-8


def test_measure_probe_small(rng):
    # proximity below eps should scale (at most) linearly in eps; sampled
    # away from the dead-ReLU wedge where a pre-activation is exactly 0
    # on a set of positive measure
    spec = NetworkSpec((Dense(2, 2, "leaky_relu(0.1)"), Dense(1, 2, "leaky_relu(0.1)")))
    n = 20_000
    thetas = rng.normal(size=(n, spec.n_params)) + 1.0
    prox = np.array([breakpoint_proximity(spec, t, [0.9, 1.3]) for t in thetas])
    hits = np.count_nonzero(prox == 0.0)
    assert hits == 0
    frac_small = np.mean(prox < 1e-3)
    frac_big = np.mean(prox < 1e-1)
    assert frac_small <= 0.3 * max(frac_big, 1e-12)


def test_dead_relu_hits_breakpoint_exactly():
    # with the first unit dead, the next pre-activation is exactly 0
    assert breakpoint_proximity(RELU2, [-0.7, 1.3], [1.0]) == 0.0
