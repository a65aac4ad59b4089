import numpy as np
import pytest

from cnjgcy.errors import DimensionError, NumericalError, TapeConsumedError
from cnjgcy.network import (SELU_ALPHA, SELU_LAMBDA, Activation, DenseNet,
                            DropoutMask, Layer, activate, backward,
                            check_finite, forward, identity_net, init_net,
                            numerical_gradient)


def _loss(net, x, target):
    out, _ = forward(net, x)
    return 0.5 * float(np.sum((out - target)**2))


def test_selu_constants():
    z = np.array([-1.0, 0.0, 2.0])
    out = activate(z, Activation.SELU)
    assert out[1] == 0.0
    assert abs(out[2] - 2 * SELU_LAMBDA) < 1e-15
    assert abs(out[0] - SELU_LAMBDA * SELU_ALPHA * (np.exp(-1) - 1)) < 1e-15
    assert (activate(z, Activation.RELU) == np.array([0.0, 0.0, 2.0])).all()


def test_init_shapes_and_bounds():
    net = init_net([1, 16, 16, 1], Activation.SELU, seed=3)
    assert net.layer_dims == [1, 16, 16, 1]
    assert [layer.W.shape for layer in net.layers] == [(16, 1), (16, 16), (1, 16)]
    assert net.layers[-1].activation is Activation.IDENTITY
    assert all(layer.activation is Activation.SELU for layer in net.layers[:-1])
    for layer in net.layers:
        bound = np.sqrt(6.0 / sum(layer.W.shape))
        assert np.abs(layer.W).max() <= bound
        assert (layer.b == 0).all()


def test_init_is_seeded():
    a = init_net([1, 8, 1], Activation.RELU, seed=11)
    b = init_net([1, 8, 1], Activation.RELU, seed=11)
    c = init_net([1, 8, 1], Activation.RELU, seed=12)
    assert all((p == q).all() for (p, q) in zip(a.parameters(), b.parameters()))
    assert not all((p == q).all() for (p, q) in zip(a.parameters(), c.parameters()))


def test_forward_shapes():
    net = init_net([3, 5, 2], Activation.SELU, seed=0)
    single, _ = forward(net, np.ones(3))
    batch, _ = forward(net, np.ones((4, 3)))
    assert single.shape == (2,)
    assert batch.shape == (4, 2)
    assert np.allclose(batch[0], single)
    with pytest.raises(DimensionError):
        forward(net, np.ones(2))


def test_mismatched_layers():
    with pytest.raises(DimensionError):
        DenseNet([Layer(np.ones((4, 1)), np.zeros(4)), Layer(np.ones((1, 3)), np.zeros(1))])
    with pytest.raises(DimensionError):
        DenseNet([Layer(np.ones((4, 1)), np.zeros(3))])


def test_identity_net():
    out, _ = forward(identity_net(), np.array([[0.25], [0.7]]))
    assert (out == np.array([[0.25], [0.7]])).all()


def test_backward_matches_finite_differences():
    """ 20 random small nets, alternating activations, relative error below 1e-5 on every parameter """
    rng = np.random.default_rng(2024)
    for trial in range(20):
        dims = [int(rng.integers(1, 4))] + [int(d) for d in rng.integers(2, 6, size=int(rng.integers(1, 3)))] + [1]
        net = init_net(dims, Activation.SELU if trial % 2 else Activation.RELU, seed=trial)
        x = rng.normal(size=(7, dims[0]))
        target = rng.normal(size=(7, 1))
        out, tape = forward(net, x)
        grads, _ = backward(tape, out - target)
        numeric = numerical_gradient(lambda: _loss(net, x, target), net.parameters())
        for (analytic, approx) in zip(grads, numeric):
            relative = np.linalg.norm(analytic - approx) / max(np.linalg.norm(analytic) + np.linalg.norm(approx), 1e-8)
            assert relative < 1e-5, "trial {} dims {}: relative error {}".format(trial, dims, relative)


def test_input_gradient():
    net = init_net([2, 4, 1], Activation.SELU, seed=5)
    x = np.array([[0.3, -0.2]])
    out, tape = forward(net, x)
    _, dx = backward(tape, np.ones_like(out))
    h = 1e-6
    for i in range(2):
        step = np.zeros_like(x)
        step[0, i] = h
        numeric = (forward(net, x + step)[0] - forward(net, x - step)[0]).item() / (2 * h)
        assert abs(dx[0, i] - numeric) < 1e-7


def test_tape_is_single_use():
    net = init_net([1, 3, 1], Activation.RELU, seed=0)
    out, tape = forward(net, np.array([[0.5]]))
    backward(tape, np.ones_like(out))
    with pytest.raises(TapeConsumedError):
        backward(tape, np.ones_like(out))


def test_dropout_spares_output_layer():
    net = init_net([1, 64, 1], Activation.SELU, seed=1)
    x = np.full((1, 1), 0.3)
    mask = DropoutMask.from_drop_probability(0.5, seed=0)
    outputs = {forward(net, x, mask)[0].item() for _ in range(20)}
    assert len(outputs) > 1, "masks are redrawn every pass"

    # a single-layer net has no hidden layer to mask
    linear = init_net([1, 1], Activation.SELU, seed=1)
    assert forward(linear, x, mask)[0].item() == forward(linear, x)[0].item()


def test_dropout_disabled_and_expectation():
    assert DropoutMask.from_drop_probability(0.0).sample((3, 3)) is None
    mask = DropoutMask.from_drop_probability(0.2, seed=9)
    scale = mask.sample((200000,))
    assert set(np.unique(scale)) <= {0.0, 1 / 0.8}
    assert abs(scale.mean() - 1.0) < 0.01


def test_dropout_gradients():
    net = init_net([1, 6, 1], Activation.SELU, seed=4)
    x = np.array([[0.1], [0.6], [0.9]])
    target = np.array([[0.2], [0.3], [0.4]])
    mask = DropoutMask.from_drop_probability(0.3, seed=1)
    out, tape = forward(net, x, mask)
    scales = tape.scales
    grads, _ = backward(tape, out - target)

    def masked_loss():
        a = x
        for (layer, scale) in zip(net.layers, scales):
            a = activate(a @ layer.W.T + layer.b, layer.activation)
            if scale is not None:
                a = a * scale
        return 0.5 * float(np.sum((a - target)**2))

    numeric = numerical_gradient(masked_loss, net.parameters())
    for (analytic, approx) in zip(grads, numeric):
        assert np.allclose(analytic, approx, atol=1e-6)


def test_serialisation():
    net = init_net([2, 3, 1], Activation.RELU, seed=8)
    again = DenseNet.from_dict(net.to_dict())
    assert again.layer_dims == net.layer_dims
    assert all((p == q).all() for (p, q) in zip(again.parameters(), net.parameters()))
    assert [layer.activation for layer in again.layers] == [Activation.RELU, Activation.IDENTITY]
    copied = net.copy()
    copied.layers[0].W[0, 0] += 1
    assert copied.layers[0].W[0, 0] != net.layers[0].W[0, 0]


def test_check_finite():
    check_finite([np.ones(3)], "ok")
    with pytest.raises(NumericalError):
        check_finite([np.ones(3), np.array([1.0, np.inf])], "gradient")


def test_zero_dropout_is_identity():
    net = init_net([1, 32, 32, 1], Activation.SELU, seed=2)
    x = np.linspace(0, 1, 9)[:, None]
    masked, _ = forward(net, x, DropoutMask.from_drop_probability(0.0, seed=1))
    plain, _ = forward(net, x)
    assert (masked == plain).all()
