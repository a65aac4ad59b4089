from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, NumericalError, TapeConsumedError

""" small dense feedforward networks with hand-written reverse-mode gradients """

SELU_LAMBDA = 1.0507009873554805
SELU_ALPHA = 1.6732632423543772


class Activation(Enum):
    SELU = "selu"
    RELU = "relu"
    IDENTITY = "identity"


def activate(z: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.SELU:
        return SELU_LAMBDA * np.where(z > 0, z, SELU_ALPHA * np.expm1(np.minimum(z, 0)))
    if activation is Activation.RELU:
        return np.maximum(z, 0)
    return z


def activate_prime(z: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.SELU:
        return SELU_LAMBDA * np.where(z > 0, 1.0, SELU_ALPHA * np.exp(np.minimum(z, 0)))
    if activation is Activation.RELU:
        return (z > 0).astype(np.float64)
    return np.ones_like(z)


@dataclass
class Layer:
    W: np.ndarray  # (out, in)
    b: np.ndarray  # (out,)
    activation: Activation = Activation.IDENTITY


class DenseNet:
    """ stack of affine layers sigma(W x + b) """

    def __init__(self, layers: Sequence[Layer], seed: Optional[int] = None):
        assert len(layers) > 0, "a network needs at least one layer"
        for (k, (prev, nxt)) in enumerate(zip(layers[:-1], layers[1:])):
            if prev.W.shape[0] != nxt.W.shape[1]:
                raise DimensionError("layer {} outputs {} units but layer {} expects {}".format(
                    k, prev.W.shape[0], k + 1, nxt.W.shape[1]))
        for layer in layers:
            if layer.b.shape != (layer.W.shape[0],):
                raise DimensionError("bias shape {} does not match weights {}".format(layer.b.shape, layer.W.shape))
        self.layers = list(layers)
        self.seed = seed

    def __repr__(self):
        return "DenseNet(dims={}, activations={})".format(
            self.layer_dims, [layer.activation.value for layer in self.layers])

    @property
    def layer_dims(self) -> List[int]:
        return [self.layers[0].W.shape[1]] + [layer.W.shape[0] for layer in self.layers]

    @property
    def in_dim(self) -> int:
        return self.layers[0].W.shape[1]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].W.shape[0]

    def parameters(self) -> List[np.ndarray]:
        """ [W0, b0, W1, b1, ...]; the arrays themselves, so updates are in place """
        params = []
        for layer in self.layers:
            params.extend([layer.W, layer.b])
        return params

    def copy(self) -> "DenseNet":
        return DenseNet([Layer(layer.W.copy(), layer.b.copy(), layer.activation) for layer in self.layers], self.seed)

    def to_dict(self) -> dict:
        return {
            "layer_dims": self.layer_dims,
            "activations": [layer.activation.value for layer in self.layers],
            "weights": [layer.W.tolist() for layer in self.layers],
            "biases": [layer.b.tolist() for layer in self.layers],
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "DenseNet":
        layers = [
            Layer(np.array(W, dtype=np.float64).reshape(out_dim, in_dim), np.array(b, dtype=np.float64), Activation(act))
            for (W, b, act, in_dim, out_dim)
            in zip(d["weights"], d["biases"], d["activations"], d["layer_dims"][:-1], d["layer_dims"][1:])]
        return DenseNet(layers, d.get("seed"))


class DropoutMask:
    """ inverted dropout: kept units are divided by p_keep so the expected
    activation is unchanged; p_keep = 1 disables masking entirely """

    def __init__(self, p_keep: float, rng: np.random.Generator):
        assert 0 < p_keep <= 1, "p_keep must lie in (0, 1], got {}".format(p_keep)
        self.p_keep = p_keep
        self.rng = rng

    @staticmethod
    def from_drop_probability(p: float, seed: Optional[int] = None) -> "DropoutMask":
        return DropoutMask(1.0 - p, np.random.default_rng(seed))

    def __repr__(self):
        return "DropoutMask(p_keep={})".format(self.p_keep)

    def sample(self, shape) -> Optional[np.ndarray]:
        if self.p_keep == 1:
            return None
        return (self.rng.random(shape) < self.p_keep) / self.p_keep


@dataclass
class GradientTape:
    net: DenseNet
    inputs: List[np.ndarray] = field(default_factory=list)       # input seen by each layer
    pre_activations: List[np.ndarray] = field(default_factory=list)
    scales: List[Optional[np.ndarray]] = field(default_factory=list)  # dropout scaling applied to each layer's output
    squeeze: bool = False
    consumed: bool = False


def forward(net: DenseNet, x: np.ndarray, mask: Optional[DropoutMask] = None) -> Tuple[np.ndarray, GradientTape]:
    """ x is either one sample (in,) or a batch (n, in); dropout touches hidden layers only """
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    a = x[None, :] if squeeze else x
    if a.ndim != 2 or a.shape[1] != net.in_dim:
        raise DimensionError("input shape {} does not match network input dimension {}".format(x.shape, net.in_dim))

    tape = GradientTape(net, squeeze=squeeze)
    last = len(net.layers) - 1
    for (k, layer) in enumerate(net.layers):
        tape.inputs.append(a)
        z = a @ layer.W.T + layer.b
        tape.pre_activations.append(z)
        a = activate(z, layer.activation)
        scale = mask.sample(a.shape) if (mask is not None and k < last) else None
        if scale is not None:
            a = a * scale
        tape.scales.append(scale)
    return (a[0] if squeeze else a), tape


def backward(tape: GradientTape, dloss_dy: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
    """ gradients of a scalar loss w.r.t. every parameter (ordered as
    DenseNet.parameters()) and w.r.t. the input; summed over the batch """
    if tape.consumed:
        raise TapeConsumedError("backward already ran on this tape")
    tape.consumed = True

    delta = np.asarray(dloss_dy, dtype=np.float64)
    if tape.squeeze:
        delta = delta[None, :]
    grads: List[np.ndarray] = []
    for k in reversed(range(len(tape.net.layers))):
        layer = tape.net.layers[k]
        if tape.scales[k] is not None:
            delta = delta * tape.scales[k]
        dz = delta * activate_prime(tape.pre_activations[k], layer.activation)
        grads = [dz.T @ tape.inputs[k], dz.sum(axis=0)] + grads
        delta = dz @ layer.W
    return grads, (delta[0] if tape.squeeze else delta)


def init_net(
    layer_dims: Sequence[int],
    activation: Activation,
    seed: Optional[int] = None,
    output_activation: Activation = Activation.IDENTITY
) -> DenseNet:
    """ uniform fan-based weights in [-s, s], s = sqrt(6 / (fan_in + fan_out)); zero biases """
    assert len(layer_dims) >= 2, "need input and output dimensions, got {}".format(layer_dims)
    assert all(d > 0 for d in layer_dims), "dimensions must be positive, got {}".format(layer_dims)
    rng = np.random.default_rng(seed)
    layers = []
    for (k, (fan_in, fan_out)) in enumerate(zip(layer_dims[:-1], layer_dims[1:])):
        s = np.sqrt(6.0 / (fan_in + fan_out))
        act = output_activation if k == len(layer_dims) - 2 else activation
        layers.append(Layer(rng.uniform(-s, s, size=(fan_out, fan_in)), np.zeros(fan_out), act))
    return DenseNet(layers, seed)


def identity_net(dim: int = 1) -> DenseNet:
    return DenseNet([Layer(np.eye(dim), np.zeros(dim), Activation.IDENTITY)])


def check_finite(arrays: Sequence[np.ndarray], what: str):
    for (i, array) in enumerate(arrays):
        if not np.isfinite(array).all():
            raise NumericalError("{} #{} contains NaN or Inf".format(what, i))


def numerical_gradient(f: Callable[[], float], params: Sequence[np.ndarray], step: float = 1e-6) -> List[np.ndarray]:
    """ central differences of f w.r.t. each parameter array, perturbed in place """
    grads = []
    for p in params:
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            original = p[idx]
            p[idx] = original + step
            up = f()
            p[idx] = original - step
            down = f()
            p[idx] = original
            g[idx] = (up - down) / (2 * step)
        grads.append(g)
    return grads
