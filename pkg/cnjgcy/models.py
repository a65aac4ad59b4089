from dataclasses import dataclass, field, replace
from enum import Enum
from logging import debug
from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import ConfigError, DimensionError, NumericalError
from .maps import (EPS_CLAMP, MapSpec, eval_map, phi, phi_inverse,
                   phi_inverse_prime, phi_prime, tent_map, tent_prime)
from .network import (Activation, DenseNet, DropoutMask, backward, forward,
                      identity_net, init_net)
from .optim import OptimizerState

""" the four architectures compared on each map:

    conjugacy-ae  h^-1 . phi^-1 . T_2 . phi . h   (no trainable latent parameters)
    logistic-ae   h^-1 . (c1 y + c2 y^2) . h      (c1, c2 trained jointly with h, h^-1)
    fnn           one dense net x -> U(x)
    pinn          one dense net, loss adds the residual against the governing map
"""


class Variant(Enum):
    CONJUGACY_AE = "conjugacy-ae"
    LOGISTIC_AE = "logistic-ae"
    FNN = "fnn"
    PINN = "pinn"

    @property
    def is_autoencoder(self) -> bool:
        return self in (Variant.CONJUGACY_AE, Variant.LOGISTIC_AE)

    @staticmethod
    def parse(name: str) -> "Variant":
        aliases = {
            "model1": Variant.CONJUGACY_AE, "1": Variant.CONJUGACY_AE,
            "model2": Variant.LOGISTIC_AE, "2": Variant.LOGISTIC_AE,
            "model3": Variant.FNN, "3": Variant.FNN,
            "model4": Variant.PINN, "4": Variant.PINN,
        }
        key = name.lower()
        if key in aliases:
            return aliases[key]
        try:
            return Variant(key)
        except ValueError:
            raise ConfigError("unknown model {!r}; choose from {} or model1..model4".format(
                name, ", ".join(v.value for v in Variant)))


# Table-1 sweep of initial logistic-latent coefficients
LOGISTIC_LATENT_INITS = [(3.0, -3.0), (3.1, -3.1), (3.5, -3.5), (3.9, -3.9), (4.0, -4.0)]


@dataclass
class ModelConfig:
    variant: Variant
    encoder_dims: List[int]
    decoder_dims: List[int] = field(default_factory=list)   # empty for single-net variants
    activation: Activation = Activation.SELU
    c1_init: float = 3.5
    c2_init: float = -3.5
    target: Optional[MapSpec] = None
    latent_clamp: float = EPS_CLAMP
    lambda_res: float = 1.0
    recon_weight: float = 1.0
    pred_weight: float = 1.0
    train_latent: bool = True

    def __post_init__(self):
        if self.variant.is_autoencoder:
            if not self.decoder_dims:
                raise ConfigError("{} needs both encoder and decoder dimensions".format(self.variant.value))
            if self.encoder_dims[-1] != 1 or self.decoder_dims[0] != 1:
                raise DimensionError("the latent space is one-dimensional; got encoder {} decoder {}".format(
                    self.encoder_dims, self.decoder_dims))
        elif self.decoder_dims:
            raise ConfigError("{} is a single network; decoder_dims must be empty".format(self.variant.value))
        if self.variant is Variant.PINN and self.target is None:
            raise ConfigError("pinn needs the target map for its residual")

    @property
    def in_dim(self) -> int:
        return self.encoder_dims[0]

    @staticmethod
    def for_variant(
        variant: Variant,
        width: int,
        layers_in: int,
        layers_out: int,
        activation: Activation,
        in_dim: int = 1,
        **kwargs
    ) -> "ModelConfig":
        """ layers_in hidden layers build h, layers_out build h^-1; single-net
        variants stack the same total number of hidden layers """
        if variant.is_autoencoder:
            return ModelConfig(
                variant,
                encoder_dims=[in_dim] + [width] * layers_in + [1],
                decoder_dims=[1] + [width] * layers_out + [1],
                activation=activation, **kwargs)
        return ModelConfig(
            variant,
            encoder_dims=[in_dim] + [width] * (layers_in + layers_out) + [1],
            activation=activation, **kwargs)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "encoder_dims": list(self.encoder_dims),
            "decoder_dims": list(self.decoder_dims),
            "activation": self.activation.value,
            "c1_init": self.c1_init,
            "c2_init": self.c2_init,
            "target": self.target.to_dict() if self.target else None,
            "latent_clamp": self.latent_clamp,
            "lambda_res": self.lambda_res,
            "recon_weight": self.recon_weight,
            "pred_weight": self.pred_weight,
            "train_latent": self.train_latent,
        }

    @staticmethod
    def from_dict(d: dict) -> "ModelConfig":
        d = dict(d)
        d["variant"] = Variant(d["variant"])
        d["activation"] = Activation(d["activation"])
        d["target"] = MapSpec.from_dict(d["target"]) if d.get("target") else None
        return ModelConfig(**d)


@dataclass
class ModelState:
    config: ModelConfig
    encoder: Optional[DenseNet] = None   # h for autoencoders, the whole net otherwise
    decoder: Optional[DenseNet] = None
    latent: Optional[np.ndarray] = None  # [c1, c2] for logistic-ae
    optimizer: Optional[OptimizerState] = None

    @property
    def variant(self) -> Variant:
        return self.config.variant

    @property
    def c1(self) -> Optional[float]:
        return float(self.latent[0]) if self.latent is not None else None

    @property
    def c2(self) -> Optional[float]:
        return float(self.latent[1]) if self.latent is not None else None

    def nets(self) -> List[DenseNet]:
        return [net for net in (self.encoder, self.decoder) if net is not None]

    def parameters(self) -> List[np.ndarray]:
        """ trainable arrays: encoder, decoder, then the latent coefficients """
        params = [p for net in self.nets() for p in net.parameters()]
        if self.latent is not None and self.config.train_latent:
            params.append(self.latent)
        return params

    def copy(self) -> "ModelState":
        return ModelState(
            self.config,
            self.encoder.copy() if self.encoder else None,
            self.decoder.copy() if self.decoder else None,
            self.latent.copy() if self.latent is not None else None,
            None)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "config": self.config.to_dict(),
            "c1": self.c1,
            "c2": self.c2,
            "target_spec": self.config.target.to_dict() if self.config.target else None,
            "encoder": self.encoder.to_dict() if self.encoder else None,
            "decoder": self.decoder.to_dict() if self.decoder else None,
            "optimizer": self.optimizer.to_dict() if self.optimizer else None,
        }

    @staticmethod
    def from_dict(d: dict) -> "ModelState":
        config = ModelConfig.from_dict(d["config"])
        return ModelState(
            config,
            DenseNet.from_dict(d["encoder"]) if d.get("encoder") else None,
            DenseNet.from_dict(d["decoder"]) if d.get("decoder") else None,
            np.array([d["c1"], d["c2"]], dtype=np.float64) if d.get("c1") is not None else None,
            OptimizerState.from_dict(d["optimizer"]) if d.get("optimizer") else None)


def init_model(config: ModelConfig, seed: Optional[int] = None) -> ModelState:
    encoder_seed, decoder_seed = (int(s) for s in np.random.SeedSequence(seed).generate_state(2))
    encoder = init_net(config.encoder_dims, config.activation, encoder_seed)
    decoder = init_net(config.decoder_dims, config.activation, decoder_seed) if config.decoder_dims else None
    latent = np.array([config.c1_init, config.c2_init]) if config.variant is Variant.LOGISTIC_AE else None
    return ModelState(config, encoder, decoder, latent)


def with_forced_identity(config: ModelConfig, c1: float = 4.0, c2: float = -4.0) -> ModelState:
    """ a one-dimensional model whose learned maps are exactly the identity """
    config = replace(config, encoder_dims=[1, 1], decoder_dims=[1, 1] if config.variant.is_autoencoder else [])
    latent = np.array([c1, c2], dtype=np.float64) if config.variant is Variant.LOGISTIC_AE else None
    return ModelState(
        config,
        identity_net(),
        identity_net() if config.variant.is_autoencoder else None,
        latent)


def as_inputs(x: Union[float, np.ndarray], in_dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        x = x[:, None] if in_dim == 1 else x[None, :]
    if x.shape[1] != in_dim:
        raise DimensionError("model expects {} inputs per sample, got {}".format(in_dim, x.shape[1]))
    return x


def shifted_window(x: np.ndarray, ux: np.ndarray) -> np.ndarray:
    """ the window one step later: drop the oldest value, append U(x); for
    one-dimensional inputs this is U(x) itself """
    return np.hstack([x[:, 1:], np.asarray(ux, dtype=np.float64).reshape(-1, 1)])


# latent transforms: value plus derivative w.r.t. y

def conjugacy_latent(y: np.ndarray, eps: float = EPS_CLAMP) -> Tuple[np.ndarray, np.ndarray]:
    """ phi^-1(T_2(phi(clamp(y)))); the clamp passes gradients inside [0, 1]
    and blocks them outside; derivatives are evaluated at least eps from the
    endpoints where phi' is unbounded """
    if not np.isfinite(y).all():
        raise NumericalError("encoder output is not finite")
    inside = (y >= 0) & (y <= 1)
    yc = np.clip(y, 0.0, 1.0)
    u = phi(yc)
    value = phi_inverse(tent_map(u, 2.0))

    yd = np.clip(y, eps, 1 - eps)
    ud = phi(yd)
    slope = phi_inverse_prime(tent_map(ud, 2.0)) * tent_prime(ud, 2.0) * phi_prime(yd)
    return value, np.where(inside, slope, 0.0)


def logistic_latent(y: np.ndarray, c: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return c[0] * y + c[1] * y**2, c[0] + 2 * c[1] * y


def _latent(state: ModelState, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    if state.variant is Variant.CONJUGACY_AE:
        return conjugacy_latent(y, state.config.latent_clamp)
    return logistic_latent(y, state.latent)


def predict(state: ModelState, x: Union[float, np.ndarray], dropout: Optional[DropoutMask] = None):
    """ one-step prediction U~(x); returns a float for scalar input, else a 1-D array """
    inputs = as_inputs(x, state.config.in_dim)
    if state.variant.is_autoencoder:
        y, _ = forward(state.encoder, inputs, dropout)
        latent, _ = _latent(state, y)
        out, _ = forward(state.decoder, latent, dropout)
    else:
        out, _ = forward(state.encoder, inputs, dropout)
    out = out[:, 0]
    return float(out[0]) if np.ndim(x) == 0 else out


def conjugacy_ae_predict(state: ModelState, x, dropout: Optional[DropoutMask] = None):
    assert state.variant is Variant.CONJUGACY_AE
    return predict(state, x, dropout)


def logistic_ae_predict(state: ModelState, x, dropout: Optional[DropoutMask] = None):
    assert state.variant is Variant.LOGISTIC_AE
    return predict(state, x, dropout)


def fnn_predict(state: ModelState, x, dropout: Optional[DropoutMask] = None):
    assert not state.variant.is_autoencoder
    return predict(state, x, dropout)


def reconstruct(state: ModelState, x: np.ndarray, dropout: Optional[DropoutMask] = None) -> np.ndarray:
    """ h^-1(h(x)) """
    y, _ = forward(state.encoder, as_inputs(x, state.config.in_dim), dropout)
    out, _ = forward(state.decoder, y, dropout)
    return out[:, 0]


@dataclass
class LossTerms:
    recon: float
    pred: float
    residual: float
    total: float


def _mse(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.mean((a - b)**2))


def _checked(terms: LossTerms) -> LossTerms:
    if not np.isfinite([terms.recon, terms.pred, terms.residual, terms.total]).all():
        raise NumericalError("non-finite loss {}".format(terms))
    return terms


def pinn_loss(state: ModelState, x: np.ndarray, ux: np.ndarray) -> float:
    """ MSE(net(x), U(x)) + lambda_res * MSE(net(x), f(x)) with f the governing map """
    return model_loss(state, x, ux).total


def model_loss(state: ModelState, x: np.ndarray, ux: np.ndarray) -> LossTerms:
    cfg = state.config
    inputs = as_inputs(x, cfg.in_dim)
    ux = np.asarray(ux, dtype=np.float64).reshape(-1)
    pred = _mse(predict(state, inputs), ux)
    if cfg.variant.is_autoencoder:
        recon = _mse(reconstruct(state, shifted_window(inputs, ux)), ux)
        return _checked(LossTerms(recon, pred, 0.0, cfg.recon_weight * recon + cfg.pred_weight * pred))
    if cfg.variant is Variant.PINN:
        residual = _mse(predict(state, inputs), eval_map(cfg.target, inputs[:, -1]))
        return _checked(LossTerms(0.0, pred, residual, pred + cfg.lambda_res * residual))
    return _checked(LossTerms(0.0, pred, 0.0, pred))


def loss_and_gradients(
    state: ModelState,
    x: np.ndarray,
    ux: np.ndarray,
    dropout: Optional[DropoutMask] = None
) -> Tuple[LossTerms, List[np.ndarray]]:
    """ batch-mean losses and their exact gradients, ordered as state.parameters() """
    cfg = state.config
    inputs = as_inputs(x, cfg.in_dim)
    ux = np.asarray(ux, dtype=np.float64).reshape(-1, 1)
    n = inputs.shape[0]

    if not cfg.variant.is_autoencoder:
        out, tape = forward(state.encoder, inputs, dropout)
        pred = _mse(out, ux)
        dout = 2 * (out - ux) / n
        residual = 0.0
        if cfg.variant is Variant.PINN:
            governed = eval_map(cfg.target, inputs[:, -1]).reshape(-1, 1)
            residual = _mse(out, governed)
            dout = dout + cfg.lambda_res * 2 * (out - governed) / n
        terms = _checked(LossTerms(0.0, pred, residual, pred + cfg.lambda_res * residual))
        grads, _ = backward(tape, dout)
        return terms, grads

    # prediction path: x -> h -> latent -> h^-1
    y, enc_tape = forward(state.encoder, inputs, dropout)
    latent, dlatent_dy = _latent(state, y)
    out, dec_tape = forward(state.decoder, latent, dropout)
    pred = _mse(out, ux)
    dout = cfg.pred_weight * 2 * (out - ux) / n
    dec_grads, dlatent = backward(dec_tape, dout)
    enc_grads, _ = backward(enc_tape, dlatent * dlatent_dy)

    # reconstruction path: U(x) -> h -> h^-1
    y_r, enc_tape_r = forward(state.encoder, shifted_window(inputs, ux), dropout)
    out_r, dec_tape_r = forward(state.decoder, y_r, dropout)
    recon = _mse(out_r, ux)
    dout_r = cfg.recon_weight * 2 * (out_r - ux) / n
    dec_grads_r, dy_r = backward(dec_tape_r, dout_r)
    enc_grads_r, _ = backward(enc_tape_r, dy_r)

    terms = _checked(LossTerms(recon, pred, 0.0, cfg.recon_weight * recon + cfg.pred_weight * pred))
    grads = [a + b for (a, b) in zip(enc_grads, enc_grads_r)] + [a + b for (a, b) in zip(dec_grads, dec_grads_r)]
    if state.latent is not None and cfg.train_latent:
        grads.append(np.array([np.sum(dlatent * y), np.sum(dlatent * y**2)]))
    debug("losses %s", terms)
    return terms, grads
