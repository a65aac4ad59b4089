from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .errors import DimensionError
from .network import check_finite

OPTIMIZERS = ("adam", "sgd")


@dataclass
class OptimizerState:
    """ moment accumulators for every trainable array, in parameter order """
    learning_rate: float
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    method: str = "adam"

    @staticmethod
    def for_parameters(params: Sequence[np.ndarray], learning_rate: float, method: str = "adam") -> "OptimizerState":
        assert method in OPTIMIZERS, "unknown optimizer {}".format(method)
        return OptimizerState(
            learning_rate,
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            method=method)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "step": self.step,
            "m": [m.tolist() for m in self.m],
            "v": [v.tolist() for v in self.v],
        }

    @staticmethod
    def from_dict(d: dict) -> "OptimizerState":
        return OptimizerState(
            d["learning_rate"],
            m=[np.array(m, dtype=np.float64) for m in d["m"]],
            v=[np.array(v, dtype=np.float64) for v in d["v"]],
            step=d["step"], beta1=d["beta1"], beta2=d["beta2"], eps=d["eps"], method=d["method"])


def _check_shapes(params: Sequence[np.ndarray], grads: Sequence[np.ndarray]):
    if len(params) != len(grads) or any(p.shape != g.shape for (p, g) in zip(params, grads)):
        raise DimensionError("gradient shapes {} do not match parameter shapes {}".format(
            [g.shape for g in grads], [p.shape for p in params]))


def _commit(params: Sequence[np.ndarray], updated: Sequence[np.ndarray]):
    check_finite(updated, "updated parameter")
    for (p, new) in zip(params, updated):
        p[...] = new


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: OptimizerState
) -> Tuple[Sequence[np.ndarray], OptimizerState]:
    """ bias-corrected adaptive-moment update, in place; parameters and
    state are left untouched if the gradients or the result are not finite """
    _check_shapes(params, grads)
    check_finite(grads, "gradient")

    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    m = [b1 * m + (1 - b1) * g for (m, g) in zip(state.m, grads)]
    v = [b2 * v + (1 - b2) * g * g for (v, g) in zip(state.v, grads)]
    correction1 = 1 - b1**step
    correction2 = 1 - b2**step
    updated = [
        p - state.learning_rate * (mi / correction1) / (np.sqrt(vi / correction2) + state.eps)
        for (p, mi, vi) in zip(params, m, v)]
    _commit(params, updated)

    state.m, state.v, state.step = m, v, step
    return params, state


def sgd_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: OptimizerState
) -> Tuple[Sequence[np.ndarray], OptimizerState]:
    _check_shapes(params, grads)
    check_finite(grads, "gradient")
    _commit(params, [p - state.learning_rate * g for (p, g) in zip(params, grads)])
    state.step += 1
    return params, state


def step(params: Sequence[np.ndarray], grads: Sequence[np.ndarray], state: OptimizerState):
    if state.method == "sgd":
        return sgd_step(params, grads, state)
    return adam_step(params, grads, state)
