from dataclasses import dataclass, replace
from enum import Enum
from logging import info, warning
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .errors import ConfigError, InsufficientEnsembleError
from .models import ModelConfig, ModelState, predict
from .network import DropoutMask
from .training import Dataset, Partition, TrainConfig, train

MC_DROPOUT_P = 0.2


class UqMethod(Enum):
    MC_DROPOUT = "mc-dropout"
    ENSEMBLE = "ensemble"


@dataclass
class UqConfig:
    """ passes: stochastic forward passes (MC dropout)
    ensemble_size: independently initialised members
    dropout_p: probability of dropping a hidden unit
    ddof: 0 for the population standard deviation, 1 for the sample one """
    method: UqMethod = UqMethod.MC_DROPOUT
    passes: int = 100
    ensemble_size: int = 5
    dropout_p: float = MC_DROPOUT_P
    z_value: float = 1.96
    ddof: int = 0
    seed: Optional[int] = None

    def __post_init__(self):
        if self.method is UqMethod.MC_DROPOUT and self.passes < 2:
            raise ConfigError("MC dropout needs at least 2 passes, got {}".format(self.passes))
        if self.method is UqMethod.ENSEMBLE and self.ensemble_size < 2:
            raise ConfigError("an ensemble needs at least 2 members, got {}".format(self.ensemble_size))
        if not 0 <= self.dropout_p < 1:
            raise ConfigError("dropout probability must lie in [0, 1), got {}".format(self.dropout_p))

    def to_dict(self) -> dict:
        return {"method": self.method.value, "passes": self.passes, "ensemble_size": self.ensemble_size,
                "dropout_p": self.dropout_p, "z_value": self.z_value, "ddof": self.ddof, "seed": self.seed}


@dataclass
class PredictionSummary:
    xs: np.ndarray
    truth: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    method: UqMethod
    members: int
    excluded: int = 0

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def mean_width(self) -> float:
        return float(np.mean(self.width))

    def to_frame(self) -> pd.DataFrame:
        xs = self.xs if self.xs.ndim == 1 else self.xs[:, -1]
        return pd.DataFrame({
            "x": xs, "true": self.truth, "mean": self.mean, "std": self.std,
            "lower": self.lower, "upper": self.upper})

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False, float_format="%.17g")

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "members": self.members,
            "excluded": self.excluded,
            "mean_width": self.mean_width,
            "max_width": float(np.max(self.width)),
            "mean_std": float(np.mean(self.std)),
            "mse_of_mean": float(np.mean((self.mean - self.truth)**2)),
        }


def summarize(
    predictions: np.ndarray,
    xs: np.ndarray,
    truth: np.ndarray,
    method: UqMethod,
    z_value: float = 1.96,
    ddof: int = 0,
    excluded: int = 0
) -> PredictionSummary:
    """ per-point mean, std and mean -/+ z std over the rows of `predictions` (members x points) """
    predictions = np.atleast_2d(predictions)
    mean = predictions.mean(axis=0)
    std = predictions.std(axis=0, ddof=ddof)
    return PredictionSummary(
        xs, truth, mean, std, mean - z_value * std, mean + z_value * std, method, len(predictions), excluded)


def inference_dropout(train_cfg: TrainConfig, requested: Optional[float] = None) -> float:
    """ the drop probability for MC dropout on a trained model: the one it was
    trained with unless another is requested """
    trained = train_cfg.dropout_p
    if requested is None:
        if trained > 0:
            return trained
        warning("Model was trained without dropout; sampling masks at p=%s.", MC_DROPOUT_P)
        return MC_DROPOUT_P
    if requested != trained:
        warning("Model was trained with dropout p=%s but masks are sampled at p=%s.", trained, requested)
    return requested


def mc_dropout_summary(
    state: ModelState,
    data: Dataset,
    cfg: UqConfig,
    partition: Partition = Partition.TEST
) -> PredictionSummary:
    """ `passes` forward passes with fresh dropout masks on every hidden layer;
    the latent transform itself is never masked """
    xs, ys = data.partition(partition)
    mask = DropoutMask.from_drop_probability(cfg.dropout_p, cfg.seed)
    predictions = np.stack([predict(state, xs, mask) for _ in range(cfg.passes)])
    summary = summarize(predictions, xs, ys, UqMethod.MC_DROPOUT, cfg.z_value, cfg.ddof)
    info("MC dropout (p=%s, %s passes): mean CI width %.3e", cfg.dropout_p, cfg.passes, summary.mean_width)
    return summary


def ensemble_from_states(
    states: Sequence[ModelState],
    data: Dataset,
    cfg: UqConfig,
    partition: Partition = Partition.TEST,
    excluded: int = 0
) -> PredictionSummary:
    if len(states) < 2:
        raise InsufficientEnsembleError(
            "insufficient ensemble: {} usable member(s), {} excluded".format(len(states), excluded))
    xs, ys = data.partition(partition)
    predictions = np.stack([predict(state, xs) for state in states])
    return summarize(predictions, xs, ys, UqMethod.ENSEMBLE, cfg.z_value, cfg.ddof, excluded)


def ensemble_summary(
    seeds: Sequence[int],
    model: ModelConfig,
    data: Dataset,
    cfg: UqConfig,
    train_cfg: TrainConfig,
    partition: Partition = Partition.TEST,
    n_jobs: int = 1
) -> PredictionSummary:
    """ trains one member per initialisation seed and summarises the members
    that finished training; batch order and dropout masks are shared """
    if len(seeds) != cfg.ensemble_size:
        raise ConfigError("ensemble_size is {} but {} seeds were given".format(cfg.ensemble_size, len(seeds)))
    if train_cfg.seed is None:
        train_cfg = replace(train_cfg, seed=int(seeds[0]))
    members = Parallel(n_jobs=n_jobs)(
        delayed(train)(model, data, train_cfg, init_seed=int(seed)) for seed in seeds)
    survivors = [state for (state, report) in members if not report.flagged]
    excluded = len(members) - len(survivors)
    if excluded:
        warning("Excluding %s ensemble member(s) that did not complete training.", excluded)
    summary = ensemble_from_states(survivors, data, cfg, partition, excluded)
    info("Ensemble (%s members): mean CI width %.3e", summary.members, summary.mean_width)
    return summary
