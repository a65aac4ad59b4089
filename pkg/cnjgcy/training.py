import time
import tomllib
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from logging import debug, info, warning
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from . import optim
from .errors import ConfigError, NumericalError
from .maps import MapKind, MapSpec, eval_map, is_piecewise, orbit
from .models import (ModelConfig, ModelState, Variant, init_model,
                     loss_and_gradients, predict)
from .network import Activation, DropoutMask

# batch size, layer width, layers in (h), layers out (h^-1), epochs, learning rate
HYPERPARAMETERS = {
    MapKind.LOGISTIC:          (64, 256, 1, 1, 1000, 0.005),
    MapKind.CUSTOM:            (64, 256, 1, 1, 1000, 0.005),
    MapKind.KATSURA_FUKUDA:    (64, 256, 1, 1, 1000, 0.005),
    MapKind.DOUBLING:          (64, 256, 3, 3, 2000, 0.001),
    MapKind.POMEAU_MANNEVILLE: (64,  64, 3, 3, 2000, 0.001),
    MapKind.TENT:              (64, 256, 3, 3, 2000, 0.001),
}


class Partition(Enum):
    TRAIN = "train"
    TEST = "test"


class Status(Enum):
    COMPLETED = "Completed"
    VANISHING_GRADIENT = "VanishingGradient"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class TrainConfig:
    batch_size: int = 64
    epochs: int = 1000
    learning_rate: float = 0.005
    layer_width: int = 256
    layers_in: int = 1
    layers_out: int = 1
    activation: Activation = Activation.SELU
    seed: Optional[int] = None
    optimizer: str = "adam"
    dropout_p: float = 0.0
    vanishing_threshold: float = 1e-12
    vanishing_patience: int = 50
    progress: bool = False

    def __post_init__(self):
        if isinstance(self.activation, str):
            self.activation = Activation(self.activation.lower())
        if self.optimizer not in optim.OPTIMIZERS:
            raise ConfigError("unknown optimizer {!r}".format(self.optimizer))
        if not 0 <= self.dropout_p < 1:
            raise ConfigError("dropout probability must lie in [0, 1), got {}".format(self.dropout_p))
        if self.batch_size < 1 or self.epochs < 0 or self.layer_width < 1:
            raise ConfigError("batch size and width must be positive and epochs non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["activation"] = self.activation.value
        return d

    @staticmethod
    def from_dict(d: dict) -> "TrainConfig":
        known = {f.name for f in fields(TrainConfig)}
        return TrainConfig(**{k: v for (k, v) in d.items() if k in known})


def preset(spec: MapSpec, **overrides) -> TrainConfig:
    """ the hyperparameters used for each map family; SeLU for continuous maps, ReLU for piecewise ones """
    batch_size, width, layers_in, layers_out, epochs, lr = HYPERPARAMETERS[spec.kind]
    cfg = TrainConfig(
        batch_size=batch_size, epochs=epochs, learning_rate=lr, layer_width=width,
        layers_in=layers_in, layers_out=layers_out,
        activation=Activation.RELU if is_piecewise(spec) else Activation.SELU)
    return replace(cfg, **overrides)


def load_config(path: Union[str, Path]) -> Tuple[dict, dict]:
    """ reads a TOML key/value file; returns (TrainConfig fields, everything else) """
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise ConfigError("cannot read config {}: {}".format(path, e))
    known = {f.name for f in fields(TrainConfig)}
    return {k: v for (k, v) in raw.items() if k in known}, {k: v for (k, v) in raw.items() if k not in known}


@dataclass
class Dataset:
    """ input/target pairs; inputs are (n,) for map samples or (n, window) for orbit windows,
    and the target is always the map applied to the last input coordinate """
    xs: np.ndarray
    ys: np.ndarray
    split_index: int
    seed: Optional[int]
    source: MapSpec
    degenerate: bool = False

    def __post_init__(self):
        assert len(self.xs) == len(self.ys), "inputs ({}) and targets ({}) differ in length".format(len(self.xs), len(self.ys))
        assert 0 <= self.split_index <= len(self.xs)

    def __len__(self):
        return len(self.xs)

    @property
    def in_dim(self) -> int:
        return 1 if self.xs.ndim == 1 else self.xs.shape[1]

    def partition(self, partition: Partition) -> Tuple[np.ndarray, np.ndarray]:
        if partition is Partition.TRAIN:
            return self.xs[:self.split_index], self.ys[:self.split_index]
        return self.xs[self.split_index:], self.ys[self.split_index:]

    def train(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.partition(Partition.TRAIN)

    def test(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.partition(Partition.TEST)

    def to_frame(self) -> pd.DataFrame:
        if self.xs.ndim == 1:
            return pd.DataFrame({"x": self.xs, "ux": self.ys})
        frame = pd.DataFrame(self.xs, columns=["x{}".format(i) for i in range(self.in_dim)])
        frame["ux"] = self.ys
        return frame

    def to_csv(self, path: Union[str, Path]):
        self.to_frame().to_csv(path, index=False, float_format="%.17g")

    @staticmethod
    def from_csv(path: Union[str, Path], source: MapSpec, seed: Optional[int] = None) -> "Dataset":
        frame = pd.read_csv(path, float_precision="round_trip")
        inputs = [c for c in frame.columns if c != "ux"]
        xs = frame["x"].to_numpy() if inputs == ["x"] else frame[inputs].to_numpy()
        return Dataset(xs, frame["ux"].to_numpy(), split_point(len(frame)), seed, source)


def split_point(n: int) -> int:
    return int(n * 4 // 5)


def make_dataset(spec: MapSpec, n: int, seed: Optional[int] = None) -> Dataset:
    """ n uniform samples on [0, 1) with one map application each, shuffled, 80/20 split """
    assert n >= 10, "need at least 10 samples, got {}".format(n)
    rng = np.random.default_rng(seed)
    xs = rng.random(n)
    xs = xs[rng.permutation(n)]
    return Dataset(xs, eval_map(spec, xs), split_point(n), seed, spec)


def window_dataset(spec: MapSpec, x0: float, window: int, length: int) -> Dataset:
    """ sliding windows over one orbit, each predicting the next orbit value;
    chronological split, first 80% for training """
    assert 1 <= window < length, "window {} must be shorter than the orbit ({})".format(window, length)
    trajectory = orbit(spec, x0, length)
    xs = np.lib.stride_tricks.sliding_window_view(trajectory[:-1], window).copy()
    ys = trajectory[window:].copy()
    degenerate = bool(np.any(np.diff(trajectory) == 0) or np.any(trajectory[1:] == 0))
    if degenerate:
        warning("orbit of %s from %s reaches a fixed point within %s steps", spec.label, x0, length)
    return Dataset(xs, ys, split_point(len(ys)), None, spec, degenerate)


@dataclass
class TrainReport:
    total: List[float] = field(default_factory=list)
    recon: List[float] = field(default_factory=list)
    pred: List[float] = field(default_factory=list)
    residual: List[float] = field(default_factory=list)
    train_mse: float = float("nan")
    test_mse: float = float("nan")
    wall_time: float = 0.0
    status: Status = Status.COMPLETED
    message: str = ""

    @property
    def epochs_run(self) -> int:
        return len(self.total)

    @property
    def flagged(self) -> bool:
        return self.status is not Status.COMPLETED

    def history(self) -> pd.DataFrame:
        return pd.DataFrame({
            "epoch": np.arange(self.epochs_run),
            "total": self.total, "recon": self.recon, "pred": self.pred, "residual": self.residual})

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "message": self.message,
            "epochs_run": self.epochs_run,
            "train_mse": self.train_mse,
            "test_mse": self.test_mse,
            "wall_time": self.wall_time,
            "history": {"total": self.total, "recon": self.recon, "pred": self.pred, "residual": self.residual},
        }


def build_model_config(
    variant: Variant,
    cfg: TrainConfig,
    target: MapSpec,
    in_dim: int = 1,
    **kwargs
) -> ModelConfig:
    return ModelConfig.for_variant(
        variant, cfg.layer_width, cfg.layers_in, cfg.layers_out, cfg.activation,
        in_dim=in_dim, target=target, **kwargs)


def _record(report: TrainReport, sums: np.ndarray, count: int):
    total, recon, pred, residual = sums / count
    report.total.append(total)
    report.recon.append(recon)
    report.pred.append(pred)
    report.residual.append(residual)


def train(
    model: ModelConfig,
    data: Dataset,
    cfg: TrainConfig,
    state: Optional[ModelState] = None,
    init_seed: Optional[int] = None
) -> Tuple[ModelState, TrainReport]:
    """ mini-batch training for cfg.epochs epochs, reshuffling every epoch;
    deterministic given cfg.seed and the dataset. cfg.seed drives batch order
    and dropout masks; init_seed, when given, replaces it for the weights only """
    if model.in_dim != data.in_dim:
        raise ConfigError("model expects {} inputs but the dataset has {}".format(model.in_dim, data.in_dim))

    model_seed, shuffle_seed, mask_seed = (int(s) for s in np.random.SeedSequence(cfg.seed).generate_state(3))
    state = state or init_model(model, model_seed if init_seed is None else init_seed)
    state.optimizer = optim.OptimizerState.for_parameters(state.parameters(), cfg.learning_rate, cfg.optimizer)
    rng = np.random.default_rng(shuffle_seed)
    dropout = DropoutMask.from_drop_probability(cfg.dropout_p, mask_seed) if cfg.dropout_p > 0 else None

    xs, ys = data.train()
    n = len(xs)
    report = TrainReport()
    quiet_epochs = 0
    start = time.time()
    info("Training %s on %s (%s samples, %s epochs).", model.variant.value, data.source.label, n, cfg.epochs)
    for epoch in tqdm(range(cfg.epochs), disable=not cfg.progress):
        order = rng.permutation(n)
        sums = np.zeros(4)
        largest_gradient = 0.0
        try:
            for lo in range(0, n, cfg.batch_size):
                batch = order[lo:lo + cfg.batch_size]
                terms, grads = loss_and_gradients(state, xs[batch], ys[batch], dropout)
                largest_gradient = max(largest_gradient, max(float(np.abs(g).max()) for g in grads))
                optim.step(state.parameters(), grads, state.optimizer)
                sums += len(batch) * np.array([terms.total, terms.recon, terms.pred, terms.residual])
        except NumericalError as e:
            report.status, report.message = Status.NUMERICAL_FAILURE, str(e)
            warning("Numerical failure at epoch %s: %s", epoch, e)
            break
        _record(report, sums, n)
        debug("epoch %s: total=%.6e recon=%.6e pred=%.6e", epoch, report.total[-1], report.recon[-1], report.pred[-1])

        quiet_epochs = quiet_epochs + 1 if largest_gradient < cfg.vanishing_threshold else 0
        if quiet_epochs >= cfg.vanishing_patience:
            report.status = Status.VANISHING_GRADIENT
            report.message = "max |gradient| below {} for {} epochs".format(cfg.vanishing_threshold, quiet_epochs)
            warning("Vanishing gradient at epoch %s (%s).", epoch, report.message)
            break

    report.wall_time = time.time() - start
    with np.errstate(all="ignore"):
        report.train_mse = evaluate(state, data, Partition.TRAIN)
        report.test_mse = evaluate(state, data, Partition.TEST)
    info("Finished %s: status=%s train MSE=%.3e test MSE=%.3e (%.1fs).",
         model.variant.value, report.status.value, report.train_mse, report.test_mse, report.wall_time)
    return state, report


def evaluate(state: ModelState, data: Dataset, partition: Partition = Partition.TEST) -> float:
    """ mean squared one-step error; NaN for an empty partition or a diverged model """
    xs, ys = data.partition(partition)
    if len(xs) == 0:
        return float("nan")
    try:
        return float(np.mean((predict(state, xs) - ys)**2))
    except NumericalError as e:
        warning("Cannot evaluate %s: %s", state.variant.value, e)
        return float("nan")


@dataclass
class WindowResult:
    window: int
    data: Dataset
    reports: Dict[Variant, TrainReport]
    trace: pd.DataFrame

    def errors(self) -> pd.DataFrame:
        return pd.DataFrame([
            {"window": self.window, "model": variant.value, "status": report.status.value,
             "train_mse": report.train_mse, "test_mse": report.test_mse}
            for (variant, report) in self.reports.items()])


def _train_window_model(variant: Variant, data: Dataset, cfg: TrainConfig, c1: float, c2: float):
    model = build_model_config(variant, cfg, data.source, in_dim=data.in_dim, c1_init=c1, c2_init=c2)
    state, report = train(model, data, cfg)
    return variant, report, predict(state, data.xs)


def window_experiment(
    spec: MapSpec,
    x0: float,
    window: int,
    length: int = 300,
    models: Sequence[Variant] = tuple(Variant),
    cfg: Optional[TrainConfig] = None,
    latent_init: Tuple[float, float] = (3.5, -3.5),
    n_jobs: int = 1
) -> WindowResult:
    """ retrains every model on windows of `window` consecutive orbit values and
    returns their errors plus the predicted-vs-true trace over the whole orbit """
    cfg = cfg or preset(spec)
    data = window_dataset(spec, x0, window, length)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_train_window_model)(variant, data, cfg, *latent_init) for variant in models)

    trace = pd.DataFrame({
        "index": np.arange(len(data)),
        "x0": data.xs[:, 0],
        "true": data.ys,
        "partition": [Partition.TRAIN.value] * data.split_index + [Partition.TEST.value] * (len(data) - data.split_index),
    })
    reports = {}
    for (variant, report, predictions) in results:
        reports[variant] = report
        trace[variant.value] = predictions
    return WindowResult(window, data, reports, trace)
