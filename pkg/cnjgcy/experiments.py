from dataclasses import dataclass, field, replace
from logging import info
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .maps import MapKind, MapSpec
from .models import LOGISTIC_LATENT_INITS, ModelState, Variant, predict
from .training import (Dataset, Status, TrainConfig, build_model_config,
                       make_dataset, preset, train)
from .utils import derived_seed, read_json, slug, write_json

""" experiment orchestration: checkpoints, the error-table grid, and its assembly """

TABLE1_MAPS = [
    MapSpec(MapKind.LOGISTIC, r=4.0),
    MapSpec(MapKind.LOGISTIC, r=3.9),
    MapSpec(MapKind.LOGISTIC, r=3.57),
    MapSpec(MapKind.CUSTOM),
    MapSpec(MapKind.KATSURA_FUKUDA, r=0.5),
    MapSpec(MapKind.DOUBLING),
    MapSpec(MapKind.POMEAU_MANNEVILLE, z=1.5),
]

TABLE1_COLUMNS: List[Tuple[Variant, Optional[Tuple[float, float]]]] = (
    [(Variant.CONJUGACY_AE, None)]
    + [(Variant.LOGISTIC_AE, c) for c in LOGISTIC_LATENT_INITS]
    + [(Variant.FNN, None), (Variant.PINN, None)])

VANISHED_CELL = "-"
FAILED_CELL = "NaN"


def column_label(variant: Variant, latent: Optional[Tuple[float, float]]) -> str:
    index = list(Variant).index(variant) + 1
    if latent is None:
        return "model{}".format(index)
    return "model{}_c{:.1f}".format(index, latent[0])


def parameter_label(spec: MapSpec) -> str:
    return "-" if spec.param is None else "{:.2f}".format(spec.param)


@dataclass(frozen=True)
class Cell:
    row: int
    column: int
    spec: MapSpec
    variant: Variant
    latent: Optional[Tuple[float, float]] = None

    @property
    def label(self) -> str:
        return column_label(self.variant, self.latent)


@dataclass
class ExperimentPlan:
    cells: List[Cell]
    seed_base: int
    replicates: int
    output: Path
    n: int = 300
    overrides: Dict = field(default_factory=dict)

    def runs(self) -> Iterator[Tuple[Cell, int, int, int]]:
        """ (cell, replicate, data seed, model seed); the data seed is shared along a map row """
        for cell in self.cells:
            for replicate in range(self.replicates):
                yield (cell, replicate,
                       derived_seed(self.seed_base, cell.row, replicate),
                       derived_seed(self.seed_base, cell.row, cell.column, replicate))

    def describe(self) -> str:
        lines = ["plan: {} cells x {} replicate(s), n={}, seed base {}, output {}".format(
            len(self.cells), self.replicates, self.n, self.seed_base, self.output)]
        if self.overrides:
            lines.append("overrides: {}".format(self.overrides))
        for cell in self.cells:
            cfg = replace(preset(cell.spec), **self.overrides)
            lines.append("  {:<28} {:<12} epochs={} lr={} width={} layers={}/{} {}".format(
                cell.spec.label, cell.label, cfg.epochs, cfg.learning_rate, cfg.layer_width,
                cfg.layers_in, cfg.layers_out, cfg.activation.value))
        return "\n".join(lines)


def table1_plan(
    seed_base: int,
    replicates: int = 5,
    output: Path = Path("output"),
    n: int = 300,
    overrides: Optional[Dict] = None
) -> ExperimentPlan:
    cells = [
        Cell(row, column, spec, variant, latent)
        for (row, spec) in enumerate(TABLE1_MAPS)
        for (column, (variant, latent)) in enumerate(TABLE1_COLUMNS)]
    return ExperimentPlan(cells, seed_base, replicates, output, n, dict(overrides or {}))


def save_checkpoint(
    path: Path,
    state: ModelState,
    cfg: TrainConfig,
    data: Dataset,
    data_path: Optional[Path] = None,
    extra: Optional[dict] = None
):
    checkpoint = state.to_dict()
    checkpoint["train_config"] = cfg.to_dict()
    checkpoint["data"] = {"source": data.source.to_dict(), "seed": data.seed, "n": len(data),
                          "path": str(Path(data_path).resolve()) if data_path else None}
    checkpoint.update(extra or {})
    write_json(checkpoint, path)


def load_checkpoint(path: Path) -> Tuple[ModelState, TrainConfig, dict]:
    checkpoint = read_json(path)
    return ModelState.from_dict(checkpoint), TrainConfig.from_dict(checkpoint["train_config"]), checkpoint["data"]


def dataset_for(data_meta: dict, csv: Optional[Path] = None) -> Dataset:
    """ the dataset a checkpoint was trained on: the given CSV, else the CSV it
    was trained from, else regenerated from its seed """
    source = MapSpec.from_dict(data_meta["source"])
    csv = csv or data_meta.get("path")
    if csv is not None:
        return Dataset.from_csv(Path(csv), source, data_meta.get("seed"))
    return make_dataset(source, data_meta["n"], data_meta["seed"])


def run_cell(
    cell: Cell,
    replicate: int,
    data_seed: int,
    model_seed: int,
    n: int,
    overrides: Dict,
    cells_dir: Optional[Path] = None,
    keep_predictions: bool = False
) -> dict:
    data = make_dataset(cell.spec, n, data_seed)
    cfg = preset(cell.spec, seed=model_seed, **overrides)
    latent = cell.latent or (3.5, -3.5)
    model = build_model_config(cell.variant, cfg, cell.spec, c1_init=latent[0], c2_init=latent[1])
    state, report = train(model, data, cfg)

    if cells_dir is not None:
        name = "{}_{}_r{}".format(slug(cell.spec.label), cell.label, replicate)
        write_json(dict(report.to_dict(), cell=cell.label, map=cell.spec.label,
                        data_seed=data_seed, model_seed=model_seed), cells_dir / (name + ".report.json"))
    row = {
        "row": cell.row,
        "column": cell.column,
        "map": cell.spec.label,
        "parameter": parameter_label(cell.spec),
        "model": cell.label,
        "c1": latent[0] if cell.variant is Variant.LOGISTIC_AE else np.nan,
        "c2": latent[1] if cell.variant is Variant.LOGISTIC_AE else np.nan,
        "replicate": replicate,
        "data_seed": data_seed,
        "model_seed": model_seed,
        "status": report.status.value,
        "epochs_run": report.epochs_run,
        "train_mse": report.train_mse,
        "test_mse": report.test_mse,
    }
    if keep_predictions:
        xs, ys = data.test()
        row["predictions"] = (xs, ys, predict(state, xs))
    return row


def run_plan(plan: ExperimentPlan, n_jobs: int = 1, cells_dir: Optional[Path] = None, keep_predictions: bool = False) -> pd.DataFrame:
    runs = list(plan.runs())
    info("Running %s training runs on %s worker(s).", len(runs), n_jobs)
    rows = Parallel(n_jobs=n_jobs, verbose=0)(
        delayed(run_cell)(cell, replicate, data_seed, model_seed, plan.n, plan.overrides, cells_dir,
                          keep_predictions and replicate == 0)
        for (cell, replicate, data_seed, model_seed) in runs)
    return pd.DataFrame(rows).sort_values(["row", "column", "replicate"]).reset_index(drop=True)


def cell_value(group: pd.DataFrame) -> str:
    """ '-' when at least half the replicates vanished, 'NaN' when none completed,
    otherwise the median test MSE over completed replicates """
    vanished = (group["status"] == Status.VANISHING_GRADIENT.value).sum()
    completed = group[group["status"] == Status.COMPLETED.value]
    if 2 * vanished >= len(group):
        return VANISHED_CELL
    if completed.empty:
        return FAILED_CELL
    return "{:.3E}".format(float(np.median(completed["test_mse"])))


def assemble_table(runs: pd.DataFrame) -> pd.DataFrame:
    """ one row per map, one column per model (five for the logistic latent sweep) """
    records = []
    for (row, by_row) in runs.groupby("row", sort=True):
        record = {"map": by_row["map"].iloc[0], "parameter": by_row["parameter"].iloc[0]}
        for (_, by_cell) in by_row.groupby("column", sort=True):
            record[by_cell["model"].iloc[0]] = cell_value(by_cell)
        records.append(record)
    return pd.DataFrame(records)

