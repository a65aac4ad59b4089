import argparse
import logging
import sys
from dataclasses import replace
from logging import error, info, warning
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .errors import CnjgcyError, ConfigError
from .experiments import (TABLE1_MAPS, assemble_table, dataset_for,
                          load_checkpoint, run_plan, save_checkpoint,
                          table1_plan)
from .maps import MapKind, MapSpec
from .models import Variant
from .training import (Dataset, Partition, TrainConfig, build_model_config,
                       evaluate, load_config, make_dataset, preset, train,
                       window_experiment)
from .uncertainty import (UqConfig, UqMethod, ensemble_summary,
                          inference_dropout, mc_dropout_summary)
from .utils import (default_output, draw_seed, slug, write_csv, write_json)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FLAGGED = 2

LOG_FORMAT = "%(asctime)s/%(filename)s/%(funcName)s | %(levelname)s - %(message)s"


class CliParser(argparse.ArgumentParser):
    """ usage errors exit with 1, leaving 2 for flagged numerical conditions """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "{}: error: {}\n".format(self.prog, message))


def _output_dir(path: Optional[Path]) -> Path:
    out = path or default_output()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _map_spec(name: Optional[str], param: Optional[float], a: Optional[float]) -> MapSpec:
    if not name:
        raise ConfigError("no map given (use --map or set `map` in the config file)")
    return MapSpec.parse(name, param, 1.0 if a is None else a)


def cmd_gen_data(map: str, param: Optional[float], a: Optional[float], n: int, seed: Optional[int], out: Optional[Path], **_) -> int:
    spec = _map_spec(map, param, a)
    seed = draw_seed(seed)
    data = make_dataset(spec, n, seed)
    if out is None:
        out = _output_dir(None) / "data_{}_s{}.csv".format(slug(spec.label), seed)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
    data.to_csv(out)
    write_json({"map": spec.to_dict(), "n": n, "seed": seed, "train": data.split_index, "test": len(data) - data.split_index},
               out.with_suffix(".json"))
    info("Wrote %s samples of %s to %s.", n, spec.label, out)
    return EXIT_OK


def _train_config(spec: MapSpec, file_values: dict, flags: Dict) -> TrainConfig:
    """ preset for the map, then the config file, then explicit flags """
    cfg = replace(preset(spec), **file_values)
    return replace(cfg, **{k: v for (k, v) in flags.items() if v is not None})


def cmd_train(
    model: str, map: Optional[str], param: Optional[float], a: Optional[float], n: int,
    data: Optional[Path], data_seed: Optional[int], seed: Optional[int],
    c1: Optional[float], c2: Optional[float], lambda_res: Optional[float], config: Optional[Path],
    epochs: Optional[int], batch_size: Optional[int], lr: Optional[float], width: Optional[int],
    layers_in: Optional[int], layers_out: Optional[int], activation: Optional[str],
    optimizer: Optional[str], dropout: Optional[float], progress: bool, out: Optional[Path], **_
) -> int:
    variant = Variant.parse(model)
    file_values, extras = load_config(config) if config else ({}, {})
    spec = _map_spec(map or extras.get("map"), param if param is not None else extras.get("param"),
                     a if a is not None else extras.get("a"))
    cfg = _train_config(spec, file_values, {
        "epochs": epochs, "batch_size": batch_size, "learning_rate": lr, "layer_width": width,
        "layers_in": layers_in, "layers_out": layers_out, "activation": activation,
        "optimizer": optimizer, "dropout_p": dropout, "seed": draw_seed(seed if seed is not None else file_values.get("seed")),
        "progress": progress or None})

    if data:
        if not data.exists():
            raise ConfigError("dataset {} not found".format(data))
        data_seed = None
        dataset = Dataset.from_csv(data, spec)
    else:
        data_seed = draw_seed(data_seed)
        dataset = make_dataset(spec, n, data_seed)
    c1 = c1 if c1 is not None else extras.get("c1", 3.5)
    c2 = c2 if c2 is not None else extras.get("c2", -c1)
    lambda_res = lambda_res if lambda_res is not None else extras.get("lambda_res", 1.0)
    model_config = build_model_config(variant, cfg, spec, in_dim=dataset.in_dim,
                                      c1_init=c1, c2_init=c2, lambda_res=lambda_res)

    state, report = train(model_config, dataset, cfg)

    out = _output_dir(out)
    stem = "{}_{}_s{}".format(variant.value, slug(spec.label), cfg.seed)
    save_checkpoint(out / (stem + ".checkpoint.json"), state, cfg, dataset, data)
    write_json(dict(report.to_dict(), model=variant.value, map=spec.label, seed=cfg.seed, data_seed=data_seed),
               out / (stem + ".report.json"))
    write_csv(report.history(), out / (stem + ".losses.csv"))
    print("{} on {}: status={} train_mse={:.6e} test_mse={:.6e}".format(
        variant.value, spec.label, report.status.value, report.train_mse, report.test_mse))
    return EXIT_FLAGGED if report.flagged else EXIT_OK


def cmd_eval(checkpoint: Path, data: Optional[Path], out: Optional[Path], **_) -> int:
    if not checkpoint.exists():
        raise ConfigError("checkpoint {} not found".format(checkpoint))
    state, _, data_meta = load_checkpoint(checkpoint)
    dataset = dataset_for(data_meta, data)
    result = {
        "checkpoint": str(checkpoint),
        "model": state.variant.value,
        "map": dataset.source.label,
        "train_mse": evaluate(state, dataset, Partition.TRAIN),
        "test_mse": evaluate(state, dataset, Partition.TEST),
    }
    print("train_mse={:.6e} test_mse={:.6e}".format(result["train_mse"], result["test_mse"]))
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        write_json(result, out)
    return EXIT_OK


def cmd_table1(
    seed_base: Optional[int], replicates: int, n: int, epochs: Optional[int], jobs: int,
    out: Optional[Path], dry_run: bool, plot: bool, **_
) -> int:
    seed_base = draw_seed(seed_base)
    overrides = {"epochs": epochs} if epochs is not None else {}
    plan = table1_plan(seed_base, replicates, out or default_output(), n, overrides)
    if dry_run:
        print(plan.describe())
        return EXIT_OK

    out = _output_dir(plan.output)
    cells_dir = out / "cells"
    cells_dir.mkdir(exist_ok=True)
    runs = run_plan(plan, n_jobs=jobs, cells_dir=cells_dir, keep_predictions=plot)

    if plot:
        _plot_table1_predictions(runs, out)
        runs = runs.drop(columns=["predictions"])
    table = assemble_table(runs)
    write_csv(runs, out / "table1_runs.csv")
    table.to_csv(out / "table1.csv", index=False)
    write_json({"seed_base": seed_base, "replicates": replicates, "n": n, "overrides": overrides,
                "maps": [spec.label for spec in TABLE1_MAPS]}, out / "table1.json")
    print(table.to_string(index=False))
    return EXIT_OK


def _plot_table1_predictions(runs, out: Path):
    from .plotting import prediction_figure, save_svg
    shown = {"model1", "model2_c3.5", "model3", "model4"}
    first = runs[(runs["replicate"] == 0) & runs["model"].isin(shown)]
    for (_, by_map) in first.groupby("row", sort=True):
        predictions = {}
        for record in by_map.itertuples():
            xs, ys, predicted = record.predictions
            predictions[record.model] = predicted
        label = by_map["map"].iloc[0]
        save_svg(prediction_figure(xs, ys, predictions, title=label), out / "predictions_{}.svg".format(slug(label)))


def cmd_uq(
    checkpoint: List[Path], data: Optional[Path], passes: int, dropout: Optional[float], ensemble_size: int,
    ensemble_seeds: Optional[List[int]], seed_base: Optional[int], epochs: Optional[int], z: float,
    jobs: int, out: Optional[Path], **_
) -> int:
    missing = [str(path) for path in checkpoint if not path.exists()]
    if missing:
        raise ConfigError("checkpoint(s) not found: {}".format(", ".join(missing)))
    from .plotting import save_svg, uq_figure

    seed_base = draw_seed(seed_base)
    seeds = ensemble_seeds or [seed_base + i for i in range(ensemble_size)]
    out = _output_dir(out)
    by_map: Dict[str, Dict[str, Dict[str, object]]] = {}
    for path in checkpoint:
        state, cfg, data_meta = load_checkpoint(path)
        dataset = dataset_for(data_meta, data)
        if epochs is not None:
            cfg = replace(cfg, epochs=epochs)
        p = inference_dropout(cfg, dropout)
        mc_cfg = UqConfig(UqMethod.MC_DROPOUT, passes=passes, dropout_p=p, z_value=z, seed=seed_base)
        en_cfg = UqConfig(UqMethod.ENSEMBLE, ensemble_size=len(seeds), dropout_p=p, z_value=z, seed=seed_base)
        summaries = {
            UqMethod.MC_DROPOUT.value: mc_dropout_summary(state, dataset, mc_cfg),
            UqMethod.ENSEMBLE.value: ensemble_summary(seeds, state.config, dataset, en_cfg, cfg, n_jobs=jobs),
        }
        label = dataset.source.label
        for (method, summary) in summaries.items():
            stem = "{}_{}_{}".format(slug(label), state.variant.value, method)
            summary.to_csv(out / (stem + ".csv"))
            write_json(dict(summary.to_dict(), checkpoint=str(path), map=label, model=state.variant.value,
                            config=(mc_cfg if method == UqMethod.MC_DROPOUT.value else en_cfg).to_dict(),
                            ensemble_seeds=seeds), out / (stem + ".json"))
            by_map.setdefault(label, {}).setdefault(method, {})[state.variant.value] = summary
            print("{} {} {}: mean CI width {:.4e}".format(label, state.variant.value, method, summary.mean_width))
    for (label, summaries_by_method) in by_map.items():
        save_svg(uq_figure(summaries_by_method, title=label), out / "{}_uq.svg".format(slug(label)))
    return EXIT_OK


def cmd_orbit(
    map: str, param: Optional[float], a: Optional[float], x0: float, length: int, windows: List[int],
    models: Optional[List[str]], seed: Optional[int], epochs: Optional[int], jobs: int, out: Optional[Path], **_
) -> int:
    from .plotting import save_svg, trace_figure
    import pandas as pd

    spec = _map_spec(map, param, a)
    variants = [Variant.parse(m) for m in models] if models else list(Variant)
    seed = draw_seed(seed)
    cfg = preset(spec, seed=seed, **({"epochs": epochs} if epochs is not None else {}))
    out = _output_dir(out)

    errors, flagged = [], False
    for window in windows:
        result = window_experiment(spec, x0, window, length, variants, cfg, n_jobs=jobs)
        write_csv(result.trace, out / "orbit_w{}_trace.csv".format(window))
        save_svg(trace_figure(result.trace, [v.value for v in variants],
                              title="{} from x0={}, window {}".format(spec.label, x0, window)),
                 out / "orbit_w{}.svg".format(window))
        errors.append(result.errors())
        flagged = flagged or any(report.flagged for report in result.reports.values())
        if result.data.degenerate:
            warning("Window %s: orbit is degenerate.", window)
    summary = pd.concat(errors, ignore_index=True)
    write_csv(summary, out / "orbit_errors.csv")
    write_json({"map": spec.to_dict(), "x0": x0, "length": length, "windows": windows, "seed": seed,
                "models": [v.value for v in variants]}, out / "orbit.json")
    print(summary.to_string(index=False))
    return EXIT_FLAGGED if flagged else EXIT_OK


def cmd_maps(out: Optional[Path], **_) -> int:
    from .plotting import maps_figure, save_svg
    specs = [MapSpec(MapKind.CUSTOM), MapSpec(MapKind.KATSURA_FUKUDA, r=0.5),
             MapSpec(MapKind.POMEAU_MANNEVILLE, z=1.5), MapSpec(MapKind.DOUBLING),
             MapSpec(MapKind.LOGISTIC, r=4.0), MapSpec(MapKind.TENT, mu=2.0)]
    path = _output_dir(out) / "maps.svg"
    save_svg(maps_figure(specs), path)
    info("Wrote %s.", path)
    return EXIT_OK


def _map_arguments(parser: argparse.ArgumentParser, required: bool = True):
    parser.add_argument('--map',   required=required, type=str,   help='map name: ' + ", ".join(k.value for k in MapKind))
    parser.add_argument('--param', default=None,      type=float, help='map parameter (mu, r, r or z)')
    parser.add_argument('--a',     default=None,      type=float, help='Pomeau-Manneville coefficient (default 1)')


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog="cnjgcy", description='Learn chaotic maps with conjugacy-constrained autoencoders.')
    parser.add_argument('--verbose', action='store_true', help='debug logging')
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser('gen-data', help='write a seeded (x, U(x)) dataset as CSV')
    _map_arguments(gen)
    gen.add_argument('--n',    default=300,  type=int,  help='number of samples')
    gen.add_argument('--seed', default=None, type=int,  help='sampling seed (drawn if omitted)')
    gen.add_argument('--out',  default=None, type=Path, help='output CSV path')
    gen.set_defaults(func=cmd_gen_data)

    tr = commands.add_parser('train', help='train one model on one map')
    tr.add_argument('--model',      required=True,  type=str,   help='conjugacy-ae|logistic-ae|fnn|pinn or model1..model4')
    _map_arguments(tr, required=False)
    tr.add_argument('--n',          default=300,    type=int,   help='samples to generate when --data is not given')
    tr.add_argument('--data',       default=None,   type=Path,  help='dataset CSV (x,ux)')
    tr.add_argument('--data-seed',  default=None,   type=int,   help='dataset seed')
    tr.add_argument('--seed',       default=None,   type=int,   help='model seed')
    tr.add_argument('--c1',         default=None,   type=float, help='initial c1 (logistic-ae)')
    tr.add_argument('--c2',         default=None,   type=float, help='initial c2 (logistic-ae, default -c1)')
    tr.add_argument('--lambda-res', default=None,   type=float, help='residual weight (pinn)')
    tr.add_argument('--config',     default=None,   type=Path,  help='TOML config file')
    tr.add_argument('--epochs',     default=None,   type=int)
    tr.add_argument('--batch-size', default=None,   type=int)
    tr.add_argument('--lr',         default=None,   type=float, help='learning rate')
    tr.add_argument('--width',      default=None,   type=int,   help='hidden layer width')
    tr.add_argument('--layers-in',  default=None,   type=int,   help='hidden layers of the encoder')
    tr.add_argument('--layers-out', default=None,   type=int,   help='hidden layers of the decoder')
    tr.add_argument('--activation', default=None,   choices=['selu', 'relu', 'identity'])
    tr.add_argument('--optimizer',  default=None,   choices=['adam', 'sgd'])
    tr.add_argument('--dropout',    default=None,   type=float, help='dropout probability during training (0.2 for MC-dropout models)')
    tr.add_argument('--progress',   action='store_true', help='show a progress bar')
    tr.add_argument('--out',        default=None,   type=Path,  help='output directory')
    tr.set_defaults(func=cmd_train)

    ev = commands.add_parser('eval', help='train/test MSE of a checkpoint')
    ev.add_argument('--checkpoint', required=True, type=Path)
    ev.add_argument('--data',       default=None,  type=Path, help='dataset CSV (regenerated from the checkpoint if omitted)')
    ev.add_argument('--out',        default=None,  type=Path, help='JSON result path')
    ev.set_defaults(func=cmd_eval)

    t1 = commands.add_parser('table1', help='run the full map x model error table')
    t1.add_argument('--seed-base',  default=None, type=int)
    t1.add_argument('--replicates', default=5,    type=int)
    t1.add_argument('--n',          default=300,  type=int)
    t1.add_argument('--epochs',     default=None, type=int, help='override every preset epoch count')
    t1.add_argument('--jobs',       default=-1,   type=int, help='parallel workers (-1: all cores)')
    t1.add_argument('--out',        default=None, type=Path)
    t1.add_argument('--dry-run',    action='store_true', help='print the plan only')
    t1.add_argument('--plot',       action='store_true', help='also draw per-map prediction figures')
    t1.set_defaults(func=cmd_table1)

    uq = commands.add_parser('uq', help='MC-dropout and ensemble confidence intervals')
    uq.add_argument('--checkpoint',     required=True, type=Path, action='append')
    uq.add_argument('--data',           default=None,  type=Path)
    uq.add_argument('--passes',         default=100,   type=int)
    uq.add_argument('--dropout',        default=None,  type=float, help='drop probability (default: the training one, else 0.2)')
    uq.add_argument('--ensemble-size',  default=5,     type=int)
    uq.add_argument('--ensemble-seeds', default=None,  type=int, nargs='+', help='explicit member seeds')
    uq.add_argument('--seed-base',      default=None,  type=int)
    uq.add_argument('--epochs',         default=None,  type=int, help='override epochs for ensemble members')
    uq.add_argument('--z',              default=1.96,  type=float)
    uq.add_argument('--jobs',           default=-1,    type=int)
    uq.add_argument('--out',            default=None,  type=Path)
    uq.set_defaults(func=cmd_uq)

    ob = commands.add_parser('orbit', help='window experiment on one orbit')
    _map_arguments(ob)
    ob.add_argument('--x0',      default=0.4,       type=float)
    ob.add_argument('--length',  default=300,       type=int)
    ob.add_argument('--windows', default=[2, 5, 7], type=int, nargs='+')
    ob.add_argument('--models',  default=None,      type=str, nargs='+')
    ob.add_argument('--seed',    default=None,      type=int)
    ob.add_argument('--epochs',  default=None,      type=int)
    ob.add_argument('--jobs',    default=-1,        type=int)
    ob.add_argument('--out',     default=None,      type=Path)
    ob.set_defaults(func=cmd_orbit)

    mp = commands.add_parser('maps', help='draw the implemented maps')
    mp.add_argument('--out', default=None, type=Path)
    mp.set_defaults(func=cmd_maps)
    return parser


def setup(args: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parsed = build_parser().parse_args(args)
    logging.basicConfig(format=LOG_FORMAT, datefmt='%Y-%m-%d %H:%M:%S')
    logging.getLogger().setLevel("DEBUG" if parsed.verbose else "INFO")
    return parsed


def main(func, **kwargs) -> int:
    try:
        return func(**kwargs)
    except CnjgcyError as e:
        error("%s", e)
        return EXIT_USAGE


def run(args: Optional[Sequence[str]] = None) -> int:
    return main(**vars(setup(args)))


if __name__ == "__main__":
    sys.exit(run())
