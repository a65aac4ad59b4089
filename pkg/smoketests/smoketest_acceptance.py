import logging
from dataclasses import replace
from pathlib import Path

import numpy as np

from cnjgcy.experiments import assemble_table, run_plan, table1_plan
from cnjgcy.maps import MapKind, MapSpec
from cnjgcy.models import Variant
from cnjgcy.training import Status, build_model_config, make_dataset, preset, train
from cnjgcy.uncertainty import UqConfig, UqMethod, ensemble_summary, mc_dropout_summary
from cnjgcy.utils import derived_seed

# full presets, medians over 5 seeds; takes hours on a laptop

SEED_BASE = 20190801
REPLICATES = 5
LOGISTIC = MapSpec(MapKind.LOGISTIC, r=4.0)
CONTINUOUS = [LOGISTIC.label, MapSpec(MapKind.CUSTOM).label, MapSpec(MapKind.KATSURA_FUKUDA, r=0.5).label]
PIECEWISE = [MapSpec(MapKind.DOUBLING).label, MapSpec(MapKind.POMEAU_MANNEVILLE, z=1.5).label]
STALLING_INITS = ("model2_c3.0", "model2_c4.0")


def check(name: str, ok: bool, detail: str):
    print("{:<6} {:<40} {}".format("PASS" if ok else "FAIL", name, detail))


def needed(cell) -> bool:
    if cell.spec.label == LOGISTIC.label:
        return True
    return cell.spec.label in CONTINUOUS + PIECEWISE and cell.variant is not Variant.LOGISTIC_AE


def medians(runs):
    completed = runs[runs["status"] == Status.COMPLETED.value]
    return completed.groupby(["map", "model"])["test_mse"].median()


def stalled_replicates(runs) -> int:
    """ replicates where (3, -3) or (4, -4) vanished or ended 10x worse than the best latent init """
    logistic = runs[(runs["map"] == LOGISTIC.label) & runs["model"].str.startswith("model2")]
    count = 0
    for (_, replicate) in logistic.groupby("replicate"):
        best = replicate.loc[replicate["status"] == Status.COMPLETED.value, "test_mse"].min()
        suspects = replicate[replicate["model"].isin(STALLING_INITS)]
        vanished = (suspects["status"] == Status.VANISHING_GRADIENT.value).any()
        worse = (suspects["test_mse"] >= 10 * best).any()
        count += int(vanished or worse)
    return count


def uq_widths(variant: Variant):
    mc, ensemble = [], []
    for replicate in range(REPLICATES):
        data = make_dataset(LOGISTIC, 300, derived_seed(SEED_BASE, 100, replicate))
        cfg = preset(LOGISTIC, seed=derived_seed(SEED_BASE, 101, replicate), dropout_p=0.2)
        model = build_model_config(variant, cfg, LOGISTIC)
        state, _ = train(model, data, cfg)
        mc.append(mc_dropout_summary(state, data, UqConfig(UqMethod.MC_DROPOUT, dropout_p=0.2, seed=replicate)).mean_width)
        seeds = [derived_seed(SEED_BASE, 102, replicate, member) for member in range(5)]
        ensemble.append(ensemble_summary(seeds, model, data, UqConfig(UqMethod.ENSEMBLE, ensemble_size=5),
                                         replace(cfg, dropout_p=0.0), n_jobs=-1).mean_width)
    return float(np.median(mc)), float(np.median(ensemble))


if __name__ == "__main__":
    logging.basicConfig(format="%(asctime)s/%(levelname)s - %(message)s", datefmt='%Y-%m-%d %H:%M:%S')
    logging.getLogger().setLevel("INFO")

    plan = table1_plan(seed_base=SEED_BASE, replicates=REPLICATES, output=Path("scratch/acceptance"))
    plan.cells = [cell for cell in plan.cells if needed(cell)]
    print(plan.describe())
    runs = run_plan(plan, n_jobs=-1)
    print(assemble_table(runs).to_string(index=False))
    m = medians(runs)

    for label in CONTINUOUS:
        check("model1 <= 1e-4 on " + label, m[(label, "model1")] <= 1e-4, "{:.3E}".format(m[(label, "model1")]))
    for label in CONTINUOUS:
        check("model1 < model3 on " + label, m[(label, "model1")] < m[(label, "model3")],
              "{:.3E} vs {:.3E}".format(m[(label, "model1")], m[(label, "model3")]))
    for label in PIECEWISE:
        check("model4 < model1 on " + label, m[(label, "model4")] < m[(label, "model1")],
              "{:.3E} vs {:.3E}".format(m[(label, "model4")], m[(label, "model1")]))
    stalled = stalled_replicates(runs)
    check("logistic latent stalls", stalled >= 2, "{} of {} replicates".format(stalled, REPLICATES))

    for variant in (Variant.CONJUGACY_AE, Variant.FNN):
        mc, ensemble = uq_widths(variant)
        check("MC dropout wider than ensemble ({})".format(variant.value), mc > ensemble,
              "{:.3E} vs {:.3E}".format(mc, ensemble))
