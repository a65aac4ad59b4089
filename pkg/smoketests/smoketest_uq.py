import logging
from dataclasses import replace

import matplotlib.pyplot as plt

from cnjgcy.maps import MapKind, MapSpec
from cnjgcy.models import Variant
from cnjgcy.plotting import uq_figure
from cnjgcy.training import build_model_config, make_dataset, preset, train
from cnjgcy.uncertainty import UqConfig, UqMethod, ensemble_summary, mc_dropout_summary

if __name__ == "__main__":
    logging.basicConfig(format="%(asctime)s/%(levelname)s - %(message)s", datefmt='%Y-%m-%d %H:%M:%S')
    logging.getLogger().setLevel("INFO")

    spec = MapSpec(MapKind.LOGISTIC, r=4.0)
    data = make_dataset(spec, 300, seed=1)
    cfg = replace(preset(spec), epochs=200, layer_width=64, seed=2, dropout_p=0.2)

    summaries = {UqMethod.MC_DROPOUT.value: {}, UqMethod.ENSEMBLE.value: {}}
    for variant in (Variant.CONJUGACY_AE, Variant.FNN):
        model = build_model_config(variant, cfg, spec)
        state, report = train(model, data, cfg)
        print(variant.value, report.status.value, report.test_mse)
        summaries[UqMethod.MC_DROPOUT.value][variant.value] = mc_dropout_summary(
            state, data, UqConfig(UqMethod.MC_DROPOUT, passes=100, seed=3))
        summaries[UqMethod.ENSEMBLE.value][variant.value] = ensemble_summary(
            [10, 11, 12, 13, 14], model, data, UqConfig(UqMethod.ENSEMBLE, ensemble_size=5),
            replace(cfg, dropout_p=0.0), n_jobs=-1)

    # wider bands with more dropout on the same trained model
    for p in (0.05, 0.2):
        width = mc_dropout_summary(state, data, UqConfig(UqMethod.MC_DROPOUT, passes=100, dropout_p=p, seed=3)).mean_width
        print("p={}: mean CI width {:.3e}".format(p, width))

    # the conjugacy model's bands should be visibly tighter
    uq_figure(summaries, title=spec.label)
    plt.show()
