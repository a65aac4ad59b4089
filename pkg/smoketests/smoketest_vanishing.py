import logging
from dataclasses import replace

import matplotlib.pyplot as plt

from cnjgcy.maps import MapKind, MapSpec
from cnjgcy.models import LOGISTIC_LATENT_INITS, Variant
from cnjgcy.training import build_model_config, make_dataset, preset, train

# piecewise maps with the logistic latent: count how many initialisations
# stall, and look at the loss curves of the ones that do
if __name__ == "__main__":
    logging.basicConfig(format="%(asctime)s/%(levelname)s - %(message)s", datefmt='%Y-%m-%d %H:%M:%S')
    logging.getLogger().setLevel("INFO")

    for spec in (MapSpec(MapKind.DOUBLING), MapSpec(MapKind.POMEAU_MANNEVILLE, z=1.5)):
        data = make_dataset(spec, 300, seed=0)
        cfg = replace(preset(spec), epochs=300, seed=1)
        for (c1, c2) in LOGISTIC_LATENT_INITS:
            model = build_model_config(Variant.LOGISTIC_AE, cfg, spec, c1_init=c1, c2_init=c2)
            state, report = train(model, data, cfg)
            print(spec.label, c1, report.status.value, report.epochs_run, report.test_mse)
            plt.semilogy(report.total, label="{} c1={}".format(spec.label, c1))
    plt.legend(fontsize="small")
    plt.show()
