import logging
from dataclasses import replace
from pathlib import Path

import pandas as pd
from tqdm import tqdm

from cnjgcy.experiments import save_checkpoint
from cnjgcy.maps import MapKind, MapSpec
from cnjgcy.models import Variant, predict
from cnjgcy.plotting import prediction_figure, save_svg
from cnjgcy.training import build_model_config, make_dataset, preset, train
from cnjgcy.utils import slug, write_csv


def main(spec: MapSpec, n: int, epochs: int, seed: int, output: Path) -> None:
    output.mkdir(parents=True, exist_ok=True)
    data = make_dataset(spec, n, seed)
    cfg = replace(preset(spec), epochs=epochs, seed=seed)
    xs, ys = data.test()

    rows, predictions = [], {}
    for variant in tqdm(list(Variant)):
        state, report = train(build_model_config(variant, cfg, spec), data, cfg)
        save_checkpoint(output / "{}.checkpoint.json".format(variant.value), state, cfg, data)
        predictions[variant.value] = predict(state, xs)
        rows.append({"model": variant.value, "status": report.status.value,
                     "train_mse": report.train_mse, "test_mse": report.test_mse, "c1": state.c1, "c2": state.c2})

    results = pd.DataFrame(rows)
    write_csv(results, output / "results.csv")
    print(results.to_string(index=False))
    save_svg(prediction_figure(xs, ys, predictions, title=spec.label), output / "{}.svg".format(slug(spec.label)))

if __name__ == "__main__":
    logging.basicConfig(format="%(asctime)s/%(levelname)s - %(message)s", datefmt='%Y-%m-%d %H:%M:%S')
    logging.getLogger().setLevel("INFO")

    # fully chaotic logistic map
    spec = MapSpec(MapKind.LOGISTIC, r=4.0)
    # spec = MapSpec(MapKind.LOGISTIC, r=3.9)
    # spec = MapSpec(MapKind.KATSURA_FUKUDA, r=0.5)

    main(spec, n=300, epochs=1000, seed=20190801, output=Path("output/workflow"))
