import json
import os
import re
from logging import info
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

OUTPUT_ENV = "CNJGCY_OUTPUT"
FLOAT_FORMAT = "%.17g"


def default_output() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "output"))


def draw_seed(seed: Optional[int] = None) -> int:
    """ passes explicit seeds through; otherwise draws 32 bits of OS entropy """
    if seed is not None:
        return int(seed)
    drawn = int(np.random.SeedSequence().entropy % 2**32)
    info("No seed given, drew %s from entropy", drawn)
    return drawn


def derived_seed(*keys: int) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


def slug(label: str) -> str:
    """ file-name friendly version of a map or model label """
    return re.sub(r"[^A-Za-z0-9.]+", "_", label).strip("_")


def write_csv(frame: pd.DataFrame, path: Union[str, Path]):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def read_table(path: Union[str, Path]) -> pd.DataFrame:
    """ reads a formatted table as text so re-emitting reproduces the file exactly """
    return pd.read_csv(path, dtype=str, keep_default_na=False)


def write_json(obj: dict, path: Union[str, Path]):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, allow_nan=True)
        f.write("\n")


def read_json(path: Union[str, Path]) -> dict:
    with open(path) as f:
        return json.load(f)
