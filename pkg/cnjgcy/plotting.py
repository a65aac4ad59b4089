from itertools import cycle
from pathlib import Path
from typing import Dict, Iterable, Iterator, Optional, Sequence, Tuple, Union

import matplotlib
matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "cnjgcy"
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from .maps import MapSpec, eval_map  # noqa: E402
from .uncertainty import PredictionSummary  # noqa: E402

Color = Tuple[float, float, float]

# color schemes
def normalize(rgb: Tuple[int, int, int]) -> Color:
    r, g, b = rgb
    return (r/256.0, g/256.0, b/256.0)

def palette(colors: Iterable[Tuple[int, int, int]]) -> Iterator[Color]:
    return cycle(map(normalize, colors))

MODEL_COLORS = [(31, 119, 180), (214, 39, 40), (44, 160, 44), (148, 103, 189), (255, 127, 14)]
TRUTH_COLOR = (40, 40, 40)

def band_id(variant: str, method: str) -> str:
    return "band-{}-{}".format(variant, method)

def _sorted(xs: np.ndarray, *columns: np.ndarray):
    order = np.argsort(xs)
    return (xs[order],) + tuple(c[order] for c in columns)

def plot_bands(
    summaries: Dict[str, PredictionSummary],
    method: str,
    ax: Optional[matplotlib.axes.Axes] = None,
    colors: Optional[Iterator[Color]] = None,
    alpha: float = 0.25
) -> matplotlib.axes.Axes:
    """ truth, mean and one shaded 95% band per model, sorted by x """
    if not ax:
        ax = plt.gca()
    if not colors:
        colors = palette(MODEL_COLORS)
    truth_drawn = False
    for (variant, summary), color in zip(summaries.items(), colors):
        frame = summary.to_frame()
        x, truth, mean, lower, upper = _sorted(
            frame["x"].to_numpy(), frame["true"].to_numpy(), frame["mean"].to_numpy(),
            frame["lower"].to_numpy(), frame["upper"].to_numpy())
        if not truth_drawn:
            ax.plot(x, truth, "k.", markersize=3, label="true")
            truth_drawn = True
        ax.plot(x, mean, color=color, linewidth=1, label="{} mean".format(variant))
        ax.fill_between(x, lower, upper, color=color, alpha=alpha, linewidth=0,
                        gid=band_id(variant, method))
    ax.set_title(method)
    ax.set_xlabel("$x$")
    ax.set_ylabel("$U(x)$")
    ax.legend(fontsize="small")
    return ax

def uq_figure(summaries: Dict[str, Dict[str, PredictionSummary]], title: str = "") -> matplotlib.figure.Figure:
    """ summaries: method -> variant -> summary; one panel per method """
    fig, axes = plt.subplots(len(summaries), 1, figsize=(7, 3.5 * len(summaries)), squeeze=False)
    for ax, (method, by_variant) in zip(axes[:, 0], summaries.items()):
        plot_bands(by_variant, method, ax=ax)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return fig

def prediction_figure(
    xs: np.ndarray,
    truth: np.ndarray,
    predictions: Dict[str, np.ndarray],
    title: str = ""
) -> matplotlib.figure.Figure:
    """ test-set predictions of several models against the true map """
    fig, ax = plt.subplots(1, 1, figsize=(6, 4))
    x, y = _sorted(xs, truth)
    ax.plot(x, y, color=normalize(TRUTH_COLOR), linewidth=1.5, label="true")
    for (label, predicted), color in zip(predictions.items(), palette(MODEL_COLORS)):
        ax.plot(xs, predicted, ".", color=color, markersize=4, label=label)
    ax.set_xlabel("$x$")
    ax.set_ylabel("$U(x)$")
    ax.set_title(title)
    ax.legend(fontsize="small")
    fig.tight_layout()
    return fig

def trace_figure(trace: pd.DataFrame, model_columns: Sequence[str], title: str = "") -> matplotlib.figure.Figure:
    """ predicted vs true next orbit value over the test windows """
    test = trace[trace["partition"] == "test"]
    fig, ax = plt.subplots(1, 1, figsize=(8, 3.5))
    ax.plot(test["index"], test["true"], "k-o", markersize=2, linewidth=1, label="true")
    for column, color in zip(model_columns, palette(MODEL_COLORS)):
        ax.plot(test["index"], test[column], "--", color=color, linewidth=1, label=column)
    ax.set_xlabel("step")
    ax.set_ylabel("$x_{n+1}$")
    ax.set_title(title)
    ax.legend(fontsize="small")
    fig.tight_layout()
    return fig

def maps_figure(specs: Sequence[MapSpec], resolution: int = 1000) -> matplotlib.figure.Figure:
    columns = 2
    rows = int(np.ceil(len(specs) / columns))
    fig, axes = plt.subplots(rows, columns, figsize=(8, 3.5 * rows), squeeze=False)
    x = np.linspace(0, 1, resolution, endpoint=False)
    for ax, spec in zip(axes.flat, specs):
        ax.plot(x, eval_map(spec, x), ".", markersize=1, color=normalize((31, 119, 180)))
        ax.set_title(spec.label)
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
    for ax in list(axes.flat)[len(specs):]:
        ax.axis("off")
    fig.tight_layout()
    return fig

def save_svg(fig: matplotlib.figure.Figure, path: Union[str, Path]):
    # fixed metadata keeps repeated runs byte-identical
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
