from dataclasses import replace

import numpy as np
import pytest

from cnjgcy.errors import ConfigError, InsufficientEnsembleError
from cnjgcy.maps import MapKind, MapSpec
from cnjgcy.models import Variant, init_model
from cnjgcy.training import build_model_config, make_dataset, preset, train
from cnjgcy.uncertainty import (MC_DROPOUT_P, UqConfig, UqMethod,
                                ensemble_from_states, ensemble_summary,
                                inference_dropout, mc_dropout_summary,
                                summarize)

LOGISTIC = MapSpec(MapKind.LOGISTIC, r=4.0)
CFG = replace(preset(LOGISTIC), layer_width=16, epochs=3, seed=0)
MODEL = build_model_config(Variant.CONJUGACY_AE, CFG, LOGISTIC)


def test_summarize():
    predictions = np.array([[1.0, 2.0], [3.0, 4.0]])
    summary = summarize(predictions, np.array([0.1, 0.2]), np.array([2.0, 3.0]), UqMethod.ENSEMBLE)
    assert (summary.mean == [2.0, 3.0]).all()
    assert (summary.std == [1.0, 1.0]).all(), "population standard deviation"
    assert np.allclose(summary.lower, [0.04, 1.04]) and np.allclose(summary.upper, [3.96, 4.96])
    assert summary.members == 2
    assert abs(summary.mean_width - 3.92) < 1e-12
    sample = summarize(predictions, np.array([0.1, 0.2]), np.array([2.0, 3.0]), UqMethod.ENSEMBLE, ddof=1)
    assert np.allclose(sample.std, np.sqrt(2.0))


def test_config_validation():
    with pytest.raises(ConfigError):
        UqConfig(UqMethod.MC_DROPOUT, passes=1)
    with pytest.raises(ConfigError):
        UqConfig(UqMethod.ENSEMBLE, ensemble_size=1)
    with pytest.raises(ConfigError):
        UqConfig(dropout_p=1.0)


def test_mc_dropout():
    data = make_dataset(LOGISTIC, 50, seed=1)
    state = init_model(MODEL, seed=2)
    cfg = UqConfig(UqMethod.MC_DROPOUT, passes=20, dropout_p=0.2, seed=3)
    summary = mc_dropout_summary(state, data, cfg)
    assert summary.members == 20
    assert len(summary.mean) == 10
    assert (summary.lower <= summary.mean).all() and (summary.mean <= summary.upper).all()
    assert summary.std.max() > 0
    again = mc_dropout_summary(state, data, cfg)
    assert (again.mean == summary.mean).all(), "seeded masks reproduce"
    frame = summary.to_frame()
    assert list(frame.columns) == ["x", "true", "mean", "std", "lower", "upper"]


def test_mc_dropout_without_dropout_has_zero_width():
    data = make_dataset(LOGISTIC, 50, seed=1)
    state = init_model(MODEL, seed=2)
    summary = mc_dropout_summary(state, data, UqConfig(UqMethod.MC_DROPOUT, passes=5, dropout_p=0.0, seed=0))
    assert summary.mean_width < 1e-12


def test_ensemble_needs_two_members():
    data = make_dataset(LOGISTIC, 50, seed=1)
    cfg = UqConfig(UqMethod.ENSEMBLE, ensemble_size=3)
    with pytest.raises(InsufficientEnsembleError, match="insufficient ensemble"):
        ensemble_from_states([init_model(MODEL, seed=0)], data, cfg, excluded=2)
    summary = ensemble_from_states([init_model(MODEL, seed=s) for s in range(3)], data, cfg)
    assert summary.members == 3 and summary.excluded == 0
    assert summary.method is UqMethod.ENSEMBLE


def test_ensemble_summary():
    data = make_dataset(LOGISTIC, 50, seed=1)
    cfg = UqConfig(UqMethod.ENSEMBLE, ensemble_size=3)
    summary = ensemble_summary([10, 11, 12], MODEL, data, cfg, CFG)
    assert summary.members == 3
    assert summary.std.max() > 0, "members differ only in their initialisation"
    assert set(summary.to_dict()) >= {"method", "members", "excluded", "mean_width"}
    with pytest.raises(ConfigError):
        ensemble_summary([10, 11], MODEL, data, cfg, CFG)


def test_identical_seeds_give_zero_width():
    data = make_dataset(LOGISTIC, 50, seed=1)
    summary = ensemble_summary([4, 4], MODEL, data, UqConfig(UqMethod.ENSEMBLE, ensemble_size=2), CFG)
    assert summary.mean_width < 1e-12
    assert (summary.std == 0).all()


def test_ensemble_members_differ_only_in_initialisation():
    data = make_dataset(LOGISTIC, 60, seed=6)
    cfg = UqConfig(UqMethod.ENSEMBLE, ensemble_size=2)
    summary = ensemble_summary([21, 22], MODEL, data, cfg, CFG)
    members = [train(MODEL, data, CFG, state=init_model(MODEL, seed))[0] for seed in (21, 22)]
    expected = ensemble_from_states(members, data, cfg)
    assert (summary.mean == expected.mean).all()
    assert (summary.std == expected.std).all()


def test_inference_dropout_follows_training():
    assert inference_dropout(replace(CFG, dropout_p=0.1)) == 0.1
    assert inference_dropout(replace(CFG, dropout_p=0.0)) == MC_DROPOUT_P
    assert inference_dropout(replace(CFG, dropout_p=0.1), 0.3) == 0.3
    assert inference_dropout(CFG, 0.0) == 0.0
