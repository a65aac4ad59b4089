import numpy as np
import pytest

from cnjgcy.errors import DimensionError, NumericalError
from cnjgcy.optim import OptimizerState, adam_step, sgd_step, step


def test_first_adam_step_moves_by_learning_rate():
    params = [np.array([1.0, -2.0]), np.array([0.5])]
    grads = [np.array([0.5, -3.0]), np.array([1e-3])]
    state = OptimizerState.for_parameters(params, learning_rate=0.1)
    adam_step(params, grads, state)
    assert state.step == 1
    assert np.allclose(params[0], [0.9, -1.9], atol=1e-6)
    assert np.allclose(params[1], [0.4], atol=1e-4)


def test_adam_minimises_a_quadratic():
    params = [np.array([3.0, -4.0])]
    state = OptimizerState.for_parameters(params, learning_rate=0.05)
    for _ in range(2000):
        adam_step(params, [2 * params[0]], state)
    assert np.abs(params[0]).max() < 0.05


def test_non_finite_gradients_leave_state_untouched():
    params = [np.array([1.0, 2.0])]
    state = OptimizerState.for_parameters(params, learning_rate=0.1)
    with pytest.raises(NumericalError):
        adam_step(params, [np.array([np.nan, 1.0])], state)
    assert (params[0] == [1.0, 2.0]).all()
    assert state.step == 0 and (state.m[0] == 0).all()


def test_shape_mismatch():
    params = [np.zeros(3)]
    state = OptimizerState.for_parameters(params, 0.1)
    with pytest.raises(DimensionError):
        adam_step(params, [np.zeros(2)], state)
    with pytest.raises(DimensionError):
        sgd_step(params, [np.zeros(3), np.zeros(1)], state)


def test_sgd_and_dispatch():
    params = [np.array([1.0])]
    state = OptimizerState.for_parameters(params, 0.25, method="sgd")
    step(params, [np.array([2.0])], state)
    assert params[0][0] == 0.5
    assert state.step == 1


def test_state_serialisation():
    params = [np.array([[1.0, 2.0]]), np.array([0.0])]
    state = OptimizerState.for_parameters(params, 0.01)
    adam_step(params, [np.array([[0.1, 0.2]]), np.array([0.3])], state)
    again = OptimizerState.from_dict(state.to_dict())
    assert again.step == 1 and again.method == "adam"
    assert all((a == b).all() for (a, b) in zip(again.m, state.m))
    assert again.v[0].shape == (1, 2)
