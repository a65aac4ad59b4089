import numpy as np
import pytest

from cnjgcy.errors import ConfigError, MapDomainError
from cnjgcy.maps import (MapKind, MapSpec, eval_map, is_piecewise,
                         latent_logistic_step, logistic_map, orbit, phi,
                         phi_inverse, phi_inverse_prime, phi_prime, tent_map)

LOGISTIC = MapSpec(MapKind.LOGISTIC, r=4.0)
TENT = MapSpec(MapKind.TENT, mu=2.0)


def test_tent_values():
    assert eval_map(TENT, 0.25) == 0.5, "tent(0.25)"
    assert eval_map(TENT, 0.75) == 0.5, "tent(0.75)"
    assert eval_map(TENT, 0.5) == 1.0, "tent(0.5) uses the right branch"
    assert eval_map(MapSpec(MapKind.TENT, mu=1.0), 0.5) == 0.5


def test_logistic_values():
    assert eval_map(LOGISTIC, 0.5) == 1.0
    assert abs(eval_map(LOGISTIC, 0.3) - 0.84) < 1e-15
    assert abs(eval_map(MapSpec(MapKind.LOGISTIC, r=3.9), 0.5) - 0.975) < 1e-15


def test_other_maps():
    custom = MapSpec(MapKind.CUSTOM)
    assert abs(eval_map(custom, 0.25) - 16 * 0.25 * (1 - 1 + 0.25)) < 1e-15
    kf = MapSpec(MapKind.KATSURA_FUKUDA, r=0.5)
    expected = 4 * 0.5 * 0.5 * 0.75 / (1 - 0.125)**2
    assert abs(eval_map(kf, 0.5) - expected) < 1e-15
    doubling = MapSpec(MapKind.DOUBLING)
    assert eval_map(doubling, 0.75) == 0.5
    assert eval_map(doubling, 0.5) == 0.0
    pm = MapSpec(MapKind.POMEAU_MANNEVILLE, z=2.0, a=1.0)
    assert abs(eval_map(pm, 0.5) - 0.75) < 1e-15
    assert abs(eval_map(pm, 0.8) - (0.8 + 0.64 - 1)) < 1e-15


def test_eval_map_shapes():
    xs = np.linspace(0, 1, 11)
    out = eval_map(LOGISTIC, xs)
    assert isinstance(out, np.ndarray) and out.shape == xs.shape
    assert isinstance(eval_map(LOGISTIC, 0.1), float)
    assert np.allclose(out, logistic_map(xs, 4.0))


def test_eval_map_rejects_bad_inputs():
    with pytest.raises(MapDomainError):
        eval_map(LOGISTIC, 1.5)
    with pytest.raises(MapDomainError):
        eval_map(LOGISTIC, np.array([0.2, -0.1]))
    with pytest.raises(MapDomainError):
        eval_map(LOGISTIC, float("nan"))


def test_bad_parameters():
    with pytest.raises(MapDomainError):
        MapSpec(MapKind.LOGISTIC, r=4.5)
    with pytest.raises(MapDomainError):
        MapSpec(MapKind.TENT, mu=0.0)
    with pytest.raises(MapDomainError):
        MapSpec(MapKind.KATSURA_FUKUDA, r=1.0)
    with pytest.raises(MapDomainError):
        MapSpec(MapKind.POMEAU_MANNEVILLE, z=1.0)


def test_parse_and_label():
    assert MapSpec.parse("logistic", 3.9) == MapSpec(MapKind.LOGISTIC, r=3.9)
    assert MapSpec.parse("katsura_fukuda", 0.5).r == 0.5
    assert MapSpec.parse("pomeau-manneville", 1.5).z == 1.5
    assert MapSpec.parse("tent").mu == 2.0
    assert MapSpec.parse("logistic", 4).label == "logistic(r=4)"
    assert MapSpec.parse("pomeau-manneville", 1.5).label == "pomeau-manneville(z=1.5,a=1)"
    assert MapSpec.parse("doubling").param is None
    with pytest.raises(ConfigError):
        MapSpec.parse("henon")
    spec = MapSpec(MapKind.POMEAU_MANNEVILLE, z=2.5, a=0.5)
    assert MapSpec.from_dict(spec.to_dict()) == spec


def test_piecewise_kinds():
    assert is_piecewise(TENT) and is_piecewise(MapSpec(MapKind.DOUBLING))
    assert is_piecewise(MapSpec(MapKind.POMEAU_MANNEVILLE))
    assert not is_piecewise(LOGISTIC) and not is_piecewise(MapSpec(MapKind.CUSTOM))


def test_conjugacy_identity():
    """ phi^-1(T_2(phi(x))) reproduces the logistic map with r = 4 """
    xs = np.random.default_rng(0).random(1000)
    error = np.abs(latent_logistic_step(xs) - logistic_map(xs, 4.0))
    assert error.max() < 1e-12, "max conjugacy error {}".format(error.max())
    assert np.abs(phi_inverse(tent_map(phi(xs))) - logistic_map(xs, 4.0)).max() < 1e-12


def test_phi_endpoints_and_inverse():
    assert phi(0.0) == 0.0
    assert abs(phi(1.0) - 1.0) < 1e-15
    assert abs(phi(0.5) - 0.5) < 1e-15
    xs = np.linspace(0, 1, 101)
    assert np.abs(phi_inverse(phi(xs)) - xs).max() < 1e-12
    # within the clamp tolerance values are clipped, beyond it they are rejected
    assert phi(1 + 1e-9) == phi(1.0)
    with pytest.raises(MapDomainError):
        phi(1.01)
    with pytest.raises(MapDomainError):
        phi_inverse(np.array([0.5, np.nan]))


def test_phi_derivatives():
    xs = np.linspace(0.05, 0.95, 19)
    h = 1e-6
    numeric = (phi(xs + h) - phi(xs - h)) / (2 * h)
    assert np.allclose(phi_prime(xs), numeric, rtol=1e-6)
    numeric_inverse = (phi_inverse(xs + h) - phi_inverse(xs - h)) / (2 * h)
    assert np.allclose(phi_inverse_prime(xs), numeric_inverse, rtol=1e-6)


def test_orbit():
    trajectory = orbit(LOGISTIC, 0.4, 5)
    assert len(trajectory) == 5 and trajectory[0] == 0.4
    for (a, b) in zip(trajectory[:-1], trajectory[1:]):
        assert b == eval_map(LOGISTIC, a)
    assert np.all(orbit(TENT, 0.0, 10) == 0.0), "0 is a fixed point of the tent map"
    with pytest.raises(MapDomainError):
        orbit(LOGISTIC, 1.0, 5)
    with pytest.raises(MapDomainError):
        orbit(LOGISTIC, -0.2, 5)
    with pytest.raises(AssertionError):
        orbit(LOGISTIC, 0.4, 0)


def test_orbit_stays_in_unit_interval():
    for spec in (LOGISTIC, MapSpec(MapKind.CUSTOM), MapSpec(MapKind.KATSURA_FUKUDA, r=0.5),
                 MapSpec(MapKind.DOUBLING), MapSpec(MapKind.POMEAU_MANNEVILLE)):
        trajectory = orbit(spec, 0.3, 200)
        assert ((trajectory >= 0) & (trajectory <= 1)).all(), spec.label


def test_maps_close_the_unit_interval():
    xs = np.linspace(0, 1, 10001)
    for spec in (TENT, MapSpec(MapKind.TENT, mu=1.3), LOGISTIC, MapSpec(MapKind.LOGISTIC, r=3.57),
                 MapSpec(MapKind.CUSTOM), MapSpec(MapKind.KATSURA_FUKUDA, r=0.5),
                 MapSpec(MapKind.DOUBLING), MapSpec(MapKind.POMEAU_MANNEVILLE, z=1.5)):
        image = eval_map(spec, xs)
        assert image.min() >= 0 and image.max() <= 1, spec.label


def test_short_orbits():
    assert np.allclose(orbit(TENT, 0.4, 3), [0.4, 0.8, 0.4], atol=1e-15)
    assert (orbit(MapSpec(MapKind.DOUBLING), 0.1, 4) == [0.1, 0.2, 0.4, 0.8]).all()


def test_phi_is_an_increasing_bijection():
    ys = np.random.default_rng(1).random(1000)
    assert np.abs(phi(phi_inverse(ys)) - ys).max() < 1e-12
    grid = phi(np.linspace(0, 1, 1000))
    assert (np.diff(grid) > 0).all()
