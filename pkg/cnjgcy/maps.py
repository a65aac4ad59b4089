from dataclasses import dataclass
from enum import Enum
from logging import warning
from typing import Optional, Union

import numpy as np

from .errors import ConfigError, MapDomainError

Real = Union[float, np.ndarray]

EPS_CLAMP = 1e-7

""" one-dimensional chaotic maps on the unit interval, and the exact
conjugacy between the tent map (mu=2) and the logistic map (r=4) """


class MapKind(Enum):
    TENT = "tent"
    LOGISTIC = "logistic"
    CUSTOM = "custom"
    KATSURA_FUKUDA = "katsura-fukuda"
    DOUBLING = "doubling"
    POMEAU_MANNEVILLE = "pomeau-manneville"


PIECEWISE_KINDS = {MapKind.TENT, MapKind.DOUBLING, MapKind.POMEAU_MANNEVILLE}


@dataclass(frozen=True)
class MapSpec:
    """ which map to evaluate, with its parameters

    mu: tent slope
    r:  logistic / Katsura-Fukuda parameter
    z:  Pomeau-Manneville exponent
    a:  Pomeau-Manneville coefficient
    """
    kind: MapKind
    mu: float = 2.0
    r: float = 4.0
    z: float = 1.5
    a: float = 1.0

    def __post_init__(self):
        if self.kind is MapKind.TENT and not 0 < self.mu <= 2:
            raise MapDomainError("tent slope must satisfy 0 < mu <= 2, got {}".format(self.mu))
        if self.kind is MapKind.LOGISTIC and not 0 < self.r <= 4:
            raise MapDomainError("logistic parameter must satisfy 0 < r <= 4, got {}".format(self.r))
        if self.kind is MapKind.KATSURA_FUKUDA and not 0 < self.r < 1:
            raise MapDomainError("Katsura-Fukuda parameter must satisfy 0 < r < 1, got {}".format(self.r))
        if self.kind is MapKind.POMEAU_MANNEVILLE and not (self.z > 1 and self.a > 0):
            raise MapDomainError("Pomeau-Manneville needs z > 1 and a > 0, got z={} a={}".format(self.z, self.a))

    @staticmethod
    def parse(name: str, param: Optional[float] = None, a: float = 1.0) -> "MapSpec":
        """ builds a spec from a command-line map name; `param` is bound to
        mu (tent), r (logistic, Katsura-Fukuda) or z (Pomeau-Manneville) """
        try:
            kind = MapKind(name.lower().replace("_", "-"))
        except ValueError:
            raise ConfigError("unknown map {!r}; choose from {}".format(
                name, ", ".join(k.value for k in MapKind)))
        if param is None:
            return MapSpec(kind, a=a)
        if kind is MapKind.TENT:
            return MapSpec(kind, mu=param)
        if kind in (MapKind.LOGISTIC, MapKind.KATSURA_FUKUDA):
            return MapSpec(kind, r=param)
        if kind is MapKind.POMEAU_MANNEVILLE:
            return MapSpec(kind, z=param, a=a)
        return MapSpec(kind)

    @property
    def param(self) -> Optional[float]:
        return {
            MapKind.TENT: self.mu,
            MapKind.LOGISTIC: self.r,
            MapKind.KATSURA_FUKUDA: self.r,
            MapKind.POMEAU_MANNEVILLE: self.z,
        }.get(self.kind)

    @property
    def label(self) -> str:
        if self.kind is MapKind.TENT:
            return "tent(mu={:g})".format(self.mu)
        if self.kind in (MapKind.LOGISTIC, MapKind.KATSURA_FUKUDA):
            return "{}(r={:g})".format(self.kind.value, self.r)
        if self.kind is MapKind.POMEAU_MANNEVILLE:
            return "{}(z={:g},a={:g})".format(self.kind.value, self.z, self.a)
        return self.kind.value

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "mu": self.mu, "r": self.r, "z": self.z, "a": self.a}

    @staticmethod
    def from_dict(d: dict) -> "MapSpec":
        return MapSpec(MapKind(d["kind"]), mu=d["mu"], r=d["r"], z=d["z"], a=d["a"])


def is_piecewise(spec: MapSpec) -> bool:
    return spec.kind in PIECEWISE_KINDS


def _unit_interval(x: Real, name: str = "x") -> np.ndarray:
    values = np.asarray(x, dtype=np.float64)
    if np.isnan(values).any():
        raise MapDomainError("{} contains NaN".format(name))
    if (values < 0).any() or (values > 1).any():
        raise MapDomainError("{} must lie in [0, 1], got range [{}, {}]".format(name, values.min(), values.max()))
    return values


def _guarded(values: np.ndarray, kind: MapKind) -> np.ndarray:
    outside = np.count_nonzero((values < 0) | (values > 1))
    if outside:
        warning("%s map produced %s value(s) outside [0, 1]; clamping", kind.value, outside)
        return np.clip(values, 0.0, 1.0)
    return values


def _mod1(values: np.ndarray) -> np.ndarray:
    return values - np.floor(values)


def tent_map(x: Real, mu: float = 2.0) -> Real:
    return np.where(x < 0.5, mu * x, mu * (1 - x))


def tent_prime(x: Real, mu: float = 2.0) -> Real:
    return np.where(x < 0.5, mu, -mu)


def logistic_map(x: Real, r: float = 4.0) -> Real:
    return r * x * (1 - x)


def _apply(spec: MapSpec, x: np.ndarray) -> np.ndarray:
    kind = spec.kind
    if kind is MapKind.TENT:
        return tent_map(x, spec.mu)
    if kind is MapKind.LOGISTIC:
        return logistic_map(x, spec.r)
    if kind is MapKind.CUSTOM:
        return _guarded(16 * x * (1 - 2 * np.sqrt(x) + x), kind)
    if kind is MapKind.KATSURA_FUKUDA:
        r = spec.r
        return _guarded(4 * x * (1 - x) * (1 - r * x) / (1 - r * x**2)**2, kind)
    if kind is MapKind.DOUBLING:
        return _mod1(2 * x)
    if kind is MapKind.POMEAU_MANNEVILLE:
        return _mod1(x + spec.a * x**spec.z)
    raise MapDomainError("unsupported map kind {}".format(kind))


def eval_map(spec: MapSpec, x: Real) -> Real:
    """ one application of the map; accepts a scalar or an array on [0, 1] """
    values = _unit_interval(x)
    image = np.asarray(_apply(spec, values), dtype=np.float64)
    return image if np.ndim(x) else float(image)


def _clamped(x: Real, name: str) -> np.ndarray:
    values = np.asarray(x, dtype=np.float64)
    if np.isnan(values).any():
        raise MapDomainError("{} contains NaN".format(name))
    if (values < -EPS_CLAMP).any() or (values > 1 + EPS_CLAMP).any():
        raise MapDomainError("{} outside [-{eps}, 1+{eps}]".format(name, eps=EPS_CLAMP))
    return np.clip(values, 0.0, 1.0)


def phi(x: Real) -> Real:
    """ conjugacy (2/pi) arcsin(sqrt(x)), taking the logistic map to the tent map """
    values = _clamped(x, "phi input")
    out = (2 / np.pi) * np.arcsin(np.sqrt(values))
    return out if np.ndim(x) else float(out)


def phi_inverse(y: Real) -> Real:
    values = _clamped(y, "phi_inverse input")
    out = np.sin(np.pi * values / 2)**2
    return out if np.ndim(y) else float(out)


def phi_prime(x: Real) -> Real:
    # unbounded at 0 and 1; callers keep x inside (0, 1)
    return 1 / (np.pi * np.sqrt(x * (1 - x)))


def phi_inverse_prime(y: Real) -> Real:
    return (np.pi / 2) * np.sin(np.pi * y)


def latent_logistic_step(y: Real) -> Real:
    """ phi^-1(T_2(phi(y))), i.e. the logistic map with r=4 routed through the tent map """
    return phi_inverse(tent_map(phi(y), 2.0))


def orbit(spec: MapSpec, x0: float, n: int) -> np.ndarray:
    """ [x0, f(x0), ..., f^(n-1)(x0)] """
    assert n >= 1, "orbit length must be positive, got {}".format(n)
    x = float(_unit_interval(x0, "x0"))
    if x == 1.0:
        raise MapDomainError("x0 must lie in [0, 1)")
    trajectory = np.empty(n, dtype=np.float64)
    for i in range(n):
        trajectory[i] = x
        x = float(_apply(spec, x))
    return trajectory
