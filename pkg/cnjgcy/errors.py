""" exception hierarchy shared by every cnjgcy module """


class CnjgcyError(Exception):
    pass


class MapDomainError(CnjgcyError, ValueError):
    """ map parameter out of range, or an input outside the unit interval """


class DimensionError(CnjgcyError, ValueError):
    pass


class TapeConsumedError(CnjgcyError, RuntimeError):
    pass


class NumericalError(CnjgcyError, FloatingPointError):
    """ NaN or Inf in gradients, parameters or losses """


class InsufficientEnsembleError(CnjgcyError):
    pass


class ConfigError(CnjgcyError, ValueError):
    pass
