"""Exception types shared across the package."""


class ConsistencyError(ArithmeticError):
    """A computed quantity violated a mathematical invariant beyond round-off."""


class DegenerateInputError(ValueError):
    """Inputs sit on a boundary where a closed form is undefined."""


class SamplingError(RuntimeError):
    """Rejection sampling exhausted its draw budget."""
