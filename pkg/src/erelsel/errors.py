class InputError(ValueError):
    """Malformed or out-of-range input (CLI exit code 1)."""


class DegenerateDataError(ArithmeticError):
    """A quantity is undefined for the given data (CLI exit code 2)."""


class EllipseFitError(DegenerateDataError):
    """Point set does not determine an ellipse."""
