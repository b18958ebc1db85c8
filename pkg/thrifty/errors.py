# thrifty/errors.py


class ThriftyError(ValueError):
    """Base class for every parameter or size error raised by the lab."""


class InvalidParameter(ThriftyError):
    pass


class CutoffExceeded(ThriftyError):
    pass


class DimensionMismatch(ThriftyError):
    pass


class NotAState(ThriftyError):
    """Trace is not one or the operator is not positive semidefinite."""


def require(condition: bool, message: str, exc: type[ThriftyError] = InvalidParameter) -> None:
    if not condition:
        raise exc(message)


def check_cutoff(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise CutoffExceeded(f"{what} is limited to n <= {limit} qubits (got n={n})")
