"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1,
io/schema problems exit 2, numerical failures exit 3.
"""


class CtlnetError(Exception):
    """Base class for all package errors."""


class ShapeError(CtlnetError):
    """Tensor shapes incompatible with the requested operation."""


class ConfigError(CtlnetError):
    """Invalid configuration; the message names the offending field."""


class SchemaError(CtlnetError):
    """Input file does not match the expected CSV schema."""


class DataError(CtlnetError):
    """Data content problem: ordering, sizing, or an empty split."""


class ContractError(CtlnetError):
    """An API precondition was violated (e.g. missing gradient)."""


class DivergenceError(CtlnetError):
    """Training loss became non-finite."""

    def __init__(self, epoch: int, message: str | None = None):
        self.epoch = epoch
        super().__init__(message or f"training diverged at epoch {epoch}")


class ZeroVarianceError(CtlnetError):
    """R^2 undefined because the targets have zero variance.

    The MAE is still well defined and is carried on the exception.
    """

    def __init__(self, mae: float):
        self.mae = mae
        super().__init__(
            f"R^2 undefined: target variance is zero (MAE={mae!r} still valid)"
        )
