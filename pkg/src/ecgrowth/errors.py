"""Exception hierarchy. Each family maps to a CLI exit code."""


class EcGrowthError(Exception):
    exit_code = 1


class ValidationError(EcGrowthError, ValueError):
    """Bad arguments, configuration or scenario values."""

    exit_code = 2


class DataError(EcGrowthError, ValueError):
    """Malformed, missing or misaligned input data."""

    exit_code = 3


class YearGapError(DataError):
    pass


class SchemaError(DataError):
    pass


class NumericalError(EcGrowthError, ArithmeticError):
    exit_code = 4


class SingularDesignError(NumericalError):
    def __init__(self, message: str, dependent_columns: tuple[str, ...] = ()):
        super().__init__(message)
        self.dependent_columns = dependent_columns


class DegreesOfFreedomError(NumericalError):
    pass


class NoSignificantPredictorsError(NumericalError):
    pass
