class DynPixError(Exception):
    """Base class for every error raised on purpose by dynpix."""


class ConfigurationError(DynPixError, ValueError):
    pass


class DatasetLoadError(DynPixError):
    pass


class CheckpointError(DynPixError):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class SpecMismatchError(CheckpointError):
    pass


class NonFiniteLossError(DynPixError, ArithmeticError):
    def __init__(self, term: str, value: float | None = None):
        detail = f" (value={value})" if value is not None else ""
        super().__init__(f"Non-finite value in loss term '{term}'{detail}")
        self.term = term
        self.value = value


class EvaluationError(DynPixError):
    def __init__(self, sample_id: str, cause: Exception):
        super().__init__(f"Forward pass failed for sample '{sample_id}': {cause}")
        self.sample_id = sample_id
