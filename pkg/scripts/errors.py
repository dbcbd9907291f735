"""Exception hierarchy shared by every module of the toolkit."""


class PrivalovError(Exception):
    """Base class for all toolkit errors."""


class ArgumentError(PrivalovError, ValueError):
    """An argument is outside the range an operation accepts."""


class DomainError(PrivalovError, ValueError):
    """A point lies outside the domain of a map (poles, r >= 1, Im w <= 0)."""


class ContractViolation(PrivalovError, ValueError):
    """A caller broke a documented precondition."""


class ConfigError(PrivalovError, ValueError):
    """The run configuration or schema file is invalid."""


class QuadratureError(PrivalovError, RuntimeError):
    """Requested tolerance could not be reached."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved relative error {achieved:.3e})")
        self.achieved = achieved


class EstimateAborted(PrivalovError, RuntimeError):
    """Too many walks hit the step cap for the estimate to be trusted."""

    def __init__(self, aborted: int, samples: int, limit: float):
        super().__init__(
            f"{aborted} of {samples} walks exceeded max_steps "
            f"({aborted / samples:.4%} > {limit:.2%})"
        )
        self.aborted = aborted
        self.samples = samples
