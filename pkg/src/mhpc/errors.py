"""Exception types shared across the package."""


class MHPCError(Exception):
    """Base class for all package errors."""


class ConfigurationError(MHPCError):
    """Problem, schedule, or config is internally inconsistent (dimension
    mismatches, bad parameter values, invalid schedules)."""


class ParameterError(ConfigurationError):
    """A numeric parameter is outside its valid range."""


class RolloutDivergenceError(MHPCError):
    """A rollout produced a non-finite state. Carries the phase and step at
    which divergence was detected."""

    def __init__(self, phase: int, step: int, message: str = ""):
        self.phase = phase
        self.step = step
        super().__init__(
            message or f"non-finite state in phase {phase} at step {step}"
        )


class ScheduleExhaustedError(MHPCError):
    """The abstraction schedule has no remaining horizon to shift into."""


class SingularContactError(MHPCError):
    """A contact/KKT system was singular at the queried configuration."""

    def __init__(self, message: str, condition: float = float("inf")):
        self.condition = condition
        super().__init__(message)


class RegularizationError(MHPCError):
    """Backward sweep could not restore positive definiteness below the
    regularization ceiling."""
