"""Custom exceptions for the patrol game library."""


class PatrolGameError(Exception):
    """Base exception for patrol game errors."""
    exit_code = 3


class ValidationError(PatrolGameError):
    """Base for errors caused by invalid user input (CLI exit code 2)."""
    exit_code = 2


class InvalidParamsError(ValidationError):
    """Raised when (lambda, t, p) or another numeric argument is out of range."""
    pass


class NegativeMeanError(ValidationError):
    """Raised when a count distribution is requested for a negative mean."""
    pass


class InfeasibleError(ValidationError):
    """Raised when no distribution on the given support can have the requested mean."""
    pass


class InvalidSpeedProfileError(ValidationError):
    """Raised when a speed profile has non-positive speeds or fractions not summing to 1."""
    pass


class ScheduleSpecError(ValidationError):
    """Raised when a schedule-spec document cannot be parsed or validated."""
    pass


class RateCapViolationError(ValidationError):
    """Raised when a schedule dispatches faster than its declared rate cap."""
    pass


class StrategySpecError(ValidationError):
    """Raised when an attacker strategy string is malformed."""
    pass


class HorizonTooShortError(ValidationError):
    """Raised when a horizon is too short for the requested sample or check."""
    pass


class WindowExceedsHorizonError(PatrolGameError):
    """Raised when an attack window reaches past the safe part of a realization."""
    pass


class InsufficientPassesError(PatrolGameError):
    """Raised when a realization holds too few observable passes for an attacker."""
    pass


class FormulaMismatchError(PatrolGameError):
    """Raised when the two forms of the game value disagree."""
    pass


class SaveError(PatrolGameError):
    """Raised when a result payload cannot be written to disk."""
    pass
