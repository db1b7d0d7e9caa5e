class ToolError(Exception):
    """Raised when a command receives unusable arguments."""

    def __init__(self, message):
        self.message = message


class ConfigError(Exception):
    """Raised when the settings file or environment holds an unusable value."""

    def __init__(self, message):
        super().__init__(message)
        self.message = message


class RatingBoundError(Exception):
    """Base exception for all rating-model and bound errors"""

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message


class InvalidParams(RatingBoundError):
    """Exception raised when model parameters violate their invariants"""


class DegenerateMajority(RatingBoundError):
    """Exception raised when the largest alpha component is not unique"""


class EmptyInput(RatingBoundError):
    """Exception raised when an operation needs at least one rating"""


class InvalidDelta(RatingBoundError):
    """Exception raised when delta lies outside (0, 1)"""


class InvalidFraction(RatingBoundError):
    """Exception raised when a misbehaving fraction is out of range"""


class InvalidEpsilon(RatingBoundError):
    """Exception raised when epsilon is not strictly positive"""


class InvalidInputs(RatingBoundError):
    """Exception raised when a numeric input makes a bound meaningless"""


class BelowThreshold(RatingBoundError):
    """Exception raised when biased attackers are too few to win"""


class AboveThreshold(RatingBoundError):
    """Exception raised when biased attackers are too many to resist"""


class SameAsTruth(RatingBoundError):
    """Exception raised when a resist bound targets the true label"""


class ParseError(RatingBoundError):
    """Exception raised when a rating record cannot be parsed"""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class OutOfScaleRating(RatingBoundError):
    """Exception raised when a rating falls outside 1..m"""

    def __init__(self, value: int, m: int, line: int = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}rating {value} outside scale 1..{m}")
        self.value = value
        self.line = line
