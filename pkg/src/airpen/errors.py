"""Exception hierarchy shared across the package.

Exit-code mapping for the CLI lives in cli.py; everything raised by
library code derives from AirPenError so callers can catch one type.
"""


class AirPenError(Exception):
    pass


class InvalidArgumentError(AirPenError):
    """A precondition on an argument was violated."""


class DegenerateTrajectoryError(InvalidArgumentError):
    """Trajectory too short or too small to process."""


class ShapeError(InvalidArgumentError):
    """Tensor/array shapes do not chain."""


class NumericError(AirPenError):
    """Non-finite values where finite ones are required."""


class ParseError(AirPenError):
    """Malformed trajectory/dataset/model file."""


class ModelError(AirPenError):
    """Model missing, untrained, or inconsistent with the request."""


class ModelFormatError(ParseError):
    """Unrecognized model file version."""


class OrderingError(InvalidArgumentError):
    """Out-of-order timestamp pushed into a session."""


class TooShortStrokeError(AirPenError):
    """Stroke ended with fewer than min_points buffered."""
