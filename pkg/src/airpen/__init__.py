"""AirPen-style fingertip gesture recognition toolkit."""

__version__ = "0.1.0"
