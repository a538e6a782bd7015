"""Child vs adult detection from touch gestures and motion sensors."""

__version__ = "0.1.0"
