"""Sensor placement against oblivious evaders, and the Bridges problem."""

__version__ = "1.0.0"
