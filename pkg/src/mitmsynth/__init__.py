"""Depth-optimal exact synthesis of small Clifford+T circuits."""

__version__ = "0.1.0"
