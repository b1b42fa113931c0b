"""Grasp-rectangle detection pipeline over Cornell-style RGB-D data."""

__version__ = "0.1.0"
