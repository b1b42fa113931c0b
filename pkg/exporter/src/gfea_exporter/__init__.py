"""Frozen-backbone feature exporter for the GFEA interchange format."""

__version__ = "0.1.0"
