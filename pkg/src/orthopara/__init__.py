"""Ortho-para hydrogen conversion toolkit."""

__version__ = "0.1.0"
