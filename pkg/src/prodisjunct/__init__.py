"""Positive-value streams of integer linear recurrences with two dominant roots."""

__version__ = "0.1.0"
