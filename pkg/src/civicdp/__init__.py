"""Participatory differential-privacy configuration engine."""

__version__ = "0.1.0"

__all__ = [
    "analysis",
    "cli",
    "dataset",
    "dp",
    "errors",
    "explain",
    "mcda",
    "service",
]
