"""Experiment configs, the command-line interface and SVG output."""

from .config import ExperimentConfig

__all__ = ["ExperimentConfig"]
