"""Finite-n laws, Poisson and Brownian approximations for Ewens partitions."""

from .laws import EsfParams, Partition, Pmf

__all__ = ["EsfParams", "Partition", "Pmf"]

__version__ = "0.1.0"
