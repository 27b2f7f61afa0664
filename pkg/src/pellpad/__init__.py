"""Certified re-execution of the Pell/Padovan sum finiteness argument."""

__version__ = "0.1.0"
