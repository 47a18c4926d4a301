"""Certified computation of floor(1/{theta^(1/n)}) and its atypical set."""

__version__ = "0.1.0"
