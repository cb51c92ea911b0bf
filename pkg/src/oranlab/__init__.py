"""Desk-scale Open RAN slicing control lab."""

__version__ = "0.1.0"
