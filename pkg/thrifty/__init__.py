# thrifty/__init__.py
"""Numerical lab for thrifty (multi-shot) classical shadow estimation."""

__version__ = "0.3.0"
