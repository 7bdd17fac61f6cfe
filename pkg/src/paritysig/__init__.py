"""Signatures, comparison games and unambiguous automata on regular trees."""

__version__ = "0.1.0"
