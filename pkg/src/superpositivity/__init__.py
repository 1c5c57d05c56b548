"""Numerical toolkit for mollified moments, trace-formula identities and
Selberg-lemma zero-density bounds for weight-2 modular L-functions."""

__version__ = "0.1.0"
