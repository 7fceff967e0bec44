"""Toolkit for certification, resonance analysis and deformation of
quotient complex threefolds built from configurations of type (2, 6, 4)."""

__version__ = "0.1.0"
