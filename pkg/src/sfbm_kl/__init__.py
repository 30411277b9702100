"""Karhunen-Loeve spectra of fractional and sub-fractional Brownian motion."""

__version__ = "0.1.0"
