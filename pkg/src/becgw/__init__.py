"""Strain sensitivity of squeezed-phonon condensate gravitational-wave detectors."""

__version__ = "0.1.0"
