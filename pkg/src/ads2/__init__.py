"""Scalar fields on the AdS2 strip: self-adjoint extensions, spectra and symmetry."""

__version__ = "0.1.0"
