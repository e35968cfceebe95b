"""Hyperfine structure of entanglement for free fermions.

The package computes entanglement contours, full counting statistics and
their hyperfine decomposition for quadratic fermion models, reconstructs
many-body entanglement spectra from Renyi traces, compares chain data with
continuum closed forms, and samples the matching AdS3 extremal curves.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ComputationError,
    ConfigError,
    DomainError,
    HyperentError,
)
from .gaussian import ContourField, SpectralData, contour, entropy, spectral_decompose  # noqa: E402
from .lattice import CorrelationMatrix, LatticeSpec, Region, SiteIndex, build_chain_correlation, restrict  # noqa: E402

__all__ = [
    "__version__",
    "ComputationError",
    "ConfigError",
    "ContourField",
    "CorrelationMatrix",
    "DomainError",
    "HyperentError",
    "LatticeSpec",
    "Region",
    "SiteIndex",
    "SpectralData",
    "build_chain_correlation",
    "contour",
    "entropy",
    "restrict",
    "spectral_decompose",
]
