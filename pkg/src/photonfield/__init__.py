"""Photon-content wave functionals of a free scalar field on a periodic lattice.

Builds the n-photon prefactors, finds most likely energy spectral densities,
and samples lattice field configurations exactly.
"""

from .lattice import (
    DensityField,
    GridSpec,
    RealField,
    SpectralField,
    autocorrelation,
    forward_transform,
    inverse_transform,
    spectral_density,
)
from .optimizer import (
    MaximizerReport,
    PhotonContent,
    ascent_maximize,
    counter_propagating_extremum,
    log_probability,
    most_likely_autocorrelation,
    most_likely_density,
)
from .sampler import EnsembleSpec, EnsembleStats, estimate_autocorrelation, estimate_density, sample
from .validation import ContractError, SymmetryError, UnsupportedContentError
from .wavefunctional import (
    PhotonPolynomial,
    VacuumGaussian,
    evaluate_log_density,
    nphoton_polynomial,
    two_photon_amplitude,
)
from .estimators import MostLikelySpectrum, PhotonFieldSampler, SpectralDensityEstimator

__version__ = "0.1.0"

__all__ = [
    "ContractError", "DensityField", "EnsembleSpec", "EnsembleStats", "GridSpec",
    "MaximizerReport", "MostLikelySpectrum", "PhotonContent", "PhotonFieldSampler",
    "PhotonPolynomial", "RealField", "SpectralDensityEstimator", "SpectralField",
    "SymmetryError", "UnsupportedContentError", "VacuumGaussian", "ascent_maximize",
    "autocorrelation", "counter_propagating_extremum", "estimate_autocorrelation",
    "estimate_density", "evaluate_log_density", "forward_transform", "inverse_transform",
    "log_probability", "most_likely_autocorrelation", "most_likely_density",
    "nphoton_polynomial", "sample", "spectral_density", "two_photon_amplitude",
]
