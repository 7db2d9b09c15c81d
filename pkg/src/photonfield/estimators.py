"""scikit-learn style front end.

* :class:`MostLikelySpectrum` fits the most likely spectral density of a photon
  content and scores field samples under it.
* :class:`SpectralDensityEstimator` turns real lattice fields into their
  energy spectral densities and fits ensemble means with standard errors.
* :class:`PhotonFieldSampler` draws real lattice fields for a content.

Field samples are ``(n_samples, n_modes)`` arrays of ``A(x_j)``; densities
come back in numpy FFT order (see :mod:`photonfield.lattice`).
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .lattice import (
    DensityField,
    GridSpec,
    RealField,
    circular_autocorrelation,
    fields_to_spectra,
)
from .optimizer import (
    PhotonContent,
    ascent_maximize,
    log_probability,
    most_likely_autocorrelation,
    most_likely_density,
)
from .sampler import DEFAULT_BATCHES, EnsembleSpec, _GroupAccumulator, sample
from .validation import ContractError, check_field_samples, check_positive_int


def _grid(n_modes, box_length, include_zero_mode, mass):
    return GridSpec(n_modes, box_length, include_zero_mode=include_zero_mode, mass=mass)


def _content(grid, modes, counts):
    modes = tuple(modes or ())
    counts = tuple(counts) if counts is not None else (1,) * len(modes)
    if len(counts) != len(modes):
        raise ContractError("modes and counts must have the same length")
    return PhotonContent(grid, tuple(zip(modes, counts)))


def _densities(X, grid):
    d = np.abs(fields_to_spectra(X, grid)) ** 2
    if not grid.include_zero_mode:
        d[:, 0] = 0.0
    return d


class MostLikelySpectrum(BaseEstimator):
    """Most likely energy spectral density for a photon content.

    Parameters
    ----------
    n_modes, box_length, mass, include_zero_mode :
        Lattice definition.
    modes, counts :
        Signed photon mode indices and their photon counts.
    method : {"closed_form", "ascent"}
        Closed-form spike or projected-gradient ascent from a flat start.
    tol, max_iter :
        Ascent stopping rule.
    """

    def __init__(self, n_modes=128, box_length=20 * math.pi, mass=0.0,
                 include_zero_mode=False, modes=(10,), counts=(1,),
                 method="closed_form", tol=1e-10, max_iter=100_000):
        self.n_modes = n_modes
        self.box_length = box_length
        self.mass = mass
        self.include_zero_mode = include_zero_mode
        self.modes = modes
        self.counts = counts
        self.method = method
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X=None, y=None):
        grid = _grid(self.n_modes, self.box_length, self.include_zero_mode, self.mass)
        content = _content(grid, self.modes, self.counts)
        if self.method == "closed_form":
            report = most_likely_density(content)
        elif self.method == "ascent":
            report = ascent_maximize(content, tol=self.tol, max_iter=self.max_iter)
        else:
            raise ContractError(f"unknown method {self.method!r}")
        self.grid_ = grid
        self.content_ = content
        self.report_ = report
        self.density_ = np.array(report.density.values)
        self.log_prob_ = report.log_prob
        self.autocorrelation_ = np.array(most_likely_autocorrelation(content).values)
        return self

    def score_samples(self, X):
        """Log probability of each sample's spectral density under the content."""
        check_is_fitted(self, "report_")
        X = check_field_samples(X, self.grid_.n_modes)
        out = np.empty(X.shape[0])
        for i, d in enumerate(_densities(X, self.grid_)):
            out[i] = log_probability(DensityField.symmetrized(self.grid_, d), self.content_)
        return out

    def score(self, X, y=None):
        return float(np.mean(self.score_samples(X)))


class SpectralDensityEstimator(TransformerMixin, BaseEstimator):
    """Periodogram transformer with ensemble statistics.

    ``transform`` maps each field to ``D(p_k) = |At(p_k)|^2``.  ``fit`` also
    records the ensemble mean of ``D`` and of the real-space autocorrelation
    ``sum_y A(y) A(y + x) dx`` with batch-means standard errors.  When the
    zero mode is excluded it is dropped, which removes the field mean.
    """

    def __init__(self, box_length=20 * math.pi, include_zero_mode=False, mass=0.0,
                 n_batches=DEFAULT_BATCHES):
        self.box_length = box_length
        self.include_zero_mode = include_zero_mode
        self.mass = mass
        self.n_batches = n_batches

    def fit(self, X, y=None):
        X = check_field_samples(X)
        check_positive_int(self.n_batches, "n_batches")
        grid = _grid(X.shape[1], self.box_length, self.include_zero_mode, self.mass)
        if not grid.include_zero_mode:
            X = X - X.mean(axis=1, keepdims=True)
        d = _densities(X, grid)
        r = circular_autocorrelation(X, grid.dx)
        acc_d = _GroupAccumulator(X.shape[0], self.n_batches, grid.n_modes)
        acc_r = _GroupAccumulator(X.shape[0], self.n_batches, grid.n_modes)
        acc_d.add(0, d)
        acc_r.add(0, r)
        mean_d, se_d = acc_d.finish()
        mean_r, se_r = acc_r.finish()
        self.grid_ = grid
        self.n_samples_ = X.shape[0]
        self.mean_density_ = DensityField.symmetrized(grid, mean_d).values.copy()
        self.density_stderr_ = se_d
        self.mean_autocorr_ = RealField(grid, mean_r).values.copy()
        self.autocorr_stderr_ = se_r
        return self

    def transform(self, X):
        check_is_fitted(self, "grid_")
        X = check_field_samples(X, self.grid_.n_modes)
        return _densities(X, self.grid_)


class PhotonFieldSampler(BaseEstimator):
    """Draw lattice fields from ``|Psi|^2`` of a photon content."""

    def __init__(self, n_modes=128, box_length=20 * math.pi, mass=0.0,
                 include_zero_mode=False, modes=(), counts=(), seed=0,
                 batch_size=8192, threads=1):
        self.n_modes = n_modes
        self.box_length = box_length
        self.mass = mass
        self.include_zero_mode = include_zero_mode
        self.modes = modes
        self.counts = counts
        self.seed = seed
        self.batch_size = batch_size
        self.threads = threads

    def _spec(self, n_samples):
        grid = _grid(self.n_modes, self.box_length, self.include_zero_mode, self.mass)
        content = _content(grid, self.modes, self.counts)
        return EnsembleSpec(content, n_samples, seed=self.seed,
                            batch_size=self.batch_size, threads=self.threads)

    def sample(self, n_samples, space="real"):
        """``(n_samples, n_modes)`` real fields, or complex amplitudes for ``space="spectral"``."""
        if space not in ("real", "spectral"):
            raise ContractError(f"space must be 'real' or 'spectral', got {space!r}")
        spec = self._spec(n_samples)
        parts = []
        for batch in sample(spec):
            parts.append(batch.real_fields() if space == "real" else batch.amplitudes)
        return np.concatenate(parts, axis=0)
