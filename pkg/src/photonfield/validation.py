"""Exceptions and input checks shared by the estimators and the core modules."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array


class ContractError(ValueError):
    """An argument violates a documented precondition (shape, range, grid)."""


class SymmetryError(ContractError):
    """Hermitian symmetry or evenness is broken beyond tolerance."""


class UnsupportedContentError(ContractError):
    """The requested photon content has no well-defined lattice density."""


def check_positive_int(value, name, even=False):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ContractError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value <= 0:
        raise ContractError(f"{name} must be positive, got {value}")
    if even and value % 2:
        raise ContractError(f"{name} must be even, got {value}")
    return value


def check_nonneg_int(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ContractError(f"{name} must be an integer, got {value!r}")
    if value < 0:
        raise ContractError(f"{name} must be nonnegative, got {value}")
    return int(value)


def check_positive_real(value, name, allow_zero=False):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ContractError(f"{name} must be a real number, got {value!r}") from None
    if not np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = "nonnegative" if allow_zero else "positive"
        raise ContractError(f"{name} must be finite and {bound}, got {value}")
    return value


def check_field_samples(X, n_modes=None):
    """Validate a (n_samples, n_modes) array of real lattice fields.

    A single 1-D field is promoted to one row.
    """
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[np.newaxis, :]
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if n_modes is not None and X.shape[1] != n_modes:
        raise ContractError(
            f"expected fields with {n_modes} lattice sites, got {X.shape[1]}"
        )
    return X
