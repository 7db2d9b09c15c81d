"""One-dimensional periodic lattice for a single field polarization.

Conventions (natural units, hbar = c = 1):

* sites ``x_j = j * dx`` for ``j = 0 .. N-1`` with ``dx = L / N``;
* momenta ``p_k = k * dp`` with ``dp = 2 pi / L``, signed ``k`` in
  ``[-N/2, N/2 - 1]``; arrays are stored in numpy FFT order;
* forward transform ``At(p_k) = (2 pi)^-1/2 sum_j A(x_j) exp(-i p_k x_j) dx``;
* inverse transform ``A(x_j) = (2 pi)^-1/2 sum_k At(p_k) exp(i p_k x_j) dp``.

The pair ``dx``/``dp`` makes both transforms unitary in the weighted norms, so
``sum |A|^2 dx == sum |At|^2 dp`` holds exactly up to rounding.  The
Nyquist mode ``k = -N/2`` is its own mirror image and carries a real
amplitude.  The zero mode is pinned to zero unless the grid opts in.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .validation import (
    ContractError,
    SymmetryError,
    check_positive_int,
    check_positive_real,
)

HERMITIAN_RTOL = 1e-12
REALNESS_RTOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Lattice geometry plus the dispersion used by the vacuum weight.

    ``mass`` regulates the dispersion ``omega_k = sqrt(p_k^2 + m^2)``; it is
    only needed when the zero mode is kept.
    """

    n_modes: int
    box_length: float
    include_zero_mode: bool = False
    mass: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "n_modes", check_positive_int(self.n_modes, "n_modes", even=True))
        if self.n_modes < 4:
            raise ContractError(f"n_modes must be at least 4, got {self.n_modes}")
        object.__setattr__(self, "box_length", check_positive_real(self.box_length, "box_length"))
        object.__setattr__(self, "mass", check_positive_real(self.mass, "mass", allow_zero=True))
        object.__setattr__(self, "include_zero_mode", bool(self.include_zero_mode))

    @property
    def dx(self):
        return self.box_length / self.n_modes

    @property
    def dp(self):
        return 2.0 * math.pi / self.box_length

    @property
    def nyquist(self):
        return self.n_modes // 2

    @property
    def signed_indices(self):
        """Signed mode index of every storage slot (FFT order)."""
        return np.fft.fftfreq(self.n_modes, d=1.0 / self.n_modes).astype(np.int64)

    @property
    def momenta(self):
        return self.signed_indices * self.dp

    @property
    def positions(self):
        return np.arange(self.n_modes) * self.dx

    @property
    def dispersion(self):
        """Per-slot angular frequency ``omega_k``; the zero slot is ``m``."""
        p = self.momenta
        return np.sqrt(p * p + self.mass**2)

    @property
    def retained(self):
        """Boolean mask of slots that may carry amplitude."""
        mask = np.ones(self.n_modes, dtype=bool)
        if not self.include_zero_mode:
            mask[0] = False
        return mask

    def slot(self, k):
        """Storage slot of signed mode index ``k`` (``k = N/2`` aliases ``-N/2``)."""
        k = int(k)
        half = self.nyquist
        if not -half <= k <= half:
            raise ContractError(f"mode index {k} outside [-{half}, {half}]")
        return k % self.n_modes

    def mode_of_momentum(self, p, rtol=1e-9):
        """Signed index whose momentum equals ``p``; off-grid values are rejected."""
        k = round(p / self.dp)
        if abs(k * self.dp - p) > rtol * max(abs(p), self.dp):
            raise ContractError(
                f"momentum {p} is not on the lattice (dp = {self.dp})"
            )
        self.slot(k)
        return int(k)

    def to_dict(self):
        return {
            "n_modes": self.n_modes,
            "box_length": self.box_length,
            "include_zero_mode": self.include_zero_mode,
            "mass": self.mass,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            n_modes=int(d["n_modes"]),
            box_length=float(d["box_length"]),
            include_zero_mode=bool(d.get("include_zero_mode", False)),
            mass=float(d.get("mass", 0.0)),
        )


def reflect(values):
    """Return ``v(-k)`` for an array ``v(k)`` in FFT order (last axis)."""
    return np.roll(np.flip(values, axis=-1), 1, axis=-1)


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RealField:
    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.shape != (self.grid.n_modes,):
            raise ContractError(
                f"field has shape {v.shape}, grid expects ({self.grid.n_modes},)"
            )
        if not np.all(np.isfinite(v)):
            raise ContractError("field values must be finite")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def coordinates(self):
        return self.grid.positions


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex Fourier amplitudes with Hermitian symmetry ``At(-p) = At(p)*``."""

    grid: GridSpec
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=np.complex128)
        n = self.grid.n_modes
        if a.shape != (n,):
            raise ContractError(f"amplitudes have shape {a.shape}, grid expects ({n},)")
        if not np.all(np.isfinite(a)):
            raise ContractError("amplitudes must be finite")
        scale = float(np.max(np.abs(a))) if n else 0.0
        residue = float(np.max(np.abs(reflect(a) - np.conj(a))))
        if residue > HERMITIAN_RTOL * scale:
            raise SymmetryError(
                f"Hermitian symmetry violated: residue {residue:.3e} vs scale {scale:.3e}"
            )
        if not self.grid.include_zero_mode:
            if abs(a[0]) > HERMITIAN_RTOL * scale:
                raise ContractError(
                    "zero mode carries amplitude but the grid excludes it; "
                    "subtract the field mean or set include_zero_mode=True"
                )
            a[0] = 0.0
        object.__setattr__(self, "amplitudes", _readonly(a))

    def at(self, k):
        return self.amplitudes[self.grid.slot(k)]


@dataclass(frozen=True, eq=False)
class DensityField:
    """Nonnegative, exactly even energy spectral density ``D(p_k)``."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.array(self.values, dtype=np.float64)
        n = self.grid.n_modes
        if d.shape != (n,):
            raise ContractError(f"density has shape {d.shape}, grid expects ({n},)")
        if not np.all(np.isfinite(d)):
            raise ContractError("density must be finite")
        if np.any(d < 0):
            raise ContractError(f"density must be nonnegative (min {d.min():.3e})")
        if np.any(d != reflect(d)):
            raise SymmetryError("density is not even: D(-p) != D(p)")
        if not self.grid.include_zero_mode and d[0] != 0:
            raise ContractError("zero-mode density must vanish when the grid excludes it")
        object.__setattr__(self, "values", _readonly(d))

    @classmethod
    def symmetrized(cls, grid, values):
        """Build from arbitrary nonnegative values by averaging with the mirror image."""
        d = np.asarray(values, dtype=np.float64)
        d = 0.5 * (d + reflect(d))
        if not grid.include_zero_mode:
            d = d.copy()
            d[0] = 0.0
        return cls(grid, d)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n_modes))

    def at(self, k):
        return float(self.values[self.grid.slot(k)])

    def pair_mean(self, k):
        """``Dbar(p_k) = (D(p_k) + D(-p_k)) / 2``."""
        return 0.5 * (self.at(k) + self.at(-k))


# -- array-level transforms (last axis), shared with the sampler ------------


def fields_to_spectra(values, grid):
    """Forward transform of real fields along the last axis; exactly Hermitian."""
    values = np.asarray(values, dtype=np.float64)
    n = grid.n_modes
    half = np.fft.rfft(values, axis=-1) * (grid.dx / math.sqrt(2.0 * math.pi))
    half[..., 0] = half[..., 0].real
    half[..., n // 2] = half[..., n // 2].real
    mirror = np.conj(half[..., n // 2 - 1 : 0 : -1])
    return np.concatenate([half, mirror], axis=-1)


def spectra_to_fields(amplitudes, grid, rtol=REALNESS_RTOL):
    """Inverse transform along the last axis; rejects a non-negligible imaginary part."""
    amplitudes = np.asarray(amplitudes, dtype=np.complex128)
    out = np.fft.ifft(amplitudes, axis=-1) * (grid.n_modes * grid.dp / math.sqrt(2.0 * math.pi))
    scale = float(np.max(np.abs(out))) if out.size else 0.0
    residue = float(np.max(np.abs(out.imag))) if out.size else 0.0
    if residue > rtol * scale:
        raise SymmetryError(f"inverse transform is not real: residue {residue:.3e}")
    return out.real


def forward_transform(field):
    if not isinstance(field, RealField):
        raise ContractError("forward_transform expects a RealField")
    return SpectralField(field.grid, fields_to_spectra(field.values, field.grid))


def inverse_transform(spec):
    if not isinstance(spec, SpectralField):
        raise ContractError("inverse_transform expects a SpectralField")
    return RealField(spec.grid, spectra_to_fields(spec.amplitudes, spec.grid))


def parseval_energy(field):
    """``sum_j |A(x_j)|^2 dx``."""
    return float(np.sum(field.values**2) * field.grid.dx)


def spectral_energy(spec):
    """``sum_k |At(p_k)|^2 dp``."""
    return float(np.sum(np.abs(spec.amplitudes) ** 2) * spec.grid.dp)


def spectral_density(spec):
    d = np.abs(spec.amplitudes) ** 2
    # Averaging with the mirror is a no-op for exactly Hermitian input and
    # makes evenness exact when the symmetry only holds to rounding.
    return DensityField.symmetrized(spec.grid, d)


def density_to_autocorrelation(values, grid, rtol=REALNESS_RTOL):
    """``R(x_j) = sum_k D(p_k) exp(i p_k x_j) dp`` along the last axis."""
    r = np.fft.ifft(np.asarray(values, dtype=np.float64), axis=-1) * (grid.n_modes * grid.dp)
    scale = float(np.max(np.abs(r))) if r.size else 0.0
    residue = float(np.max(np.abs(r.imag))) if r.size else 0.0
    if residue > rtol * scale:
        raise SymmetryError(f"density has an odd component: residue {residue:.3e}")
    return r.real


def autocorrelation(density):
    if not isinstance(density, DensityField):
        raise ContractError("autocorrelation expects a DensityField")
    return RealField(density.grid, density_to_autocorrelation(density.values, density.grid))


def circular_autocorrelation(values, dx):
    """Direct real-space ``sum_j A(x_j) A(x_j + x_m) dx`` for every lag ``m``.

    Works on the last axis, so a batch of fields gives a batch of correlations.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[-1]
    out = np.empty(values.shape, dtype=np.float64)
    for m in range(n):
        out[..., m] = np.sum(values * np.roll(values, -m, axis=-1), axis=-1)
    # lags m and -m sum the same products in a different order; averaging
    # makes the result exactly even instead of even to rounding
    return 0.5 * (out + reflect(out)) * dx


# -- serialization -----------------------------------------------------------


def _rows(obj):
    grid = obj.grid
    if isinstance(obj, RealField):
        order = np.arange(grid.n_modes)
        return [(int(j), float(grid.positions[j]), float(obj.values[j])) for j in order]
    order = np.argsort(grid.signed_indices, kind="stable")
    k = grid.signed_indices
    p = grid.momenta
    if isinstance(obj, SpectralField):
        a = obj.amplitudes
        return [(int(k[s]), float(p[s]), float(a[s].real), float(a[s].imag)) for s in order]
    if isinstance(obj, DensityField):
        return [(int(k[s]), float(p[s]), float(obj.values[s])) for s in order]
    raise ContractError(f"cannot serialize {type(obj).__name__}")


_HEADERS = {
    RealField: ("index", "coordinate", "value"),
    SpectralField: ("index", "coordinate", "re", "im"),
    DensityField: ("index", "coordinate", "value"),
}
_KINDS = {RealField: "real", SpectralField: "spectral", DensityField: "density"}


def write_csv(obj, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_HEADERS[type(obj)])
        for row in _rows(obj):
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def read_csv(path, grid, kind):
    """Read a field written by :func:`write_csv`; ``kind`` is real/spectral/density."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return _from_rows(rows, grid, kind)


def _from_rows(rows, grid, kind):
    n = grid.n_modes
    if len(rows) != n:
        raise ContractError(f"expected {n} rows, got {len(rows)}")
    if kind == "real":
        v = np.zeros(n)
        for r in rows:
            v[int(r["index"])] = float(r["value"])
        return RealField(grid, v)
    if kind == "spectral":
        a = np.zeros(n, dtype=np.complex128)
        for r in rows:
            a[grid.slot(int(r["index"]))] = complex(float(r["re"]), float(r["im"]))
        return SpectralField(grid, a)
    if kind == "density":
        d = np.zeros(n)
        for r in rows:
            d[grid.slot(int(r["index"]))] = float(r["value"])
        return DensityField(grid, d)
    raise ContractError(f"unknown field kind {kind!r}")


def to_json(obj):
    header = _HEADERS[type(obj)]
    return {
        "grid": obj.grid.to_dict(),
        "kind": _KINDS[type(obj)],
        "columns": list(header),
        "data": [list(r) for r in _rows(obj)],
    }


def from_json(doc):
    if isinstance(doc, str):
        doc = json.loads(doc)
    grid = GridSpec.from_dict(doc["grid"])
    kind = doc["kind"]
    columns = doc.get("columns") or list(
        {"real": _HEADERS[RealField], "spectral": _HEADERS[SpectralField]}.get(
            kind, _HEADERS[DensityField]
        )
    )
    rows = [dict(zip(columns, r)) for r in doc["data"]]
    return _from_rows(rows, grid, kind)
