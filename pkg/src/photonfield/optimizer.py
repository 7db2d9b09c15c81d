"""Most likely energy spectral density for photon content on the lattice.

On the lattice the probability of a density ``D`` for content
``{(k_i, n_i)}`` is, up to a constant,

    log P(D) = sum_i n_i log Dbar(p_i) - sum_k omega_k D(p_k) dp

with ``Dbar(p) = (D(p) + D(-p)) / 2``.  Evenness is imposed by optimizing
one coordinate per mirror pair, so a pair costs ``2 omega dp`` per unit of
``D`` and the maximizer is the spike ``D(+-k_i) = n_i / (2 omega_i dp)``.
The projected-gradient ascent in :func:`ascent_maximize` finds the same
point without being told the answer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import DensityField, GridSpec, autocorrelation
from .validation import ContractError, UnsupportedContentError, check_positive_int


@dataclass(frozen=True)
class PhotonContent:
    """Photon occupation on a grid: ``entries`` is a tuple of ``(k, count)``.

    Supported shapes are the vacuum (no entries), one mode with any count, and
    two modes with one photon each.  Two entries on the same mode are merged
    into a single mode with count 2.
    """

    grid: GridSpec
    entries: tuple = ()

    def __post_init__(self):
        merged = {}
        for k, n in self.entries:
            k = int(k)
            n = int(n)
            if k == 0:
                raise ContractError("photon modes must be nonzero")
            if abs(k) >= self.grid.nyquist:
                raise ContractError(
                    f"photon mode {k} must satisfy 0 < |k| < {self.grid.nyquist}"
                )
            if n < 0:
                raise ContractError(f"photon count must be nonnegative, got {n}")
            if n:
                merged[k] = merged.get(k, 0) + n
        entries = tuple(sorted(merged.items(), key=lambda kv: (abs(kv[0]), kv[0])))
        if len(entries) > 2 or (len(entries) == 2 and any(n != 1 for _, n in entries)):
            raise UnsupportedContentError(
                "supported content: one mode with any count, or two modes with one photon each"
            )
        object.__setattr__(self, "entries", entries)

    @classmethod
    def vacuum(cls, grid):
        return cls(grid, ())

    @classmethod
    def single(cls, grid, k, n=1):
        return cls(grid, ((k, n),) if n else ())

    @classmethod
    def pair(cls, grid, k1, k2):
        return cls(grid, ((k1, 1), (k2, 1)))

    @property
    def total(self):
        return sum(n for _, n in self.entries)

    @property
    def is_vacuum(self):
        return not self.entries

    @property
    def is_counter_propagating(self):
        return len(self.entries) == 2 and self.entries[0][0] == -self.entries[1][0]

    def half_weights(self):
        """Photon count per positive mode index ``|k|`` (distinct modes or a single mode)."""
        if self.is_counter_propagating:
            raise UnsupportedContentError("counter-propagating pair has no photon weights")
        out = {}
        for k, n in self.entries:
            out[abs(k)] = out.get(abs(k), 0) + n
        return out

    def to_dict(self):
        return {"entries": [[k, n] for k, n in self.entries], "grid": self.grid.to_dict()}


@dataclass(frozen=True, eq=False)
class MaximizerReport:
    content: PhotonContent
    density: DensityField
    log_prob: float
    method: str
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True
    certificate: np.ndarray | None = field(default=None, repr=False)

    @property
    def certificate_passed(self):
        return self.certificate is not None and bool(np.all(self.certificate <= 0))

    def to_json(self, density_csv_ref=None):
        doc = {
            "content": self.content.to_dict(),
            "method": self.method,
            "density_csv_ref": density_csv_ref,
            "log_prob": _json_float(self.log_prob),
            "iterations": int(self.iterations),
            "residual": float(self.residual),
            "converged": bool(self.converged),
        }
        if self.certificate is not None:
            doc["certificate_passed"] = self.certificate_passed
            doc["certificate_max"] = float(np.max(self.certificate))
        return doc

    def dumps(self, **kw):
        return json.dumps(self.to_json(**kw), indent=2)


def _json_float(x):
    return x if math.isfinite(x) else ("-inf" if x < 0 else "inf")


# -- half-space bookkeeping ---------------------------------------------------


@dataclass(frozen=True)
class _HalfSpace:
    ks: np.ndarray  # representative signed indices
    mult: np.ndarray  # 2 for mirror pairs, 1 for self-mirrored slots
    cost: np.ndarray  # mult * omega * dp
    grid: GridSpec

    @classmethod
    def of(cls, grid):
        ks = list(range(1, grid.nyquist + 1))
        mult = [2] * (grid.nyquist - 1) + [1]
        if grid.include_zero_mode:
            ks.insert(0, 0)
            mult.insert(0, 1)
        ks = np.array(ks)
        mult = np.array(mult, dtype=float)
        omega = grid.dispersion[ks % grid.n_modes]
        if np.any(omega <= 0):
            raise ContractError("zero mode needs mass > 0 to have finite weight")
        return cls(ks, mult, mult * omega * grid.dp, grid)

    def gather(self, density):
        return np.array([density.pair_mean(k) if k else density.at(0) for k in self.ks])

    def scatter(self, x):
        d = np.zeros(self.grid.n_modes)
        slots = self.ks % self.grid.n_modes
        d[slots] = x
        d[(-self.ks) % self.grid.n_modes] = x
        return DensityField(self.grid, d)

    def weights(self, content):
        w = np.zeros(len(self.ks))
        if content.is_counter_propagating:
            return w
        pos = {int(k): i for i, k in enumerate(self.ks)}
        for k, n in content.half_weights().items():
            w[pos[k]] = n
        return w


def _gain(x, x_new, w, cost):
    """``f(x_new) - f(x)`` without cancellation between large terms."""
    active = w > 0
    if np.any(x_new[active] <= 0):
        return -math.inf
    dx = x_new - x
    return float(np.sum(w[active] * np.log1p(dx[active] / x[active])) - np.sum(cost * dx))


def _gradient(x, w, cost):
    g = -cost.copy()
    active = w > 0
    g[active] += w[active] / x[active]
    return g


def _projected_residual(x, g):
    pg = np.where(x > 0, g, np.maximum(g, 0.0))
    return float(np.max(np.abs(pg))) if pg.size else 0.0


# -- public operations --------------------------------------------------------


def log_probability(density, content):
    """Unnormalized log probability of ``density`` for ``content``.

    For a counter-propagating pair only the density-dependent factor of the
    dominant contact term survives, ``-sum omega D dp``.
    """
    grid = density.grid
    if grid != content.grid:
        raise ContractError("density and content live on different grids")
    exponent = float(np.sum(grid.dispersion * density.values) * grid.dp)
    if content.is_counter_propagating:
        return -exponent
    total = 0.0
    for k, n in content.entries:
        dbar = density.pair_mean(k)
        if dbar <= 0:
            return -math.inf
        total += n * math.log(dbar)
    return total - exponent


def counter_propagating_extremum(grid, kbar):
    """Extremum for photons at ``+kbar`` and ``-kbar``: ``D = 0`` everywhere.

    The certificate is the directional derivative of the dominant log density
    at ``D = 0`` along each feasible pair direction, ``-mult * omega * dp``.
    """
    kbar = int(kbar)
    content = PhotonContent.pair(grid, kbar, -kbar)
    half = _HalfSpace.of(grid)
    cert = -half.cost
    density = DensityField.zeros(grid)
    return MaximizerReport(
        content=content,
        density=density,
        log_prob=log_probability(density, content),
        method="closed_form",
        certificate=cert,
    )


def most_likely_density(content):
    """Closed-form lattice maximizer; counter-propagating pairs are routed to
    :func:`counter_propagating_extremum`."""
    grid = content.grid
    if content.is_counter_propagating:
        return counter_propagating_extremum(grid, content.entries[0][0])
    half = _HalfSpace.of(grid)
    w = half.weights(content)
    # n * (1 / cost) keeps the n-photon spike exactly n times the one-photon spike
    x = w * (1.0 / half.cost)
    density = half.scatter(x)
    residual = _projected_residual(x, _gradient(x, w, half.cost)) if content.entries else 0.0
    return MaximizerReport(
        content=content,
        density=density,
        log_prob=log_probability(density, content),
        method="closed_form",
        residual=residual,
    )


def ascent_maximize(content, init=None, step=1.0, tol=1e-10, max_iter=100_000,
                    armijo=1e-4):
    """Projected gradient ascent with backtracking over even, nonnegative ``D``.

    Starts from ``init`` (flat ``D = 1`` on retained modes by default).  The
    step doubles after every accepted move and halves on rejection.  Stops when
    the projected gradient drops below ``tol``; hitting ``max_iter`` returns a
    report with ``converged=False``.
    """
    grid = content.grid
    half = _HalfSpace.of(grid)
    w = half.weights(content)
    if init is None:
        init = DensityField(grid, grid.retained.astype(float))
    if init.grid != grid:
        raise ContractError("init density lives on a different grid")
    x = half.gather(init)
    if np.any(x[w > 0] <= 0):
        raise ContractError("init density must be positive at every photon mode")
    check_positive_int(max_iter, "max_iter")

    t = float(step)
    g = _gradient(x, w, half.cost)
    residual = _projected_residual(x, g)
    it = 0
    while residual >= tol and it < max_iter:
        it += 1
        while True:
            x_new = np.maximum(x + t * g, 0.0)
            gain = _gain(x, x_new, w, half.cost)
            if gain >= armijo * float(np.dot(g, x_new - x)) and np.any(x_new != x):
                break
            t *= 0.5
            if t < 1e-300:
                break
        if t < 1e-300:
            break
        x = x_new
        t *= 2.0
        g = _gradient(x, w, half.cost)
        residual = _projected_residual(x, g)

    density = half.scatter(x)
    return MaximizerReport(
        content=content,
        density=density,
        log_prob=log_probability(density, content),
        method="ascent",
        iterations=it,
        residual=residual,
        converged=residual < tol,
    )


def most_likely_autocorrelation(content):
    return autocorrelation(most_likely_density(content).density)


def stationarity_residual(report):
    """Largest ``|n / Dbar(p_i) - 2 omega_i dp|`` over the photon modes."""
    content = report.content
    if content.is_counter_propagating or content.is_vacuum:
        return 0.0
    grid = content.grid
    worst = 0.0
    for k, n in content.half_weights().items():
        dbar = report.density.pair_mean(k)
        omega = grid.dispersion[grid.slot(k)]
        worst = max(worst, abs(n / dbar - 2.0 * omega * grid.dp))
    return worst
