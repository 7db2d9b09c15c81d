"""Exact Monte Carlo sampling of lattice field configurations.

``|Psi|^2`` factorizes over mirror pairs ``(k, -k)``: a vacuum pair has
complex amplitude ``z`` with density ``exp(-2 omega dp |z|^2)`` and a pair
carrying ``n`` photons picks up ``|z|^(2n)``, so ``|z|^2`` is
Gamma(n + 1, rate 2 omega dp) with a uniform phase.  No Markov chain is
involved; each batch draws from its own substream of ``(seed, batch)``.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .lattice import (
    DensityField,
    GridSpec,
    RealField,
    SpectralField,
    circular_autocorrelation,
    density_to_autocorrelation,
    spectra_to_fields,
)
from .optimizer import PhotonContent
from .validation import ContractError, UnsupportedContentError, check_positive_int

DEFAULT_BATCHES = 16


@dataclass(frozen=True)
class EnsembleSpec:
    content: PhotonContent
    sample_count: int
    seed: int = 0
    batch_size: int = 8192
    threads: int = 1

    def __post_init__(self):
        check_positive_int(self.sample_count, "sample_count")
        check_positive_int(self.batch_size, "batch_size")
        check_positive_int(self.threads, "threads")
        if not 0 <= int(self.seed) < 2**64:
            raise ContractError("seed must fit in 64 unsigned bits")

    @property
    def grid(self) -> GridSpec:
        return self.content.grid

    @property
    def n_generation_batches(self):
        return -(-self.sample_count // self.batch_size)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """A contiguous run of samples; ``start`` is the index of the first one."""

    grid: GridSpec
    start: int
    amplitudes: np.ndarray = field(repr=False)

    def __len__(self):
        return self.amplitudes.shape[0]

    def __iter__(self):
        for row in self.amplitudes:
            yield SpectralField(self.grid, row)

    def real_fields(self):
        return spectra_to_fields(self.amplitudes, self.grid)


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    mean_density: DensityField
    density_stderr: np.ndarray = field(repr=False)
    mean_autocorr: RealField = field(repr=False)
    autocorr_stderr: np.ndarray = field(repr=False)
    n_samples: int = 0
    n_batches: int = DEFAULT_BATCHES
    mean_energy: float = 0.0

    def to_json(self):
        grid = self.mean_density.grid
        order = np.argsort(grid.signed_indices, kind="stable")
        return {
            "units": "natural units, hbar = c = 1",
            "grid": grid.to_dict(),
            "n_samples": self.n_samples,
            "n_batches": self.n_batches,
            "mean_energy": self.mean_energy,
            "mean_density": {
                "index": grid.signed_indices[order].tolist(),
                "momentum": grid.momenta[order].tolist(),
                "value": self.mean_density.values[order].tolist(),
                "stderr": self.density_stderr[order].tolist(),
            },
            "mean_autocorr": {
                "index": list(range(grid.n_modes)),
                "coordinate": grid.positions.tolist(),
                "value": self.mean_autocorr.values.tolist(),
                "stderr": self.autocorr_stderr.tolist(),
            },
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2)


# -- generation ---------------------------------------------------------------


def _batch_rng(seed, b):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(b),)))


def _draw_batch(spec, b):
    grid = spec.grid
    n = grid.n_modes
    half = grid.nyquist
    start = b * spec.batch_size
    m = min(spec.batch_size, spec.sample_count - start)
    rng = _batch_rng(spec.seed, b)
    omega = grid.dispersion
    dp = grid.dp

    amp = np.zeros((m, n), dtype=np.complex128)
    ks = np.arange(1, half)
    sigma = np.sqrt(1.0 / (4.0 * omega[ks] * dp))
    g = rng.standard_normal((m, half - 1, 2))
    z = (g[..., 0] + 1j * g[..., 1]) * sigma

    for k, count in _photon_half_weights(spec.content).items():
        beta = 2.0 * omega[k] * dp
        u = rng.gamma(count + 1.0, 1.0 / beta, size=m)
        phase = rng.uniform(0.0, 2.0 * math.pi, size=m)
        z[:, k - 1] = np.sqrt(u) * np.exp(1j * phase)

    amp[:, 1:half] = z
    amp[:, n - 1 : half : -1] = np.conj(z)
    amp[:, half] = rng.standard_normal(m) * math.sqrt(1.0 / (2.0 * omega[half] * dp))
    if grid.include_zero_mode:
        if omega[0] <= 0:
            raise ContractError("sampling the zero mode requires mass > 0")
        amp[:, 0] = rng.standard_normal(m) * math.sqrt(1.0 / (2.0 * omega[0] * dp))
    return SampleBatch(grid, start, amp)


def _photon_half_weights(content):
    if content.is_counter_propagating:
        raise UnsupportedContentError(
            "counter-propagating photons have no normalizable lattice density; "
            "use counter_propagating_extremum instead"
        )
    return content.half_weights()


def _stream(spec):
    nb = spec.n_generation_batches
    if spec.threads <= 1:
        for b in range(nb):
            yield _draw_batch(spec, b)
        return
    window = 2 * spec.threads
    with ThreadPoolExecutor(max_workers=spec.threads) as pool:
        pending = []
        nxt = 0
        while nxt < nb or pending:
            while nxt < nb and len(pending) < window:
                pending.append(pool.submit(_draw_batch, spec, nxt))
                nxt += 1
            yield pending.pop(0).result()


def sample_vacuum(spec):
    """Stream of :class:`SampleBatch` drawn from the vacuum density."""
    if not spec.content.is_vacuum:
        raise ContractError("sample_vacuum needs vacuum content; use sample_photons")
    return _stream(spec)


def sample_photons(spec):
    """Stream of :class:`SampleBatch` drawn from the photon-content density."""
    _photon_half_weights(spec.content)
    return _stream(spec)


def sample(spec):
    return sample_vacuum(spec) if spec.content.is_vacuum else sample_photons(spec)


def accept_reject_radial(n, beta, size, rng):
    """Draw ``u`` with density proportional to ``u^n exp(-beta u)`` by rejection.

    Proposal is exponential with mean ``(n + 1) / beta``; kept as an oracle for
    the direct Gamma draw.
    """
    rate = beta / (n + 1.0)
    mode = (n + 1.0) / beta
    log_m = n * math.log(mode) - beta * n * mode / (n + 1.0) if n else 0.0
    out = np.empty(0)
    while out.size < size:
        u = rng.exponential(1.0 / rate, size=2 * (size - out.size) + 16)
        with np.errstate(divide="ignore"):
            log_ratio = n * np.log(u) - beta * n * u / (n + 1.0) - log_m if n else np.zeros_like(u)
        keep = np.log(rng.uniform(size=u.size)) < log_ratio
        out = np.concatenate([out, u[keep]])
    return out[:size]


def collect_mode_power(stream, k):
    """``|At(p_k)|^2`` for every sample in ``stream``."""
    parts = []
    for batch in stream:
        parts.append(np.abs(batch.amplitudes[:, batch.grid.slot(k)]) ** 2)
    return np.concatenate(parts) if parts else np.empty(0)


def dump_samples(stream, path):
    """Pass ``stream`` through while writing ``sample_id, k, re, im`` rows to CSV."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample_id", "k", "re", "im"])
        for batch in stream:
            ks = batch.grid.signed_indices
            for i, row in enumerate(batch.amplitudes):
                sid = batch.start + i
                for s in np.argsort(ks, kind="stable"):
                    w.writerow([sid, int(ks[s]), repr(float(row[s].real)), repr(float(row[s].imag))])
            yield batch


# -- estimators ---------------------------------------------------------------


class _GroupAccumulator:
    """Per-group sums for batch-means standard errors over a known sample count."""

    def __init__(self, total, n_groups, width):
        if total < 2:
            raise ContractError("need at least two samples")
        self.total = total
        self.n_groups = max(2, min(n_groups, total))
        self.sums = np.zeros((self.n_groups, width))
        self.counts = np.zeros(self.n_groups, dtype=np.int64)
        self.seen = 0

    def add(self, start, values):
        idx = start + np.arange(values.shape[0])
        if idx.size and idx[-1] >= self.total:
            raise ContractError("stream is longer than the declared sample count")
        groups = idx * self.n_groups // self.total
        for gid in np.unique(groups):
            sel = groups == gid
            self.sums[gid] += values[sel].sum(axis=0)
            self.counts[gid] += int(sel.sum())
        self.seen += values.shape[0]

    def finish(self):
        if self.seen != self.total:
            raise ContractError(f"stream had {self.seen} samples, expected {self.total}")
        mean = self.sums.sum(axis=0) / self.total
        group_means = self.sums / self.counts[:, None]
        stderr = group_means.std(axis=0, ddof=1) / math.sqrt(self.n_groups)
        return mean, stderr


def _estimate(stream, spec, n_batches, direct):
    grid = spec.grid
    n = grid.n_modes
    acc_d = _GroupAccumulator(spec.sample_count, n_batches, n)
    acc_r = _GroupAccumulator(spec.sample_count, n_batches, n)
    energy = 0.0
    for batch in stream:
        d = np.abs(batch.amplitudes) ** 2
        acc_d.add(batch.start, d)
        if direct:
            a = spectra_to_fields(batch.amplitudes, grid)
            r = circular_autocorrelation(a, grid.dx)
        else:
            r = density_to_autocorrelation(d, grid)
        acc_r.add(batch.start, r)
        energy += float(d.sum() * grid.dp)
    mean_d, se_d = acc_d.finish()
    mean_r, se_r = acc_r.finish()
    return EnsembleStats(
        mean_density=DensityField(grid, mean_d),
        density_stderr=se_d,
        mean_autocorr=RealField(grid, mean_r),
        autocorr_stderr=se_r,
        n_samples=spec.sample_count,
        n_batches=acc_d.n_groups,
        mean_energy=energy / spec.sample_count,
    )


def estimate_density(stream, spec, n_batches=DEFAULT_BATCHES):
    """Ensemble mean of ``D = |At|^2`` with batch-means standard errors.

    The autocorrelation fields are filled through the lattice Wiener-Khinchin
    map of each sample's density.
    """
    return _estimate(stream, spec, n_batches, direct=False)


def estimate_autocorrelation(stream, spec, n_batches=DEFAULT_BATCHES):
    """Ensemble mean of ``sum_y A(y) A(y + x) dx`` computed in real space."""
    return _estimate(stream, spec, n_batches, direct=True)


def default_threads():
    return os.cpu_count() or 1
