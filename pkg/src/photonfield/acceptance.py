"""Named acceptance checks, shared by ``photonfield verify`` and the test suite.

Each check takes a :class:`VerifyContext` and returns ``(passed, detail)``.
Photon momenta are given as nominal values (``pbar = 1``, ``p2 = 2``) and
snapped to the nearest lattice mode; on a grid where they are not exactly
representable the momentum-dependent checks fail by name.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .hermite import hermite_as_photon_terms, hermite_coefficients
from .lattice import (
    GridSpec,
    RealField,
    circular_autocorrelation,
    fields_to_spectra,
    forward_transform,
    parseval_energy,
    spectral_density,
    spectral_energy,
    autocorrelation,
)
from .optimizer import (
    PhotonContent,
    ascent_maximize,
    counter_propagating_extremum,
    most_likely_autocorrelation,
    most_likely_density,
)
from .sampler import EnsembleSpec, collect_mode_power, estimate_density, sample
from .wavefunctional import PhotonPolynomial, mode_eigenvalue_check, nphoton_polynomial

# Q_0 .. Q_4 as printed: (outer coefficient, outer |p| power, inner terms),
# inner terms keyed (pow_a, pow_d, pow_pbar).
PRINTED_FORMS = {
    0: (1, 0, {(0, 0, 0): 1}),
    1: (2, 1, {(1, 0, 0): 1}),
    2: (2, 1, {(2, 0, 1): 2, (0, 1, 0): -1}),
    3: (4, 2, {(3, 0, 1): 2, (1, 1, 0): -3}),
    4: (4, 2, {(4, 0, 2): 4, (2, 1, 1): -12, (0, 2, 0): 3}),
}


def printed_polynomial(n):
    c, m, inner = PRINTED_FORMS[n]
    return PhotonPolynomial(n, {(pa, pd, pp + m): c * k for (pa, pd, pp), k in inner.items()})


@dataclass
class VerifyContext:
    n_modes: int = 128
    box_length: float = 20 * math.pi
    mass: float = 0.0
    pbar: float = 1.0
    p2: float = 2.0
    seed: int = 20240601
    samples: int = 100_000
    ks_samples: int = 10_000
    random_fields: int = 1000
    threads: int = 1

    @property
    def grid(self):
        return GridSpec(self.n_modes, self.box_length, mass=self.mass)

    def mode(self, p):
        return int(round(p / self.grid.dp))

    def omega(self, p):
        return math.sqrt(p * p + self.mass**2)


@dataclass
class CriterionResult:
    id: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.id} ({self.seconds:.2f}s): {self.detail}"

    def to_json(self):
        return {"id": self.id, "passed": self.passed, "detail": self.detail,
                "seconds": round(self.seconds, 3)}


@dataclass
class Criterion:
    id: str
    summary: str
    check: object = field(repr=False)

    def run(self, ctx):
        t0 = time.perf_counter()
        try:
            passed, detail = self.check(ctx)
        except Exception as exc:  # a crash is a named failure, not an abort
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        return CriterionResult(self.id, bool(passed), detail, time.perf_counter() - t0)


def _polynomial_regression(ctx):
    bad = [n for n in PRINTED_FORMS if nphoton_polynomial(n) != printed_polynomial(n)]
    return not bad, "Q_0..Q_4 match term for term" if not bad else f"mismatch at n = {bad}"


def _hermite_identity(ctx, n_max=20):
    bad = [n for n in range(n_max + 1)
           if dict(nphoton_polynomial(n).terms) != hermite_as_photon_terms(n, hermite_coefficients(n))]
    return not bad, f"n = 0..{n_max} exact" if not bad else f"mismatch at n = {bad}"


def _single_photon_maximizer(ctx):
    grid = ctx.grid
    k = ctx.mode(ctx.pbar)
    rep = ascent_maximize(PhotonContent.single(grid, k, 1))
    expected = 1.0 / (2.0 * ctx.omega(ctx.pbar) * grid.dp)
    peak = rep.density.at(k)
    d = rep.density.values.copy()
    d[[grid.slot(k), grid.slot(-k)]] = 0.0
    off = float(d.sum())
    rel = abs(peak - expected) / expected
    ok = rep.converged and rel < 1e-6 and off < 1e-6 * peak
    return ok, f"peak {peak:.12g} vs {expected:.12g} (rel {rel:.1e}), off-peak mass {off:.1e}, {rep.iterations} it"


def _n_scaling(ctx):
    grid = ctx.grid
    k = ctx.mode(ctx.pbar)
    closed1 = most_likely_density(PhotonContent.single(grid, k, 1)).density.at(k)
    asc1 = ascent_maximize(PhotonContent.single(grid, k, 1)).density.at(k)
    parts, ok = [], True
    for n in (2, 3, 4):
        closed = most_likely_density(PhotonContent.single(grid, k, n)).density.at(k)
        rep = ascent_maximize(PhotonContent.single(grid, k, n))
        ratio = rep.density.at(k) / asc1
        exact = closed == n * closed1
        ok &= exact and abs(ratio - n) < 1e-4 and rep.converged
        parts.append(f"n={n}: closed {closed / closed1:.15g} ascent {ratio:.9f}")
    return ok, "; ".join(parts)


def _autocorrelation_form(ctx):
    grid = ctx.grid
    x = grid.positions
    k1, k2 = ctx.mode(ctx.pbar), ctx.mode(ctx.p2)
    w1, w2 = ctx.omega(ctx.pbar), ctx.omega(ctx.p2)
    r1 = most_likely_autocorrelation(PhotonContent.single(grid, k1, 1)).values
    e1 = float(np.max(np.abs(r1 - np.cos(ctx.pbar * x) / w1)))
    r2 = most_likely_autocorrelation(PhotonContent.pair(grid, k1, k2)).values
    target = np.cos(ctx.pbar * x) / w1 + np.cos(ctx.p2 * x) / w2
    e2 = float(np.max(np.abs(r2 - target)))
    return e1 < 1e-9 and e2 < 1e-9, f"single max err {e1:.1e}, two-momentum max err {e2:.1e}"


def _counter_propagating(ctx):
    grid = ctx.grid
    k = ctx.mode(ctx.pbar)
    rep = counter_propagating_extremum(grid, k)
    zero = bool(np.all(rep.density.values == 0))
    asc = ascent_maximize(PhotonContent.pair(grid, k, -k))
    collapsed = bool(np.all(asc.density.values == 0))
    ok = zero and rep.certificate_passed and collapsed
    return ok, (f"D == 0: {zero}, directional derivatives <= 0 at all {rep.certificate.size} "
                f"coordinates: {rep.certificate_passed} (max {rep.certificate.max():.3e}), "
                f"ascent collapse: {collapsed}")


def _vacuum_level(grid):
    lvl = np.zeros(grid.n_modes)
    r = grid.retained
    lvl[r] = 1.0 / (2.0 * grid.dispersion[r] * grid.dp)
    return lvl


def _sampling_moments(ctx):
    grid = ctx.grid
    k = ctx.mode(ctx.pbar)
    vac = _vacuum_level(grid)
    spec = EnsembleSpec(PhotonContent.vacuum(grid), ctx.samples, seed=ctx.seed, threads=ctx.threads)
    st = estimate_density(sample(spec), spec)
    r = grid.retained
    frac = float(np.mean(np.abs(st.mean_density.values[r] - vac[r]) < 3 * st.density_stderr[r]))
    ok = frac >= 0.95
    parts = [f"vacuum within 3 se at {100 * frac:.1f}% of modes"]
    for n in (1, 4):
        spec = EnsembleSpec(PhotonContent.single(grid, k, n), ctx.samples, seed=ctx.seed + n,
                            threads=ctx.threads)
        st = estimate_density(sample(spec), spec)
        s = grid.slot(k)
        excess = st.mean_density.values[s] - vac[s]
        target = n / (2.0 * ctx.omega(ctx.pbar) * grid.dp)
        z = (excess - target) / st.density_stderr[s]
        ok &= abs(z) < 3
        parts.append(f"n={n} excess {excess:.4f} vs {target:.4f} ({z:+.2f} se)")
    return ok, "; ".join(parts)


def _radial_distribution(ctx):
    grid = ctx.grid
    k = ctx.mode(ctx.pbar)
    beta = 2.0 * grid.dispersion[grid.slot(k)] * grid.dp
    crit = float(stats.kstwo.ppf(0.99, ctx.ks_samples))
    ok, parts = True, []
    for n in (0, 1, 3):
        spec = EnsembleSpec(PhotonContent.single(grid, k, n), ctx.ks_samples, seed=ctx.seed + 100 + n)
        u = collect_mode_power(sample(spec), k)
        d = stats.kstest(u, stats.gamma(a=n + 1, scale=1.0 / beta).cdf).statistic
        ok &= d < crit
        parts.append(f"n={n} KS {d:.4f}")
    return ok, "; ".join(parts) + f" (1% critical {crit:.4f})"


def _mode_eigenvalue_order(ctx, h=1e-2):
    ok, parts = True, []
    for n in (0, 1, 2):
        coarse = mode_eigenvalue_check(n, 1.0, h=2 * h)
        fine = mode_eigenvalue_check(n, 1.0, h=h)
        order = math.log2(coarse / fine)
        ok &= order >= 1.9
        parts.append(f"n={n} order {order:.3f}")
    return ok, "; ".join(parts)


def _lattice_identities(ctx):
    grid = ctx.grid
    rng = np.random.default_rng(ctx.seed)
    worst_p = worst_w = 0.0
    for _ in range(ctx.random_fields):
        v = rng.standard_normal(grid.n_modes)
        f = RealField(grid, v - v.mean())
        spec = forward_transform(f)
        e = parseval_energy(f)
        worst_p = max(worst_p, abs(e - spectral_energy(spec)) / e)
        r = autocorrelation(spectral_density(spec)).values
        direct = circular_autocorrelation(f.values, grid.dx)
        worst_w = max(worst_w, float(np.max(np.abs(r - direct))) / e)
    ok = worst_p < 1e-12 and worst_w < 1e-10
    return ok, f"Parseval worst rel {worst_p:.1e}; Wiener-Khinchin worst rel {worst_w:.1e} over {ctx.random_fields} fields"


CRITERIA = [
    Criterion("polynomial_regression", "Q_0..Q_4 equal the printed 0-4 photon prefactors", _polynomial_regression),
    Criterion("hermite_identity", "Q_n equals the mapped Hermite polynomial for n <= 20", _hermite_identity),
    Criterion("single_photon_maximizer", "ascent reaches the single-pair spike 1/(2|p|dp)", _single_photon_maximizer),
    Criterion("n_scaling", "n-photon peak is n times the single-photon peak", _n_scaling),
    Criterion("autocorrelation_form", "most likely autocorrelation is cos(px)/|p| per photon", _autocorrelation_form),
    Criterion("counter_propagating", "counter-propagating pair gives D = 0 with sign certificate", _counter_propagating),
    Criterion("sampling_moments", "sampled mean densities match vacuum and photon levels", _sampling_moments),
    Criterion("radial_distribution", "|At(k)|^2 follows Gamma(n + 1, 2 omega dp)", _radial_distribution),
    Criterion("mode_eigenvalue_order", "pair-mode eigenvalue residual is second order in h", _mode_eigenvalue_order),
    Criterion("lattice_identities", "Parseval and Wiener-Khinchin hold on random fields", _lattice_identities),
]

BY_ID = {c.id: c for c in CRITERIA}


def run_all(ctx=None, only=None):
    ctx = ctx or VerifyContext()
    chosen = [BY_ID[i] for i in only] if only else CRITERIA
    return [c.run(ctx) for c in chosen]
