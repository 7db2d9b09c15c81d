"""Exact photon wavefunctional prefactors and their numeric evaluation.

An n-photon state at momentum ``pbar`` is ``Q_n * Psi_0`` where ``Psi_0`` is
the vacuum Gaussian and ``Q_n`` is a polynomial in two formal symbols,

* ``a = At(-pbar)``, the Fourier amplitude of the field, and
* ``d = delta(2 pbar)``, the contact term produced when the functional
  derivative hits an amplitude at the mirrored momentum,

with integer coefficients times powers of ``|pbar|``.  Acting with the
creation operator ``|pbar| At(-pbar) - delta/delta At(pbar)`` on
``Q Psi_0`` gives ``(2 |pbar| a Q - d dQ/da) Psi_0``, which is the whole
recursion.  ``d`` never gets a numeric value: for ``pbar != 0`` the contact
terms are dropped before anything is evaluated.
"""

from __future__ import annotations

import math
import numbers
from functools import reduce
from types import MappingProxyType

import numpy as np

from .lattice import GridSpec, SpectralField
from .validation import ContractError, check_nonneg_int


def _clean(terms):
    return {k: int(c) for k, c in terms.items() if c != 0}


def _term_order(key):
    pow_a, pow_d, pow_pbar = key
    return (-pow_a, pow_d, -pow_pbar)


class PhotonPolynomial:
    """Immutable ``sum coeff * |pbar|^pow_pbar * a^pow_a * d^pow_d``.

    ``terms`` maps ``(pow_a, pow_d, pow_pbar)`` to an exact integer.
    """

    __slots__ = ("_n", "_terms")

    def __init__(self, photon_count, terms):
        n = check_nonneg_int(photon_count, "photon_count")
        if any(isinstance(c, bool) or not isinstance(c, numbers.Integral) for c in terms.values()):
            raise ContractError("coefficients must be exact integers")
        clean = _clean(terms)
        for (pow_a, pow_d, pow_pbar), c in clean.items():
            if min(pow_a, pow_d, pow_pbar) < 0:
                raise ContractError(f"negative exponent in term {(pow_a, pow_d, pow_pbar)}")
            if pow_a + 2 * pow_d != n or pow_pbar + pow_d != n:
                raise ContractError(
                    f"term a^{pow_a} d^{pow_d} |p|^{pow_pbar} is not homogeneous of degree {n}"
                )
        self._n = n
        self._terms = MappingProxyType(dict(sorted(clean.items(), key=lambda kv: _term_order(kv[0]))))

    @property
    def photon_count(self):
        return self._n

    @property
    def terms(self):
        return self._terms

    @property
    def has_contact_terms(self):
        return any(pow_d > 0 for (_, pow_d, _) in self._terms)

    def __eq__(self, other):
        if not isinstance(other, PhotonPolynomial):
            return NotImplemented
        return self._n == other._n and dict(self._terms) == dict(other._terms)

    def __hash__(self):
        return hash((self._n, tuple(self._terms.items())))

    def __repr__(self):
        return f"PhotonPolynomial(n={self._n}, {self.to_text()!r})"

    def evaluate(self, a, pbar_abs):
        """Numeric value at amplitude ``a``; only defined without contact terms."""
        if self.has_contact_terms:
            raise ContractError(
                "contact terms have no numeric value; call drop_contact_terms first"
            )
        return sum(c * pbar_abs**pp * a**pa for (pa, _, pp), c in self._terms.items())

    def to_text(self):
        return format_polynomial(self)

    def to_json(self):
        return {
            "n": self._n,
            "terms": [
                {"coeff": c, "pow_a": pa, "pow_d": pd, "pow_pbar": pp}
                for (pa, pd, pp), c in self._terms.items()
            ],
        }

    @classmethod
    def from_json(cls, doc):
        terms = {(t["pow_a"], t["pow_d"], t["pow_pbar"]): int(t["coeff"]) for t in doc["terms"]}
        return cls(doc["n"], terms)


def _monomial_text(coeff, pow_pbar, pow_a, pow_d, leading):
    parts = []
    if pow_pbar:
        parts.append("|p|" if pow_pbar == 1 else f"|p|^{pow_pbar}")
    if pow_a:
        parts.append("a" if pow_a == 1 else f"a^{pow_a}")
    if pow_d:
        parts.append("d" if pow_d == 1 else f"d^{pow_d}")
    mag = abs(coeff)
    body = "".join(parts)
    if mag != 1 or not body:
        body = f"{mag}{body}"
    if leading:
        return body if coeff > 0 else f"-{body}"
    return f" + {body}" if coeff > 0 else f" - {body}"


def format_polynomial(poly):
    """Canonical text: common integer and ``|p|`` content pulled out front.

    ``Q_2`` renders as ``2|p|(2|p|a^2 - d)``; terms run by descending power of
    ``a`` and then ascending power of ``d``.
    """
    items = list(poly.terms.items())
    if not items:
        return "0"
    if len(items) == 1:
        (pa, pd, pp), c = items[0]
        return _monomial_text(c, pp, pa, pd, leading=True)
    g = reduce(math.gcd, (abs(c) for _, c in items))
    m = min(pp for (_, _, pp), _ in items)
    inner = "".join(
        _monomial_text(c // g, pp - m, pa, pd, leading=(i == 0))
        for i, ((pa, pd, pp), c) in enumerate(items)
    )
    prefix = _monomial_text(g, m, 0, 0, leading=True)
    if prefix == "1":
        prefix = ""
    return f"{prefix}({inner})"


def vacuum_polynomial():
    return PhotonPolynomial(0, {(0, 0, 0): 1})


def apply_creation(poly):
    """``Q_n = 2 |p| a Q_{n-1} - d dQ_{n-1}/da``, exactly."""
    out = {}
    for (pa, pd, pp), c in poly.terms.items():
        key = (pa + 1, pd, pp + 1)
        out[key] = out.get(key, 0) + 2 * c
        if pa:
            key = (pa - 1, pd + 1, pp)
            out[key] = out.get(key, 0) - pa * c
    return PhotonPolynomial(poly.photon_count + 1, out)


def nphoton_polynomial(n):
    n = check_nonneg_int(n, "n")
    poly = vacuum_polynomial()
    for _ in range(n):
        poly = apply_creation(poly)
    return poly


def drop_contact_terms(poly):
    """Discard every term carrying ``delta(2 pbar)``; legitimate for ``pbar != 0``."""
    kept = {k: c for k, c in poly.terms.items() if k[1] == 0}
    return PhotonPolynomial(poly.photon_count, kept)


# -- two distinct momenta ----------------------------------------------------

MULTI_VARIABLES = ("a1", "a2", "a1c", "a2c", "d12", "p1", "p2")
_IDX = {name: i for i, name in enumerate(MULTI_VARIABLES)}
_CONJ_PERM = (2, 3, 0, 1, 4, 5, 6)


def _exp(**powers):
    e = [0] * len(MULTI_VARIABLES)
    for k, v in powers.items():
        e[_IDX[k]] = v
    return tuple(e)


class MultiModeExpression:
    """Exact polynomial in ``a_i = At(-p_i)``, their conjugates, ``d12`` and ``|p_i|``.

    ``d12`` stands for ``delta(p1 + p2)``.  Terms are keyed by exponent tuples
    ordered as :data:`MULTI_VARIABLES`.
    """

    __slots__ = ("_terms", "p1", "p2")

    def __init__(self, terms, p1, p2):
        self._terms = MappingProxyType(_clean(terms))
        self.p1 = float(p1)
        self.p2 = float(p2)

    @property
    def terms(self):
        return self._terms

    def __eq__(self, other):
        if not isinstance(other, MultiModeExpression):
            return NotImplemented
        return dict(self._terms) == dict(other._terms)

    def __hash__(self):
        return hash(tuple(sorted(self._terms.items())))

    def __repr__(self):
        return f"MultiModeExpression({self.to_text()!r})"

    def __add__(self, other):
        out = dict(self._terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return MultiModeExpression(out, self.p1, self.p2)

    def __mul__(self, other):
        out = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other.terms.items():
                k = tuple(x + y for x, y in zip(k1, k2))
                out[k] = out.get(k, 0) + c1 * c2
        return MultiModeExpression(out, self.p1, self.p2)

    def conjugate(self):
        out = {tuple(k[j] for j in _CONJ_PERM): c for k, c in self._terms.items()}
        return MultiModeExpression(out, self.p1, self.p2)

    @property
    def delta_order(self):
        return max((k[_IDX["d12"]] for k in self._terms), default=0)

    def dominant_terms(self):
        """Terms of highest order in ``d12``; these control any extremum when it is singular."""
        top = self.delta_order
        return MultiModeExpression(
            {k: c for k, c in self._terms.items() if k[_IDX["d12"]] == top}, self.p1, self.p2
        )

    def drop_contact_terms(self):
        return MultiModeExpression(
            {k: c for k, c in self._terms.items() if k[_IDX["d12"]] == 0}, self.p1, self.p2
        )

    def _substitute(self, mapping, p2=None):
        out = {}
        for k, c in self._terms.items():
            e = list(k)
            for src, dst in mapping.items():
                e[_IDX[dst]] += e[_IDX[src]]
                e[_IDX[src]] = 0
            key = tuple(e)
            out[key] = out.get(key, 0) + c
        return MultiModeExpression(out, self.p1, self.p1 if p2 is None else p2)

    def reduce_coincident(self):
        """Set ``p2 = p1``: ``a2 -> a1``, ``|p2| -> |p1|``."""
        return self._substitute({"a2": "a1", "a2c": "a1c", "p2": "p1"})

    def reduce_counter_propagating(self):
        """Set ``p2 = -p1``: ``At(-p2) = At(p1) = a1*``, ``|p2| -> |p1|``."""
        return self._substitute({"a2": "a1c", "a2c": "a1", "p2": "p1"}, p2=-self.p1)

    def as_photon_polynomial(self):
        """Convert a coincident, conjugate-free amplitude to a :class:`PhotonPolynomial`."""
        out = {}
        degree = None
        for k, c in self._terms.items():
            if any(k[_IDX[v]] for v in ("a2", "a1c", "a2c", "p2")):
                raise ContractError("expression still depends on p2 or on conjugates")
            key = (k[_IDX["a1"]], k[_IDX["d12"]], k[_IDX["p1"]])
            deg = key[0] + 2 * key[1]
            if degree is None:
                degree = deg
            elif deg != degree:
                raise ContractError("expression is not homogeneous in photon number")
            out[key] = c
        return PhotonPolynomial(degree or 0, out)

    def evaluate(self, a1, a2, p1_abs=None, p2_abs=None):
        """Numeric value with ``d12`` absent (the expression must be contact-free)."""
        p1_abs = abs(self.p1) if p1_abs is None else p1_abs
        p2_abs = abs(self.p2) if p2_abs is None else p2_abs
        vals = (a1, a2, np.conj(a1), np.conj(a2), None, p1_abs, p2_abs)
        total = 0.0
        for k, c in self._terms.items():
            if k[_IDX["d12"]]:
                raise ContractError("contact terms have no numeric value")
            term = c
            for v, e in zip(vals, k):
                if e:
                    term = term * v**e
            total = total + term
        return total

    def to_text(self):
        """Render with ``Di = ai ai*`` collected, e.g. ``16|p1|^2|p2|^2 D1 D2``."""
        if not self._terms:
            return "0"
        pieces = []
        order = sorted(self._terms.items(), key=lambda kv: (kv[0][_IDX["d12"]], [-x for x in kv[0]]))
        for i, (k, c) in enumerate(order):
            a1, a2, a1c, a2c, d, p1, p2 = k
            factors = []
            for name, e in (("|p1|", p1), ("|p2|", p2)):
                if e:
                    factors.append(name if e == 1 else f"{name}^{e}")
            syms = []
            for pair, (x, xc) in (("1", (a1, a1c)), ("2", (a2, a2c))):
                dpow = min(x, xc)
                if dpow:
                    syms.append(f"D{pair}" if dpow == 1 else f"D{pair}^{dpow}")
                if x - dpow:
                    e = x - dpow
                    syms.append(f"a{pair}" if e == 1 else f"a{pair}^{e}")
                if xc - dpow:
                    e = xc - dpow
                    syms.append(f"a{pair}*" if e == 1 else f"a{pair}*^{e}")
            if d:
                syms.append("d12" if d == 1 else f"d12^{d}")
            body = "".join(factors) + (" " if factors and syms else "") + " ".join(syms)
            mag = abs(c)
            if mag != 1 or not body:
                body = f"{mag}{body}"
            sign = "-" if c < 0 else "+"
            pieces.append((("-" if sign == "-" else "") + body) if i == 0 else f" {sign} {body}")
        return "".join(pieces)


def _check_momentum(p, grid, name):
    p = float(p)
    if p == 0:
        raise ContractError(f"{name} must be nonzero")
    if grid is not None:
        k = grid.mode_of_momentum(p)
        if k == 0:
            raise ContractError(f"{name} maps to the zero mode")
    return p


def _create(expr, i):
    """Act with the creation operator at ``p_i`` on an amplitude expression."""
    a_i, p_i = (_IDX["a1"], _IDX["p1"]) if i == 1 else (_IDX["a2"], _IDX["p2"])
    a_j = _IDX["a2"] if i == 1 else _IDX["a1"]
    out = {}
    for k, c in expr.terms.items():
        e = list(k)
        e[a_i] += 1
        e[p_i] += 1
        key = tuple(e)
        out[key] = out.get(key, 0) + 2 * c
        if k[a_i]:
            raise ContractError("repeated creation at one momentum; use nphoton_polynomial")
        # delta At(-p_j) / delta At(p_i) = delta(p_i + p_j)
        if k[a_j]:
            e = list(k)
            e[a_j] -= 1
            e[_IDX["d12"]] += 1
            key = tuple(e)
            out[key] = out.get(key, 0) - k[a_j] * c
    return MultiModeExpression(out, expr.p1, expr.p2)


def two_photon_amplitude(p1, p2, grid=None):
    """Prefactor of ``a^dagger(p2) a^dagger(p1) |0>``: ``4|p1||p2| a1 a2 - 2|p1| d12``."""
    p1 = _check_momentum(p1, grid, "p1")
    p2 = _check_momentum(p2, grid, "p2")
    vac = MultiModeExpression({_exp(): 1}, p1, p2)
    return _create(_create(vac, 1), 2)


def two_photon_expression(p1, p2, grid=None):
    """``|psi_{p1,p2}|^2`` prefactor as an exact expression (vacuum factor omitted)."""
    amp = two_photon_amplitude(p1, p2, grid)
    return amp * amp.conjugate()


def photon_modulus_squared(poly, p=1.0):
    """``|Q|^2`` written over the two-momentum variables with ``p1 = p2``.

    Lets a single-momentum prefactor be compared with
    :func:`two_photon_expression` after :meth:`MultiModeExpression.reduce_coincident`.
    """
    amp = MultiModeExpression(
        {_exp(a1=pa, d12=pd, p1=pp): c for (pa, pd, pp), c in poly.terms.items()}, p, p
    )
    return amp * amp.conjugate()


# -- numeric side ------------------------------------------------------------


class VacuumGaussian:
    """``Psi_0 = exp(-1/2 sum_k omega_k |At(p_k)|^2 dp)`` with unit normalization."""

    def __init__(self, grid: GridSpec, dispersion=None):
        self.grid = grid
        w = grid.dispersion if dispersion is None else np.asarray(dispersion, dtype=float)
        if w.shape != (grid.n_modes,):
            raise ContractError("dispersion must have one entry per lattice slot")
        if np.any(w[grid.retained] <= 0):
            raise ContractError("retained modes need omega > 0; set a mass to keep the zero mode")
        self.dispersion = w

    def log_weight(self, field: SpectralField):
        a2 = np.abs(field.amplitudes) ** 2
        return -0.5 * float(np.sum(self.dispersion * a2) * self.grid.dp)

    def log_density(self, field: SpectralField):
        return 2.0 * self.log_weight(field)


def evaluate_log_density(poly, field, kbar, vac):
    """Unnormalized ``log |Q_n(At(-pbar)) Psi_0|^2``.

    The photon energy entering the prefactor is ``omega`` at ``kbar``, which is
    ``|pbar|`` on a massless grid.
    """
    grid = field.grid
    kbar = int(kbar)
    if kbar == 0:
        raise ContractError("photon mode must be nonzero")
    grid.slot(kbar)
    if poly.has_contact_terms:
        raise ContractError(
            "prefactor still contains delta(2 pbar); call drop_contact_terms first"
        )
    omega = float(vac.dispersion[grid.slot(kbar)])
    a = complex(field.at(-kbar))
    value = poly.evaluate(a, omega)
    mod2 = abs(value) ** 2
    log_pref = math.log(mod2) if mod2 > 0 else -math.inf
    return log_pref + vac.log_density(field)


# -- single-mode oscillator check -------------------------------------------


def mode_eigenvalue_check(n, omega, h=1e-3, dp=0.1, extent=6.0):
    """Finite-difference residual of the reduced pair-mode Hamiltonian.

    One Hermitian pair ``(k, -k)`` with amplitude ``z = q1 + i q2`` has vacuum
    weight ``exp(-omega dp |z|^2)``, i.e. a 2-D oscillator of mass
    ``mu = 2 dp``.  The n-photon state ``z^n exp(-mu omega |z|^2 / 2)`` has
    angular momentum ``n`` and pair energy ``E_n = (n + 1) omega`` (n quanta
    plus two half-quantum zero points).  The radial part ``f(r)`` is checked
    against

        -(f'' + f'/r - n^2 f / r^2) / (2 mu) + mu omega^2 r^2 f / 2 = E_n f

    with central differences of step ``h`` on ``r`` in
    ``[ell/4, extent * ell]``, ``ell = (mu omega)^-1/2``.  Returns
    ``max |H f - E_n f| / max |f|``, which is O(h^2).
    """
    n = check_nonneg_int(n, "n")
    if n > 12:
        raise ContractError("n must be at most 12 for a well-conditioned stencil")
    if omega <= 0 or h <= 0 or dp <= 0:
        raise ContractError("omega, h and dp must be positive")
    mu = 2.0 * dp
    ell = 1.0 / math.sqrt(mu * omega)
    r_lo, r_hi = 0.25 * ell, extent * ell
    m = int(round((r_hi - r_lo) / h))
    r = r_lo + h * np.arange(m + 1)

    def f(x):
        return x**n * np.exp(-0.5 * mu * omega * x * x)

    fr = f(r)
    fp = f(r + h)
    fm = f(r - h)
    d2 = (fp - 2.0 * fr + fm) / (h * h)
    d1 = (fp - fm) / (2.0 * h)
    lap = d2 + d1 / r - (n * n) * fr / (r * r)
    hf = -lap / (2.0 * mu) + 0.5 * mu * omega**2 * r * r * fr
    energy = (n + 1) * omega
    return float(np.max(np.abs(hf - energy * fr)) / np.max(np.abs(fr)))
