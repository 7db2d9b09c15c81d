"""Physicists' Hermite polynomials in exact integer arithmetic.

Kept apart from the creation-operator recursion so it can serve as an
independent cross-check of the photon prefactors.
"""

from __future__ import annotations

from math import factorial


def hermite_coefficients(n):
    """Integer coefficients ``[c_0, ..., c_n]`` of ``H_n(x) = sum c_j x^j``.

    Uses the three-term recurrence ``H_{m+1} = 2x H_m - 2m H_{m-1}``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    prev, cur = [1], [0, 2]
    if n == 0:
        return prev
    for m in range(1, n):
        nxt = [0] * (m + 2)
        for j, c in enumerate(cur):
            nxt[j + 1] += 2 * c
        for j, c in enumerate(prev):
            nxt[j] -= 2 * m * c
        prev, cur = cur, nxt
    return cur


def hermite_explicit(n):
    """Coefficients from ``H_n(x) = n! sum_k (-1)^k (2x)^(n-2k) / (k! (n-2k)!)``."""
    coeffs = [0] * (n + 1)
    for k in range(n // 2 + 1):
        num = factorial(n) * (-1) ** k * 2 ** (n - 2 * k)
        coeffs[n - 2 * k] = num // (factorial(k) * factorial(n - 2 * k))
    return coeffs


def hermite_as_photon_terms(n, coeffs=None):
    """Map ``(|p| d)^(n/2) H_n(a sqrt(|p|/d))`` onto photon monomials.

    The power ``x^(n-2k)`` lands on ``a^(n-2k) d^k |p|^(n-k)``, so the result
    is a dict ``{(pow_a, pow_d, pow_pbar): coeff}`` with integer coefficients.
    """
    if coeffs is None:
        coeffs = hermite_coefficients(n)
    terms = {}
    for j, c in enumerate(coeffs):
        if c == 0:
            continue
        if (n - j) % 2:
            raise ValueError(f"H_{n} has a term of wrong parity at x^{j}")
        k = (n - j) // 2
        terms[(j, k, n - k)] = c
    return terms
