import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_hermitian
from photonfield.hermite import hermite_as_photon_terms
from photonfield.lattice import SpectralField
from photonfield.validation import ContractError
from photonfield.wavefunctional import (
    PhotonPolynomial,
    VacuumGaussian,
    apply_creation,
    drop_contact_terms,
    evaluate_log_density,
    mode_eigenvalue_check,
    nphoton_polynomial,
    photon_modulus_squared,
    two_photon_amplitude,
    two_photon_expression,
    vacuum_polynomial,
)

GOLDEN = Path(__file__).parent / "golden" / "polynomials_0_4.json"


def test_golden_polynomials():
    doc = json.loads(GOLDEN.read_text())
    for entry in doc["polynomials"]:
        assert nphoton_polynomial(entry["n"]).to_json() == entry
        assert PhotonPolynomial.from_json(entry) == nphoton_polynomial(entry["n"])


def test_canonical_text():
    assert nphoton_polynomial(0).to_text() == "1"
    assert nphoton_polynomial(1).to_text() == "2|p|a"
    assert nphoton_polynomial(2).to_text() == "2|p|(2|p|a^2 - d)"
    assert nphoton_polynomial(3).to_text() == "4|p|^2(2|p|a^3 - 3ad)"
    assert nphoton_polynomial(4).to_text() == "4|p|^2(4|p|^2a^4 - 12|p|a^2d + 3d^2)"


def test_creation_steps():
    q0 = vacuum_polynomial()
    assert q0 == nphoton_polynomial(0)
    assert apply_creation(q0) == nphoton_polynomial(1)
    assert apply_creation(nphoton_polynomial(1)) == nphoton_polynomial(2)
    assert apply_creation(nphoton_polynomial(3)) == nphoton_polynomial(4)


def test_hermite_identity_to_n20():
    for n in range(21):
        assert dict(nphoton_polynomial(n).terms) == hermite_as_photon_terms(n)


def test_n10_against_hermite_numerically():
    # (|p| d)^5 H_10(a sqrt(|p|/d)) at a = 0.7, |p| = 1.3, d = 0.4
    a, p, d = 0.7, 1.3, 0.4
    x = a * math.sqrt(p / d)
    h10 = np.polynomial.hermite.hermval(x, [0] * 10 + [1])
    expected = (p * d) ** 5 * h10
    got = sum(c * a**pa * d**pd * p**pp for (pa, pd, pp), c in nphoton_polynomial(10).terms.items())
    assert got == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("n", range(13))
def test_homogeneity_and_integer_coefficients(n):
    q = nphoton_polynomial(n)
    for (pa, pd, pp), c in q.terms.items():
        assert pa + 2 * pd == n and pp + pd == n
        assert isinstance(c, int)


def test_inhomogeneous_terms_rejected():
    with pytest.raises(ContractError):
        PhotonPolynomial(2, {(1, 0, 1): 1})
    with pytest.raises(ContractError):
        PhotonPolynomial(2, {(2, 0, 2): 1.5})


def test_drop_contact_terms():
    assert drop_contact_terms(nphoton_polynomial(2)) == PhotonPolynomial(2, {(2, 0, 2): 4})
    assert drop_contact_terms(nphoton_polynomial(4)) == PhotonPolynomial(4, {(4, 0, 4): 16})
    assert drop_contact_terms(nphoton_polynomial(0)) == nphoton_polynomial(0)


def test_contact_terms_cannot_be_evaluated():
    with pytest.raises(ContractError):
        nphoton_polynomial(2).evaluate(0.3, 1.0)


def test_two_photon_amplitude_form():
    amp = two_photon_amplitude(1.0, 2.0)
    assert amp.to_text() == "4|p1||p2| a1 a2 - 2|p1| d12"


def test_two_photon_distinct_momenta_keeps_product_term():
    expr = two_photon_expression(1.0, 2.0)
    assert expr.delta_order == 2
    assert expr.drop_contact_terms().to_text() == "16|p1|^2|p2|^2 D1 D2"
    # exact expansion of |4|p1||p2| a1 a2 - 2|p1| d12|^2
    a1, a2 = 0.3 + 0.4j, -0.2 + 0.9j
    ref = abs(4 * 1 * 2 * a1 * a2) ** 2
    assert expr.drop_contact_terms().evaluate(a1, a2).real == pytest.approx(ref, rel=1e-12)
    middle = {k: c for k, c in expr.terms.items() if k[4] == 1}
    assert sorted(middle.values()) == [-8, -8]  # -8|p1|^2|p2| d12 (a1 a2 + a1* a2*)
    assert all(k[5] == 2 and k[6] == 1 for k in middle)


def test_two_photon_counter_propagating_is_delta_dominated():
    expr = two_photon_expression(1.0, -1.0).reduce_counter_propagating()
    assert expr.delta_order == 2
    assert expr.dominant_terms().to_text() == "4|p1|^2 d12^2"
    # the single-delta term survives on this shell; it is subleading in d12
    assert expr.to_text() == "16|p1|^4 D1^2 - 16|p1|^3 D1 d12 + 4|p1|^2 d12^2"


def test_two_photon_coincident_matches_q2():
    expr = two_photon_expression(1.0, 1.0).reduce_coincident().drop_contact_terms()
    ref = photon_modulus_squared(drop_contact_terms(nphoton_polynomial(2)), 1.0).drop_contact_terms()
    assert expr == ref
    assert expr.to_text() == "16|p1|^4 D1^2"


def test_two_photon_rejects_zero_momentum(grid):
    with pytest.raises(ContractError):
        two_photon_amplitude(0.0, 1.0)
    with pytest.raises(ContractError):
        two_photon_amplitude(1.05, 1.0, grid=grid)


def _field_with(grid, k, value):
    a = np.zeros(grid.n_modes, complex)
    a[grid.slot(k)] = value
    a[grid.slot(-k)] = np.conj(value)
    return SpectralField(grid, a)


def test_log_density_vacuum_at_zero_field(grid):
    vac = VacuumGaussian(grid)
    f = SpectralField(grid, np.zeros(grid.n_modes, complex))
    assert evaluate_log_density(nphoton_polynomial(0), f, 10, vac) == 0.0


def test_log_density_single_photon_example(grid):
    vac = VacuumGaussian(grid)
    f = _field_with(grid, -10, 0.5)
    exponent = 2 * 1.0 * 0.25 * grid.dp
    got = evaluate_log_density(nphoton_polynomial(1), f, 10, vac)
    assert got == pytest.approx(math.log(1.0) - exponent, abs=1e-15)


def test_log_density_ratio_matches_direct_sum(grid):
    rng = np.random.default_rng(11)
    vac = VacuumGaussian(grid)
    q = drop_contact_terms(nphoton_polynomial(3))
    a = random_hermitian(grid, rng)
    a[0] = 0
    f = SpectralField(grid, a)
    peak = _field_with(grid, -10, a[grid.slot(-10)])

    def oracle(amps):
        pref = abs(8 * amps[grid.slot(-10)] ** 3) ** 2
        s = 0.0
        for k in range(grid.n_modes):
            s += grid.dispersion[k] * abs(amps[k]) ** 2 * grid.dp
        return math.log(pref) - s

    got = evaluate_log_density(q, f, 10, vac) - evaluate_log_density(q, peak, 10, vac)
    ref = oracle(f.amplitudes) - oracle(peak.amplitudes)
    assert got == pytest.approx(ref, abs=1e-12 * max(1.0, abs(ref)))


def test_log_density_requires_dropped_contacts(grid):
    with pytest.raises(ContractError):
        evaluate_log_density(nphoton_polynomial(2), _field_with(grid, 10, 1.0), 10, VacuumGaussian(grid))


@settings(max_examples=100, deadline=None)
@given(theta=st.floats(0, 2 * math.pi), seed=st.integers(0, 2**32 - 1), n=st.integers(0, 5))
def test_log_density_phase_invariance(theta, seed, n):
    from photonfield.lattice import GridSpec
    g = GridSpec(32, 20 * math.pi)
    vac = VacuumGaussian(g)
    a = random_hermitian(g, np.random.default_rng(seed))
    a[0] = 0
    q = drop_contact_terms(nphoton_polynomial(n))
    base = evaluate_log_density(q, SpectralField(g, a), 10, vac)
    b = a.copy()
    b[g.slot(10)] *= np.exp(1j * theta)
    b[g.slot(-10)] *= np.exp(-1j * theta)
    rotated = evaluate_log_density(q, SpectralField(g, b), 10, vac)
    assert rotated == pytest.approx(base, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("n", [0, 1])
def test_mode_eigenvalue_residual(n):
    assert mode_eigenvalue_check(n, 1.0, h=1e-3) < 1e-6


def test_mode_eigenvalue_second_order():
    ratio = mode_eigenvalue_check(0, 1.0, h=2e-2) / mode_eigenvalue_check(0, 1.0, h=1e-2)
    assert ratio == pytest.approx(4.0, rel=0.05)


def test_mode_eigenvalue_higher_n_and_omega():
    assert mode_eigenvalue_check(2, 3.0, h=1e-3) < 1e-5
