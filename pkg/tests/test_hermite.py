import numpy as np
import pytest
from numpy.polynomial import hermite as npherm

from photonfield.hermite import hermite_as_photon_terms, hermite_coefficients, hermite_explicit


def test_low_order_coefficients():
    assert hermite_coefficients(0) == [1]
    assert hermite_coefficients(1) == [0, 2]
    assert hermite_coefficients(2) == [-2, 0, 4]
    assert hermite_coefficients(3) == [0, -12, 0, 8]
    assert hermite_coefficients(4) == [12, 0, -48, 0, 16]


@pytest.mark.parametrize("n", range(21))
def test_recurrence_matches_explicit_sum(n):
    assert hermite_coefficients(n) == hermite_explicit(n)


@pytest.mark.parametrize("n", range(0, 21, 5))
def test_matches_numpy_hermite_basis(n):
    ref = npherm.herm2poly([0] * n + [1])
    np.testing.assert_allclose(hermite_coefficients(n), ref, rtol=1e-12)


def test_h10_value():
    # H_10(1) = 8224
    assert sum(hermite_coefficients(10)) == 8224


def test_photon_mapping_for_h2():
    assert hermite_as_photon_terms(2) == {(2, 0, 2): 4, (0, 1, 1): -2}


def test_negative_order_rejected():
    with pytest.raises(ValueError):
        hermite_coefficients(-1)
