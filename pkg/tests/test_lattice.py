import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import direct_autocorrelation, direct_forward, direct_inverse, random_hermitian
from photonfield.lattice import (
    DensityField,
    GridSpec,
    RealField,
    SpectralField,
    autocorrelation,
    circular_autocorrelation,
    forward_transform,
    from_json,
    inverse_transform,
    parseval_energy,
    read_csv,
    reflect,
    spectral_density,
    spectral_energy,
    to_json,
    write_csv,
)
from photonfield.validation import ContractError, SymmetryError


def test_grid_geometry(grid):
    assert grid.dp == pytest.approx(0.1, rel=1e-15)
    assert grid.dx == pytest.approx(20 * math.pi / 128)
    assert grid.nyquist == 64
    assert grid.signed_indices[0] == 0 and grid.signed_indices[64] == -64
    assert grid.mode_of_momentum(1.0) == 10
    assert grid.slot(-10) == 118
    assert not grid.retained[0] and grid.retained[1:].all()


@pytest.mark.parametrize("kwargs", [dict(n_modes=7, box_length=1.0), dict(n_modes=2, box_length=1.0),
                                    dict(n_modes=8, box_length=0.0), dict(n_modes=8, box_length=1.0, mass=-1)])
def test_grid_rejects_bad_parameters(kwargs):
    with pytest.raises(ContractError):
        GridSpec(**kwargs)


def test_off_grid_momentum_rejected(grid):
    with pytest.raises(ContractError):
        grid.mode_of_momentum(1.05)
    with pytest.raises(ContractError):
        grid.slot(65)


def test_grid_dict_round_trip():
    g = GridSpec(32, 5.0, include_zero_mode=True, mass=0.5)
    assert GridSpec.from_dict(g.to_dict()) == g


def test_reflect_maps_k_to_minus_k():
    v = np.arange(8)
    assert list(reflect(v)) == [0, 7, 6, 5, 4, 3, 2, 1]


def test_zero_field_transforms_to_zero(grid):
    spec = forward_transform(RealField(grid, np.zeros(grid.n_modes)))
    assert not np.any(spec.amplitudes)
    assert not np.any(inverse_transform(spec).values)
    assert parseval_energy(RealField(grid, np.zeros(grid.n_modes))) == 0
    assert not np.any(spectral_density(spec).values)
    assert not np.any(autocorrelation(DensityField.zeros(grid)).values)


def test_cosine_has_single_pair_support(grid):
    f = RealField(grid, np.cos(1.0 * grid.positions))
    a = forward_transform(f).amplitudes
    support = np.flatnonzero(np.abs(a) > 1e-12 * np.abs(a).max())
    assert sorted(support) == [grid.slot(10), grid.slot(-10)]
    assert a[grid.slot(10)] == pytest.approx(a[grid.slot(-10)], abs=1e-12)
    assert abs(a[grid.slot(10)].imag) < 1e-12


def test_two_mode_inverse_is_cosine(grid):
    r = 3.0
    a = np.zeros(grid.n_modes, complex)
    a[grid.slot(10)] = a[grid.slot(-10)] = r / 2
    f = inverse_transform(SpectralField(grid, a)).values
    expected = r * grid.dp / math.sqrt(2 * math.pi) * np.cos(grid.positions)
    assert np.max(np.abs(f - expected)) < 1e-12


def test_forward_matches_direct_sum(grid):
    rng = np.random.default_rng(1)
    v = rng.standard_normal(grid.n_modes)
    v -= v.mean()
    a = forward_transform(RealField(grid, v)).amplitudes
    ref = direct_forward(v, grid)
    assert np.max(np.abs(a - ref)) < 1e-12 * np.max(np.abs(ref))


def test_inverse_matches_direct_sum(grid):
    rng = np.random.default_rng(2)
    a = random_hermitian(grid, rng)
    f = inverse_transform(SpectralField(grid, a)).values
    ref = direct_inverse(a, grid)
    assert np.max(np.abs(ref.imag)) < 1e-12
    assert np.max(np.abs(f - ref.real)) < 1e-12 * np.max(np.abs(ref))


def test_round_trip_many_fields(grid):
    rng = np.random.default_rng(3)
    for _ in range(1000):
        v = rng.standard_normal(grid.n_modes)
        v -= v.mean()
        back = inverse_transform(forward_transform(RealField(grid, v))).values
        assert np.max(np.abs(back - v)) < 1e-12 * max(1.0, np.max(np.abs(v)))


def test_pair_spectral_energy(grid):
    r = 1.7
    a = np.zeros(grid.n_modes, complex)
    a[grid.slot(5)] = r * np.exp(0.3j)
    a[grid.slot(-5)] = r * np.exp(-0.3j)
    assert spectral_energy(SpectralField(grid, a)) == pytest.approx(2 * r * r * grid.dp, rel=1e-14)


def test_density_squares_amplitudes(grid):
    a = np.zeros(grid.n_modes, complex)
    a[grid.slot(7)] = 2j
    a[grid.slot(-7)] = -2j
    d = spectral_density(SpectralField(grid, a))
    assert d.at(7) == pytest.approx(4.0) and d.at(-7) == pytest.approx(4.0)


def test_most_likely_density_gives_cosine_autocorrelation(grid):
    d = np.zeros(grid.n_modes)
    d[[grid.slot(10), grid.slot(-10)]] = 1 / (2 * 1.0 * grid.dp)
    r = autocorrelation(DensityField(grid, d)).values
    assert np.max(np.abs(r - np.cos(grid.positions))) < 1e-9


def test_autocorrelation_matches_direct_sum_and_is_even(small_grid):
    rng = np.random.default_rng(4)
    v = rng.standard_normal(small_grid.n_modes)
    v -= v.mean()
    f = RealField(small_grid, v)
    r = autocorrelation(spectral_density(forward_transform(f))).values
    ref = direct_autocorrelation(v, small_grid.dx)
    assert np.max(np.abs(r - ref)) < 1e-12 * ref[0]
    assert np.max(np.abs(r - reflect(r))) < 1e-12 * ref[0]
    assert np.all(r[0] >= np.abs(r) - 1e-12)
    assert np.max(np.abs(circular_autocorrelation(v, small_grid.dx) - ref)) < 1e-12 * ref[0]


def test_arbitrary_even_density_gives_positive_definite_autocorrelation(grid):
    rng = np.random.default_rng(5)
    d = DensityField.symmetrized(grid, rng.uniform(0, 3, grid.n_modes))
    r = autocorrelation(d).values
    assert np.allclose(r, reflect(r), atol=1e-12)
    assert np.all(r[0] >= np.abs(r) - 1e-12)
    # the spectrum of R is D itself, so it is nonnegative
    spectrum = np.fft.fft(r).real / (grid.n_modes * grid.dp)
    assert np.min(spectrum) > -1e-10


def test_parseval_and_wiener_khinchin_on_random_fields(grid):
    rng = np.random.default_rng(6)
    for _ in range(1000):
        v = rng.standard_normal(grid.n_modes)
        f = RealField(grid, v - v.mean())
        spec = forward_transform(f)
        e = parseval_energy(f)
        assert abs(e - spectral_energy(spec)) < 1e-12 * e
        r = autocorrelation(spectral_density(spec)).values
        assert np.max(np.abs(r - circular_autocorrelation(f.values, grid.dx))) < 1e-10 * e


def test_non_hermitian_spectrum_rejected(grid):
    a = np.zeros(grid.n_modes, complex)
    a[grid.slot(3)] = 1.0
    with pytest.raises(SymmetryError):
        SpectralField(grid, a)


def test_nyquist_amplitude_must_be_real(grid):
    a = np.zeros(grid.n_modes, complex)
    a[grid.nyquist] = 1j
    with pytest.raises(SymmetryError):
        SpectralField(grid, a)


def test_excluded_zero_mode_rejects_mean(grid):
    with pytest.raises(ContractError):
        forward_transform(RealField(grid, np.ones(grid.n_modes)))


def test_included_zero_mode_keeps_mean():
    g = GridSpec(16, 4.0, include_zero_mode=True, mass=1.0)
    a = forward_transform(RealField(g, np.ones(16))).amplitudes
    assert a[0] == pytest.approx(4.0 / math.sqrt(2 * math.pi))


def test_length_mismatch_rejected(grid):
    with pytest.raises(ContractError):
        RealField(grid, np.zeros(10))


def test_odd_density_rejected(grid):
    d = np.zeros(grid.n_modes)
    d[grid.slot(3)] = 1.0
    with pytest.raises(SymmetryError):
        DensityField(grid, d)
    with pytest.raises(ContractError):
        DensityField(grid, -np.ones(grid.n_modes))


def test_fields_are_immutable(grid):
    f = RealField(grid, np.zeros(grid.n_modes))
    with pytest.raises(ValueError):
        f.values[0] = 1.0


@pytest.mark.parametrize("kind", ["real", "spectral", "density"])
def test_csv_and_json_round_trip(tmp_path, small_grid, kind):
    rng = np.random.default_rng(7)
    a = SpectralField(small_grid, random_hermitian(small_grid, rng))
    obj = {"real": inverse_transform(a), "spectral": a, "density": spectral_density(a)}[kind]
    path = tmp_path / f"{kind}.csv"
    write_csv(obj, path)
    back = read_csv(path, small_grid, kind)
    attr = "amplitudes" if kind == "spectral" else "values"
    np.testing.assert_array_equal(getattr(back, attr), getattr(obj, attr))
    again = from_json(json.dumps(to_json(obj)))
    np.testing.assert_array_equal(getattr(again, attr), getattr(obj, attr))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.sampled_from([4, 8, 16, 64, 128]),
       length=st.floats(0.5, 200.0))
def test_round_trip_property(seed, n, length):
    g = GridSpec(n, length)
    v = np.random.default_rng(seed).standard_normal(n)
    v -= v.mean()
    back = inverse_transform(forward_transform(RealField(g, v))).values
    assert np.max(np.abs(back - v)) < 1e-12 * max(1.0, np.max(np.abs(v)))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_density_is_even_property(seed):
    g = GridSpec(32, 10.0)
    v = np.random.default_rng(seed).standard_normal(32)
    d = spectral_density(forward_transform(RealField(g, v - v.mean()))).values
    np.testing.assert_array_equal(d, reflect(d))
