import numpy as np
import pytest

from qspforge import BadSupport, DimensionMismatch, PolynomialState
from qspforge.polystate import (
    ANALYTIC,
    LAURENT,
    check_triangle,
    difference,
    effective_dimension,
    evaluate_at,
    evaluate_grid,
    l2_distance,
    normalization_residual,
    renormalize_lattice,
    shift_exponents,
    sup_distance_sampled,
)

from .oracles import state_at, torus_points

SQ2 = np.sqrt(0.5)


def qubit(terms, **kw):
    return PolynomialState.from_terms(terms, **kw)


def test_kind_is_inferred_from_support():
    assert qubit({(0,): [1, 0], (1,): [0, 1]}).kind == ANALYTIC
    assert qubit({(-1,): [1, 0], (1,): [0, 1]}).kind == LAURENT


def test_analytic_state_with_negative_exponent_is_rejected():
    with pytest.raises(BadSupport):
        qubit({(-1,): [1, 0]}, kind=ANALYTIC)


def test_tiny_terms_are_pruned():
    s = qubit({(0,): [1, 0], (3,): [1e-16, 0]})
    assert list(s.terms) == [(0,)]
    assert s.degree == 0


def test_exact_zero_terms_never_count_towards_degree():
    s = qubit({(0,): [1, 0], (2,): [0, 0]}, tol_prune=0.0)
    assert s.degree == 0


def test_constructor_validates_shapes_and_values():
    with pytest.raises(DimensionMismatch):
        qubit({(0,): [1, 0], (1, 1): [0, 1]})
    with pytest.raises(DimensionMismatch):
        qubit({(0,): [1, 0], (1,): [0, 1, 0]})
    with pytest.raises(ValueError):
        qubit({(0,): [np.inf, 0]})
    with pytest.raises(DimensionMismatch):
        qubit({(0, 0, 0): [1, 0]})


def test_coefficients_are_read_only():
    s = qubit({(0,): [1, 0]})
    with pytest.raises(ValueError):
        s.terms[(0,)][0] = 2
    with pytest.raises(TypeError):
        s.terms[(1,)] = np.zeros(2)


def test_degree_accessors_for_mixed_support():
    s = PolynomialState.from_terms({(2, 1): [1, 0, 0], (0, 3): [0, 1, 0], (1, 1): [0, 0, 1]})
    assert s.var_degree(0) == 2 and s.var_degree(1) == 3
    assert s.total_degree == 3
    assert s.degree == 3
    lau = PolynomialState.from_terms({(-2, 1): [1, 0], (0, 3): [0, 1]})
    assert lau.degree == 3


def test_missing_coefficient_is_zero():
    s = qubit({(0,): [1, 0]})
    assert np.array_equal(s.coefficient((5,)), np.zeros(2))


def test_lattice_round_trip():
    s = PolynomialState.from_terms({(-1, 2): [1, 2j], (3, 0): [0.5, 0]})
    lat, offset = s.to_lattice()
    assert offset == (-1, 0)
    assert lat.shape == (5, 3, 2)
    assert PolynomialState.from_lattice(lat, offset, num_vars=2, kind=LAURENT) == s


def test_evaluation_matches_direct_sum(rng):
    terms = {(k, h): rng.standard_normal(3) + 1j * rng.standard_normal(3) for k in range(3) for h in range(2)}
    s = PolynomialState.from_terms(terms)
    for point in torus_points(rng, 5, 2):
        phases = np.angle(point)
        assert np.allclose(evaluate_at(s, phases), state_at(terms, point))


def test_grid_evaluation_matches_pointwise():
    s = qubit({(-1,): [SQ2, 0], (1,): [0, SQ2]})
    grid = evaluate_grid(s, 8)
    for j in range(8):
        assert np.allclose(grid[j], evaluate_at(s, [2 * np.pi * j / 8]))


def test_normalization_residual_of_a_qsp_like_state():
    # (1 + z, 1 - z) / 2 has |P|^2 + |Q|^2 = 1 on the circle
    good = qubit({(0,): [0.5, 0.5], (1,): [0.5, -0.5]})
    assert normalization_residual(good) < 1e-15
    # (1 + z, 0) / sqrt(2) has norm 1 but a nonzero lag-1 term of 1/2
    bad = qubit({(0,): [SQ2, 0], (1,): [SQ2, 0]})
    assert normalization_residual(bad) == pytest.approx(0.5)


def test_effective_dimension():
    s = PolynomialState.from_terms({(0, 0): [1, 0, 0], (1, 1): [0, 1, 0]})
    assert effective_dimension(s) == 2


def test_distances():
    s1 = qubit({(0,): [1, 0]})
    s2 = qubit({(0,): [0, 1]})
    assert l2_distance(s1, s2) == pytest.approx(np.sqrt(2))
    assert sup_distance_sampled(s1, s2, 16) == pytest.approx(np.sqrt(2))
    assert difference(s1, s1).terms == {}
    with pytest.raises(DimensionMismatch):
        l2_distance(s1, PolynomialState.from_terms({(0,): [1, 0, 0]}))


def test_shift_exponents_recomputes_kind():
    s = qubit({(0,): [1, 0], (2,): [0, 1]})
    shifted = shift_exponents(s, -1)
    assert shifted.kind == LAURENT
    assert set(shifted.terms) == {(-1,), (1,)}
    assert shift_exponents(shifted, 1) == s
    assert shift_exponents(s, 0) is s


def test_check_triangle():
    s = PolynomialState.from_terms({(0, 0): [1, 0], (1, 1): [0, 1]})
    assert check_triangle(s) == 2
    with pytest.raises(BadSupport) as info:
        check_triangle(s, degree=1)
    assert info.value.witness["index"] == [1, 1]


def test_renormalize_repairs_a_small_defect(rng):
    # (1 + z, 1 - z)/2 perturbed by 1e-9 goes back to a normalized state nearby
    lat = np.array([[[0.5, 0.5]], [[0.5, -0.5]]], dtype=complex)
    noisy = lat + 1e-9 * (rng.standard_normal(lat.shape) + 1j * rng.standard_normal(lat.shape))
    fixed = renormalize_lattice(noisy)
    s = PolynomialState.from_lattice(fixed, num_vars=1, kind=ANALYTIC)
    assert normalization_residual(s) < 1e-15
    assert np.abs(fixed - noisy).max() < 1e-8


def test_renormalize_leaves_entries_outside_the_mask_at_zero(rng):
    lat = np.zeros((3, 3, 3), dtype=complex)
    lat[0, 0] = [1, 0, 0]
    lat[1, 0] = [0, 1e-9, 0]
    mask = np.add.outer(np.arange(3), np.arange(3)) <= 1
    fixed = renormalize_lattice(lat, mask)
    assert np.all(fixed[~mask] == 0)
    assert normalization_residual(PolynomialState.from_lattice(fixed, num_vars=2, kind=ANALYTIC)) < 1e-15
