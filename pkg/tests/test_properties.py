import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qspforge import (
    PolynomialState,
    SignalConvention,
    analytic_to_laurent_1d,
    decompose_3d,
    embed_2d_in_3d,
    evaluate_protocol_1d,
    evaluate_protocol_2d_choice,
    evaluate_protocol_3d,
    l2_distance,
    laurent_to_analytic_1d,
    normalization_residual,
    q_gamma,
    random_protocol_1d,
    random_protocol_2d_choice,
    random_protocol_3d,
    synthesize_1d,
)
from qspforge import io
from qspforge.linalg import haar_unitary
from qspforge.univariate import FULL, WX, WZ, XROT, ZROT

seeds = st.integers(0, 2**32 - 1)
conventions = st.builds(
    lambda picture, pair: SignalConvention(picture, *pair),
    st.sampled_from(["analytic", "laurent"]),
    st.sampled_from([(WZ, FULL), (WX, FULL), (WZ, XROT), (WX, ZROT)]),
)
choice_strings = st.text(alphabet="ab", min_size=0, max_size=7)


def random_bivariate(rng, degree, dim=2):
    terms = {
        (i, j): rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        for i in range(degree + 1) for j in range(degree + 1 - i)
    }
    return PolynomialState.from_terms(terms)


@given(st.integers(0, 10), seeds, conventions)
def test_univariate_synthesis_round_trip(n, seed, conv):
    target = evaluate_protocol_1d(random_protocol_1d(n, seed, conv))
    assert l2_distance(evaluate_protocol_1d(synthesize_1d(target, conv)), target) < 1e-9


@settings(max_examples=30)
@given(st.integers(1, 6), seeds)
def test_three_dim_decomposition_round_trip(n, seed):
    target = evaluate_protocol_3d(random_protocol_3d(n, seed))
    assert l2_distance(evaluate_protocol_3d(decompose_3d(target)), target) < 1e-9


@given(choice_strings, seeds, st.sampled_from(["analytic", "laurent"]))
def test_protocol_outputs_are_normalized(choices, seed, picture):
    s = evaluate_protocol_2d_choice(random_protocol_2d_choice(len(choices), seed, choices, picture))
    assert normalization_residual(s) < 1e-12


@given(choice_strings, seeds)
def test_embedding_preserves_the_output(choices, seed):
    p = random_protocol_2d_choice(len(choices), seed, choices)
    s2 = evaluate_protocol_2d_choice(p)
    s3 = evaluate_protocol_3d(embed_2d_in_3d(p))
    assert l2_distance(s2.map_vectors(lambda v: np.append(v, 0)), s3) < 1e-12


@given(st.integers(1, 4), seeds, seeds)
def test_q_is_invariant_under_a_global_unitary(degree, s1, s2):
    rng = np.random.default_rng(s1)
    s = random_bivariate(rng, degree)
    u = haar_unitary(2, np.random.default_rng(s2))
    q0 = q_gamma(s, normalize=False).q
    assert abs(q_gamma(s.map_vectors(lambda v: u @ v), normalize=False).q - q0) < 1e-10 * max(1, q0)


@given(st.integers(1, 4), seeds, st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_q_is_invariant_under_variable_phases(degree, seed, ta, tb):
    # a -> e^{i ta} a and b -> e^{i tb} b rescale axis coefficients by phases
    s = random_bivariate(np.random.default_rng(seed), degree)
    rotated = PolynomialState.from_terms(
        {(i, j): v * np.exp(1j * (i * ta + j * tb)) for (i, j), v in s.terms.items()}
    )
    q0 = q_gamma(s, normalize=False).q
    assert abs(q_gamma(rotated, normalize=False).q - q0) < 1e-10 * max(1, q0)


@given(st.integers(1, 4), seeds, st.floats(1e-6, 1e-2))
def test_q_moves_at_most_four_eps_under_perturbation(degree, seed, eps):
    rng = np.random.default_rng(seed)
    s = random_bivariate(rng, degree)
    s = s.scaled(1 / np.sqrt(sum(np.vdot(v, v).real for v in s.terms.values())))
    noise = random_bivariate(rng, degree)
    size = np.sqrt(sum(np.vdot(v, v).real for v in noise.terms.values()))
    t = PolynomialState.from_terms({k: s.terms[k] + eps / size * noise.terms[k] for k in s.terms})
    assert l2_distance(s, t) == pytest.approx(eps, rel=1e-8)
    assert abs(q_gamma(s, normalize=False).q - q_gamma(t, normalize=False).q) < 4 * eps


@given(st.integers(0, 4), seeds, st.integers(1, 3))
def test_state_serialization_round_trip(degree, seed, dim):
    s = random_bivariate(np.random.default_rng(seed), degree, dim)
    back = io.loads(io.dumps(io.to_doc(s)))
    assert back.terms.keys() == s.terms.keys()
    assert all(np.array_equal(back.terms[k], s.terms[k]) for k in s.terms)


@given(st.integers(0, 8), seeds)
def test_index_map_round_trip(n, seed):
    lau = evaluate_protocol_1d(random_protocol_1d(n, seed, SignalConvention("laurent")))
    ana = laurent_to_analytic_1d(lau)
    assert ana.degree <= n
    assert analytic_to_laurent_1d(ana, n) == lau
