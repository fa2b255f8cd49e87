import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_pair, scalar_pair
from gamma_lab.errors import NotCommuting, NotContractions, SqrtFailed
from gamma_lab.gamma import (
    INCONCLUSIVE,
    NO,
    YES,
    OperatorPair,
    alpha_grid,
    classify_pair,
    decompose_symmetrization,
    is_gamma_contraction,
    joint_spectrum,
    point_in_gamma,
    rho_form,
    symmetrize,
    symmetrize_pair,
    von_neumann_sample,
)
from gamma_lab.generators import gamma_contraction_sweep, random_contraction, random_gamma_unitary
from gamma_lab.numlin import adjoint, opnorm

seeds = st.integers(0, 2**32 - 1)
disc = st.tuples(st.floats(0, 1), st.floats(0, 2 * np.pi)).map(lambda t: t[0] * np.exp(1j * t[1]))
circle = st.floats(0, 2 * np.pi).map(lambda t: np.exp(1j * t))


# -- symmetrization -----------------------------------------------------------


def test_symmetrize_points():
    assert symmetrize(1, 1) == (2, 1)
    assert symmetrize(0, 0) == (0, 0)


def test_symmetrize_pair_diagonal():
    pair = symmetrize_pair(np.diag([1 / 2, 1j / 2]), np.diag([1 / 3, 1 / 3]))
    assert np.allclose(pair.S, np.diag([5 / 6, 1j / 2 + 1 / 3]))
    assert np.allclose(pair.P, np.diag([1 / 6, 1j / 6]))


def test_symmetrize_pair_errors():
    with pytest.raises(NotCommuting):
        symmetrize_pair([[0, 0.5], [0, 0]], [[0, 0], [0.5, 0]])
    with pytest.raises(NotContractions):
        symmetrize_pair([[2.0]], [[0.5]])


def test_operator_pair_rejects_noncommuting():
    with pytest.raises(NotCommuting):
        OperatorPair(np.array([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]]))


def test_operator_pair_is_immutable():
    pair = scalar_pair(1, 0)
    with pytest.raises(ValueError):
        pair.S[0, 0] = 5


# -- membership ---------------------------------------------------------------


def test_point_in_gamma_examples():
    assert point_in_gamma(2, 1) == (True, True)
    assert point_in_gamma(1, 0) == (True, False)
    assert point_in_gamma(3, 1).in_gamma is False


@given(disc, disc)
def test_symmetrized_disc_points_are_in_gamma(z1, z2):
    assert point_in_gamma(*symmetrize(z1, z2), tol=1e-9).in_gamma


@given(circle, circle)
def test_torus_lands_in_distinguished_boundary(z1, z2):
    assert point_in_gamma(*symmetrize(z1, z2), tol=1e-9).in_bgamma


@given(circle, st.floats(0, 0.999))
def test_interior_factor_leaves_distinguished_boundary(z1, r):
    assert not point_in_gamma(*symmetrize(z1, r), tol=1e-9).in_bgamma


# -- rho and the contraction test -------------------------------------------------


def test_rho_form_examples():
    assert np.allclose(rho_form([[2]], [[1]]), [[0]])
    assert np.allclose(rho_form([[0]], [[0]]), [[2]])
    assert np.allclose(rho_form([[1]], [[0]]), [[0]])


def test_rho_form_is_hermitian(rng):
    s, p = random_contraction(3, rng), random_contraction(3, rng)
    r = rho_form(s, p)
    assert np.array_equal(r, adjoint(r))


def test_alpha_grid_contains_unit_circle():
    a = alpha_grid(4, 8)
    assert np.isclose(np.abs(a).max(), 1.0)
    assert np.sum(np.isclose(np.abs(a), 1.0)) == 8


@given(seeds, st.integers(1, 5))
def test_symmetrized_pairs_are_gamma_contractions(seed, n):
    pair = random_pair(seed, n, "symmetrized_random")
    assert is_gamma_contraction(pair).verdict == YES


def test_gamma_contraction_counterexample():
    v = is_gamma_contraction(scalar_pair(3, 0))
    assert v.verdict == NO
    assert v.min_eigenvalue < 0


def test_boundary_point_is_gamma_contraction():
    v = is_gamma_contraction(scalar_pair(2, 1))
    assert v.verdict == YES
    assert abs(v.min_eigenvalue) < 1e-12


def test_spectrum_outside_gamma_is_rejected():
    # the joint spectrum contains (2.1, 1), whose roots have modulus > 1
    pair = OperatorPair(np.diag([0.0, 2.1]), np.diag([0.0, 1.0]))
    assert is_gamma_contraction(pair).verdict == NO


# -- classification -------------------------------------------------------------


def test_classify_boundary_point():
    c = classify_pair(scalar_pair(2, 1))
    assert c.is_gamma_unitary == YES
    assert c.is_gamma_isometry == YES


def test_classify_commuting_unitaries(rng):
    c = classify_pair(random_gamma_unitary(4, rng))
    assert c.is_gamma_unitary == YES
    assert all(pt["in_bgamma"] for pt in c.joint_spectrum)


def test_classify_scalar_interior():
    c = classify_pair(scalar_pair(1, 0))
    assert c.is_gamma_unitary == NO
    assert c.is_gamma_contraction.verdict == YES


def test_classify_non_isometric_scalar():
    c = classify_pair(scalar_pair(0.5, 0))
    assert (c.is_gamma_unitary, c.is_gamma_isometry) == (NO, NO)


def test_classification_monotone_and_norm_bounded():
    pairs = gamma_contraction_sweep(1000, 8, seed=7)
    pairs += [random_gamma_unitary(n, np.random.default_rng(n)) for n in range(1, 9)]
    for pair in pairs:
        c = classify_pair(pair)
        verdict = c.is_gamma_contraction.verdict
        if c.is_gamma_unitary == YES:
            assert c.is_gamma_isometry == YES
        if c.is_gamma_isometry == YES:
            assert verdict != NO
        if verdict == YES:
            assert opnorm(pair.S) <= 2 + 1e-8
            assert opnorm(pair.P) <= 1 + 1e-8


@given(seeds, st.integers(1, 5))
def test_adjoint_pair_stays_gamma_contraction(seed, n):
    pair = random_pair(seed, n)
    assert classify_pair(pair.adjoint()).is_gamma_contraction.verdict != NO


def test_classification_json_dict():
    d = classify_pair(scalar_pair(1, 0)).to_dict()
    assert d["is_gamma_contraction"]["verdict"] == YES
    assert d["tol"] == 1e-9


# -- joint spectrum ------------------------------------------------------------------


def _as_set(points):
    return sorted((round(a.real, 9), round(a.imag, 9), round(b.real, 9), round(b.imag, 9)) for a, b in points)


def test_joint_spectrum_diagonal():
    pair = OperatorPair(np.diag([0.5, -0.25j]), np.diag([0.1, 0.2]))
    assert _as_set(joint_spectrum(pair)) == _as_set([(0.5, 0.1), (-0.25j, 0.2)])


def test_joint_spectrum_scalar():
    assert _as_set(joint_spectrum(scalar_pair(2, 1))) == _as_set([(2, 1)])


def test_joint_spectrum_jordan_block():
    pair = OperatorPair(np.array([[1.0, 1.0], [0.0, 1.0]]), np.zeros((2, 2)))
    assert _as_set(joint_spectrum(pair)) == _as_set([(1, 0), (1, 0)])


def test_joint_spectrum_matches_symmetrized_eigenvalues(rng):
    t1 = np.diag(rng.uniform(-1, 1, 3))
    t2 = np.diag(rng.uniform(-1, 1, 3))
    q = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    pair = symmetrize_pair(q @ t1 @ q.T, q @ t2 @ q.T)
    expected = [symmetrize(a, b) for a, b in zip(np.diag(t1), np.diag(t2))]
    got = joint_spectrum(pair)
    assert _as_set(got) == _as_set(expected)


# -- von Neumann sampling --------------------------------------------------------------


def test_von_neumann_constant_polynomial(rng):
    r = von_neumann_sample(random_pair(1, 3), polynomials=[{(0, 0): 1.0}])
    assert r.worst_ratio == pytest.approx(1.0)


def test_von_neumann_p_polynomial():
    r = von_neumann_sample(random_pair(2, 3), polynomials=[{(0, 1): 1.0}])
    assert r.worst_ratio <= 1 + 1e-9


def test_von_neumann_s_on_boundary_point():
    r = von_neumann_sample(scalar_pair(2, 1), polynomials=[{(1, 0): 1.0}])
    assert r.worst_ratio == pytest.approx(1.0, abs=1e-9)


@given(seeds, st.integers(1, 4))
def test_von_neumann_random_polynomials_hold(seed, n):
    r = von_neumann_sample(random_pair(seed, n, "symmetrized_random"), trials=5, seed=seed)
    assert r.verdict == YES


def test_von_neumann_detects_violation():
    r = von_neumann_sample(scalar_pair(3, 0), polynomials=[{(1, 0): 1.0}])
    assert r.verdict == NO


# -- inverse symmetrization ---------------------------------------------------------------


def test_decompose_double_point():
    out = decompose_symmetrization(scalar_pair(2, 1))
    assert out.status == "ok"
    assert np.allclose(out.T1, [[1]]) and np.allclose(out.T2, [[1]])


def test_decompose_diagonal_example():
    t1, t2 = np.diag([1 / 2, 1j / 2]), np.diag([1 / 3, 1 / 3])
    out = decompose_symmetrization(symmetrize_pair(t1, t2))
    assert out.status == "ok"
    got = np.sort_complex(np.concatenate([np.diag(out.T1), np.diag(out.T2)]))
    want = np.sort_complex(np.concatenate([np.diag(t1), np.diag(t2)]))
    assert np.allclose(got, want)


def test_decompose_scalar_root_two():
    out = decompose_symmetrization(scalar_pair(0, -1))
    assert np.allclose(out.root, [[2]])
    assert np.allclose(out.T1, [[1]]) and np.allclose(out.T2, [[-1]])


def test_decompose_raises_on_negative_axis():
    # S^2 - 4P = -4
    with pytest.raises(SqrtFailed):
        decompose_symmetrization(scalar_pair(0, 1))


@given(seeds, st.integers(1, 5))
def test_decompose_output_satisfies_contract(seed, n):
    pair = random_pair(seed, n, "symmetrized_random")
    try:
        out = decompose_symmetrization(pair)
    except SqrtFailed:
        return
    if out.status == INCONCLUSIVE:
        return
    tol = 1e-9 * (1 + opnorm(pair.S) ** 2)
    assert opnorm(out.T1 + out.T2 - pair.S) + opnorm(out.T1 @ out.T2 - pair.P) <= tol
    assert opnorm(out.T1 @ out.T2 - out.T2 @ out.T1) <= tol
