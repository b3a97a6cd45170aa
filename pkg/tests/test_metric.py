import numpy as np
import pytest
import scipy.linalg

from ephunt.biortho import solve_biorthogonal
from ephunt.errors import AtExceptionalPoint, DimensionMismatch, NotNormalized
from ephunt.metric import (
    MetricOperator,
    build_metric,
    central_difference,
    eom_residual,
    evolve_metric,
    is_positive_definite,
    metric_inner,
    metric_rhs,
    rk4_evolve_metric,
)
from ephunt.models import toy_hamiltonian, toy_metric_exact

T_GRID = (0.0, 0.3, 1.0, 2.7)


def test_metric_makes_rights_orthonormal(random_set):
    for h in random_set:
        s = solve_biorthogonal(h)
        g = build_metric(s)
        gram = s.rights.conj().T @ g.g @ s.rights
        assert np.allclose(gram, np.eye(4), atol=1e-10)
        assert g.provenance == "gauge"


def test_metric_is_identity_for_hermitian(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    g = build_metric(solve_biorthogonal(a + a.conj().T))
    assert np.allclose(g.g, np.eye(4), atol=1e-10)


def test_metric_intertwines_h(random_set):
    # a static metric satisfies G H = H^dagger G only for a real spectrum;
    # in general G H - H^dagger G = 2i sum Im(E) |L><L|
    h = random_set[0]
    s = solve_biorthogonal(h)
    g = build_metric(s).g
    w = s.lefts
    expected = 2j * (w.conj().T * s.values.imag) @ w
    assert np.allclose(g @ h - h.conj().T @ g, expected, atol=1e-9)


@pytest.mark.parametrize("t", T_GRID)
def test_evolved_metric_matches_propagator(random_set, t):
    for h in random_set:
        s = solve_biorthogonal(h)
        g0 = build_metric(s).g
        ref = scipy.linalg.expm(-1j * h.conj().T * t) @ g0 @ scipy.linalg.expm(1j * h * t)
        got = evolve_metric(s, t)
        assert np.allclose(got.g, ref, rtol=1e-9, atol=1e-9 * np.linalg.norm(ref))
        assert is_positive_definite(got.g)


def test_evolved_metric_conserves_norm(random_set):
    h = random_set[2]
    s = solve_biorthogonal(h)
    psi = np.array([1.0, 0.5j, -0.2, 0.1])
    n0 = metric_inner(build_metric(s), psi, psi)
    for t in T_GRID[1:]:
        psi_t = scipy.linalg.expm(-1j * h * t) @ psi
        g = evolve_metric(s, t).g
        # the quadratic form cancels down from ||G|| ||psi||^2, so compare on that scale
        scale = np.linalg.norm(g, 2) * np.vdot(psi_t, psi_t).real
        assert abs(metric_inner(g, psi_t, psi_t) - n0) < 1e-10 * scale


def test_eom_residual_small_and_sensitive(random_set):
    for h in random_set:
        s = solve_biorthogonal(h)
        for t in T_GRID:
            g = lambda x: evolve_metric(s, x).g
            assert eom_residual(g(t), central_difference(g, t), h) < 1e-6
    # a shifted metric must fail the same gate
    g = lambda x: evolve_metric(s, x).g + 1e-3 * np.eye(4)
    assert eom_residual(g(1.0), central_difference(g, 1.0), h) > 1e-6


def test_rk4_agrees_with_closed_form(random_set):
    h = random_set[0]
    s = solve_biorthogonal(h)
    ref = evolve_metric(s, 1.0).g
    assert np.linalg.norm(rk4_evolve_metric(build_metric(s), h, 1.0) - ref) < 1e-8 * np.linalg.norm(ref)
    assert np.array_equal(rk4_evolve_metric(build_metric(s), h, 0.0), build_metric(s).g)


def test_metric_rhs_vanishes_for_hermitian():
    h = np.array([[1.0, 2 - 1j], [2 + 1j, -0.5]])
    assert np.allclose(metric_rhs(np.eye(2), h), 0)


@pytest.mark.parametrize("r", [0.0, 0.5, -0.3, 0.9])
def test_toy_metric_unbroken_closed_form(r):
    # independent check: G = (1/cos a) [[1, -i sin a], [i sin a, 1]] with sin a = r
    s = solve_biorthogonal(toy_hamiltonian(r))
    for t in T_GRID:
        assert np.allclose(evolve_metric(s, t).g, toy_metric_exact(r, t).g, atol=1e-10)
    g = toy_metric_exact(r).g
    assert np.allclose(g, np.array([[1, -1j * r], [1j * r, 1]]) / np.sqrt(1 - r * r))


@pytest.mark.parametrize("r", [2.0, 1.5, -1.5, -2.0])
def test_toy_metric_broken_closed_form(r):
    s = solve_biorthogonal(toy_hamiltonian(r))
    for t in T_GRID:
        ref = toy_metric_exact(r, t).g
        assert np.allclose(evolve_metric(s, t).g, ref, rtol=1e-10, atol=1e-10 * np.abs(ref).max())
        d = np.linalg.det(ref)
        assert abs(d - 1) < 1e-9 * abs(ref[0, 0] * ref[1, 1])


def test_ill_conditioned_metric_is_rejected():
    # det G = 1 while the entries grow like exp(2 sqrt(r^2 - 1) t); by r = 3,
    # t = 2.7 the condition number is past what double precision can certify
    with pytest.raises(NotNormalized):
        toy_metric_exact(3.0, 2.7)


def test_toy_metric_at_ep():
    with pytest.raises(AtExceptionalPoint):
        toy_metric_exact(1.0)


def test_metric_operator_validation():
    with pytest.raises(NotNormalized):
        MetricOperator(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(NotNormalized):
        MetricOperator(np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        MetricOperator(np.eye(2), "guess")
    with pytest.raises(DimensionMismatch):
        metric_inner(np.eye(2), np.ones(3), np.ones(3))
    with pytest.raises(DimensionMismatch):
        eom_residual(np.eye(2), np.eye(3), np.eye(2))


def test_toy_closed_form_metric_obeys_eom():
    h = toy_hamiltonian(2.0)
    g = lambda t: toy_metric_exact(2.0, t).g
    for t in T_GRID:
        assert eom_residual(g(t), central_difference(g, t), h) <= 1e-7


def test_degenerate_input_is_flagged():
    p = np.array([[1, 0.3, 0], [0.2, 1, 0.5j], [0, 0.1, 1]])
    h = p @ np.diag([1.0, 1.0, 2.0]) @ np.linalg.inv(p)
    s = solve_biorthogonal(h)
    assert s.biorthonormality_error() < 1e-12
    g = build_metric(s)
    assert g.degenerate == ((0, 1),)
    assert evolve_metric(s, 0.5).degenerate == ((0, 1),)
    assert build_metric(solve_biorthogonal(np.diag([1.0, 2.0]))).degenerate == ()
