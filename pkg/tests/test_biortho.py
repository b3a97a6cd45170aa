import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ephunt.biortho import (
    NEAR_EP,
    biorthogonalize,
    match_states,
    rigidity,
    solve_biorthogonal,
)
from ephunt.errors import AmbiguousMatching, AtExceptionalPoint, DimensionMismatch, ZeroVector
from ephunt.linalg import RawEigenSystem, eig_general
from ephunt.models import toy_hamiltonian
from ephunt.verify import random_diagonalizable

from conftest import complex_matrix


def test_biorthonormal_and_complete(random_set):
    for h in random_set:
        s = solve_biorthogonal(h)
        assert s.biorthonormality_error() < 1e-10
        assert s.completeness_error() < 1e-9
        for i in range(s.dim):
            assert np.allclose(h @ s.right(i), s.values[i] * s.right(i), atol=1e-10)
            assert np.allclose(s.left(i) @ h, s.values[i] * s.left(i), atol=1e-10)


def test_lefts_are_inverse_of_rights(random_set):
    s = solve_biorthogonal(random_set[0])
    assert np.allclose(s.lefts, np.linalg.inv(s.rights), atol=1e-10)


def test_balanced_norms_and_anchor_phase(random_set):
    s = solve_biorthogonal(random_set[1])
    for i in range(s.dim):
        r, l = s.right(i), s.left(i)
        assert np.linalg.norm(r) == pytest.approx(np.linalg.norm(l), rel=1e-12)
        j = int(np.argmax(np.abs(r)))
        assert abs(r[j].imag) < 1e-12 * abs(r[j]) and r[j].real > 0


def test_hermitian_reduction(rng):
    a = complex_matrix(rng, 5)
    s = solve_biorthogonal(a + a.conj().T)
    assert np.allclose(s.lefts, s.rights.conj().T, atol=1e-10)
    assert np.allclose(s.rigidity, 1.0, atol=1e-12)
    assert not s.near_ep


def test_toy_rigidity_matches_closed_form():
    # for H(r) the rigidity of both states is sqrt(1 - r^2) in the unbroken region
    for r in (0.0, 0.3, 0.8, 0.99):
        s = solve_biorthogonal(toy_hamiltonian(r))
        assert np.allclose(s.rigidity, np.sqrt(1 - r * r), atol=1e-10)


def test_toy_exceptional_point_raises():
    with pytest.raises(AtExceptionalPoint):
        solve_biorthogonal(toy_hamiltonian(1.0))
    with pytest.raises(AtExceptionalPoint):
        solve_biorthogonal(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_near_ep_flag():
    s = solve_biorthogonal(toy_hamiltonian(0.999))
    assert s.min_rigidity < NEAR_EP and s.near_ep


def test_rigidity_of_zero_vector():
    with pytest.raises(ZeroVector):
        rigidity(np.zeros(2), np.ones(2))


def test_biorthogonalize_accepts_raw_system():
    raw = eig_general(np.diag([1.0, 2.0 + 1j]))
    s = biorthogonalize(raw)
    assert np.allclose(s.values, [1.0, 2.0 + 1j])
    with pytest.raises(AtExceptionalPoint):
        biorthogonalize(RawEigenSystem(np.array([1.0, 1.0 + 0j]), np.array([[1, 1], [0, 1e-20]], dtype=complex),
                                       np.array([True, True])))


def test_match_states_follows_a_small_step(rng):
    h = random_diagonalizable(rng)
    d = complex_matrix(rng, 4)
    a, b = solve_biorthogonal(h), solve_biorthogonal(h + 1e-4 * d)
    m = match_states(a, b)
    assert sorted(m.permutation) == [0, 1, 2, 3]
    for i in range(4):
        assert abs(a.values[i] - b.values[m[i]]) < 1e-2
    assert not m.crossed_ep


def test_match_states_tracks_through_reordering():
    # two real levels that swap canonical order as lam grows
    def fam(lam):
        return np.array([[lam, 0.05], [0.05j, -lam]])
    a, b = solve_biorthogonal(fam(-0.5)), solve_biorthogonal(fam(0.5))
    m = match_states(a, b)
    # continuity is by eigenvector, not by sorted position
    assert m[0] == 1 and m[1] == 0


def test_match_states_ambiguous():
    # rotated eigenvectors overlap both old states equally, and the new values
    # +-i are equidistant from the old values +-1
    u = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    prev = solve_biorthogonal(np.diag([1.0, -1.0]))
    nxt = solve_biorthogonal(u @ np.diag([1j, -1j]) @ u)
    with pytest.raises(AmbiguousMatching):
        match_states(prev, nxt)


def test_match_states_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        match_states(solve_biorthogonal(np.eye(2) * [1, 2]), solve_biorthogonal(np.diag([1.0, 2.0, 3.0])))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1), st.floats(min_value=-3, max_value=3))
def test_gauge_rescaling_does_not_change_projectors(seed, log_scale):
    g = np.random.default_rng(seed)
    h = random_diagonalizable(g, 3)
    raw = eig_general(h)
    s1 = biorthogonalize(raw)
    c = np.exp(log_scale) * np.exp(1j * g.uniform(0, 2 * np.pi, 3))
    s2 = biorthogonalize(RawEigenSystem(raw.values, raw.right_vectors * c, raw.converged))
    for i in range(3):
        p1 = np.outer(s1.right(i), s1.left(i))
        p2 = np.outer(s2.right(i), s2.left(i))
        assert np.allclose(p1, p2, atol=1e-9)
        # the normalization convention fixes the gauge completely
        assert np.allclose(s1.right(i), s2.right(i), atol=1e-8)
