"""Self-check suite run by ``ephunt verify``.

Every check is deterministic given the seed.  ``perturb_metric`` adds
``delta * I`` to each evolved metric before the equation-of-motion check; it
exists to prove that the check can fail.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .biortho import solve_biorthogonal
from .fidelity import fidelity_biortho, fidelity_metric, fidelity_time_invariance_check, susceptibility_fd
from .linalg import canonical_order, eig_general
from .metric import (
    build_metric,
    central_difference,
    eom_residual,
    evolve_metric,
    is_positive_definite,
    metric_inner,
    rk4_evolve_metric,
)
from .models import (
    SshParams,
    bloch_matrix,
    ssh_chi0_density,
    ssh_chi0_summand,
    ssh_momenta,
    ssh_realspace,
    toy_chi_exact,
    toy_hamiltonian,
    toy_metric_exact,
)

T_GRID = (0.0, 0.3, 1.0, 2.7)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<40s} {self.value:10.3e}  (tol {self.tolerance:.0e})"


def random_diagonalizable(rng: np.random.Generator, n: int = 4, min_rigidity: float = 1e-3) -> np.ndarray:
    """Random complex matrix whose eigenvectors are not close to coalescing."""
    while True:
        h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        try:
            if solve_biorthogonal(h).min_rigidity > min_rigidity:
                return h
        except Exception:
            continue


def random_hermitian(rng: np.random.Generator, n: int = 4) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


def _matrix_set(rng) -> list[np.ndarray]:
    return [toy_hamiltonian(0.5), toy_hamiltonian(2.0)] + [random_diagonalizable(rng) for _ in range(3)]


def _check(name: str, value: float, tol: float) -> CheckResult:
    return CheckResult(name, bool(value <= tol), float(value), tol)


def _max(fn: Callable, items) -> float:
    return max(float(fn(x)) for x in items)


def run_checks(seed: int = 0, perturb_metric: float = 0.0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    mats = _matrix_set(rng)
    systems = [solve_biorthogonal(h) for h in mats]
    out: list[CheckResult] = []

    out.append(_check("biorthonormality", _max(lambda s: s.biorthonormality_error(), systems), 1e-10))
    out.append(_check("completeness", _max(lambda s: s.completeness_error(), systems), 1e-9))

    herm = [solve_biorthogonal(random_hermitian(rng)) for _ in range(3)]
    out.append(_check(
        "hermitian reduction",
        _max(lambda s: max(np.max(np.abs(s.lefts - s.rights.conj().T)), np.max(np.abs(s.rigidity - 1))), herm),
        1e-10,
    ))

    def eig_trace(h):
        return abs(np.sum(eig_general(h).values) - np.trace(h)) / np.linalg.norm(h, 2)
    out.append(_check("eigenvalue trace identity", _max(eig_trace, mats), 1e-9))

    def similarity(h):
        p = np.eye(4) + 0.3 * (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        a = eig_general(h).values
        b = eig_general(np.linalg.solve(p, h @ p)).values
        return np.max(np.abs(a - b))
    out.append(_check("similarity invariance", _max(similarity, mats[2:]), 1e-8))

    def gorth(s):
        g = build_metric(s)
        gram = np.array([[metric_inner(g, s.right(i), s.right(j)) for j in range(s.dim)] for i in range(s.dim)])
        return np.max(np.abs(gram - np.eye(s.dim)))
    out.append(_check("metric G-orthonormality", _max(gorth, systems), 1e-10))

    toy_gauge = max(
        np.max(np.abs(evolve_metric(solve_biorthogonal(toy_hamiltonian(r)), t).g - toy_metric_exact(r, t).g))
        for r in (0.5, -0.3, 2.0, -1.5) for t in T_GRID
    )
    out.append(_check("metric closed form (toy)", toy_gauge, 1e-10))

    def det_dev(t):
        g = toy_metric_exact(2.0, t).g
        # the entries grow like exp(2 sqrt(3) t), so measure against the cancelling product
        return abs(g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0] - 1.0) / max(1.0, abs(g[0, 0] * g[1, 1]))
    out.append(_check("metric determinant (toy, broken)", _max(det_dev, T_GRID), 1e-9))

    shift = perturb_metric * np.eye(4)

    def eom(pair):
        h, s = pair
        def g_of(t):
            return evolve_metric(s, t).g + shift[: s.dim, : s.dim]
        return max(eom_residual(g_of(t), central_difference(g_of, t), h) for t in T_GRID)
    out.append(_check("metric equation of motion", _max(eom, zip(mats, systems)), 1e-6))

    def positive(pair):
        _, s = pair
        return 0.0 if all(is_positive_definite(evolve_metric(s, t).g) for t in T_GRID) else 1.0
    out.append(_check("metric positivity along evolution", _max(positive, zip(mats, systems)), 0.0))

    def rk4(pair):
        h, s = pair
        g0 = build_metric(s).g
        return max(
            np.linalg.norm(rk4_evolve_metric(g0, h, t) - evolve_metric(s, t).g) / np.linalg.norm(evolve_metric(s, t).g)
            for t in (0.3, 1.0)
        )
    out.append(_check("metric RK4 cross-check", _max(rk4, zip(mats, systems)), 1e-8))

    families = [lambda x: toy_hamiltonian(x)] + [
        (lambda h, d: (lambda x: h + x * d))(h, rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        for h in mats[2:]
    ]
    lam0 = [0.5, 0.0, 0.0, 0.0]

    def forms(i):
        fam, lam = families[i], lam0[i]
        s1, s2 = solve_biorthogonal(fam(lam)), solve_biorthogonal(fam(lam + 1e-3))
        a = fidelity_biortho(s1.left(0), s1.right(0), s2.left(0), s2.right(0)).f
        b = fidelity_metric(s1.right(0), build_metric(s1), s2.right(0), build_metric(s2)).f
        return abs(a - b)
    out.append(_check("metric vs biorthogonal fidelity", _max(forms, range(len(families))), 1e-10))

    inv = max(
        [fidelity_time_invariance_check(toy_hamiltonian, r, 1e-3, (0, 0.5, 1, 2), relative=True) for r in (0.5, 2.0)]
        + [fidelity_time_invariance_check(families[i], 0.0, 1e-3, (0, 0.5, 1, 2), relative=True) for i in (1, 2, 3)]
    )
    out.append(_check("fidelity time invariance", inv, 1e-6))

    toy = max(
        abs(susceptibility_fd(toy_hamiltonian, r, epsilon=1e-5).re_chi / toy_chi_exact(r) - 1)
        for r in (0.0, 0.3, -0.3, 0.7, -0.7, 0.95, -0.95, 1.5, -1.5, 3.0, -3.0)
    )
    out.append(_check("toy susceptibility vs closed form", toy, 1e-6))

    def summand(_):
        while True:
            u, v, w, k = rng.uniform(0, 0.5), rng.uniform(0.5, 1.5), rng.uniform(0.2, 1.8), rng.uniform(0, 2 * np.pi)
            exact = ssh_chi0_summand(u, v, w, k)
            # stay away from coalescence and from numerators that vanish
            if abs(v * v + w * w + 2 * v * w * np.cos(k) - u * u) > 0.05 and abs(exact) > 1e-3:
                break
        fd = susceptibility_fd(lambda x: bloch_matrix(u, v, x, k), w).chi
        return abs(fd / exact - 1)
    out.append(_check("SSH per-mode summand", _max(summand, range(20)), 1e-6))

    law = max(abs(ssh_chi0_density(SshParams(0, 1, 1, n)) / ((n - 1) / 16) - 1) for n in (11, 51, 101, 301))
    out.append(_check("SSH Hermitian scaling law", law, 1e-12))

    def bloch(n):
        u, v, w = rng.uniform(0, 0.5), rng.uniform(0.5, 1.5), rng.uniform(0.2, 1.8)
        p = SshParams(u, v, w, n)
        e = eig_general(ssh_realspace(p)).values
        k = ssh_momenta(n)
        band = np.sqrt((v * v + w * w + 2 * v * w * np.cos(k) - u * u).astype(complex))
        ref = np.concatenate([band, -band])
        return multiset_distance(e, ref)
    out.append(_check("real-space vs Bloch spectrum", _max(bloch, range(2, 9)), 1e-9))
    return out


def multiset_distance(a, b) -> float:
    """Largest pairwise distance after matching two eigenvalue multisets greedily."""
    a = list(np.asarray(a, dtype=complex)[canonical_order(np.asarray(a))])
    b = list(np.asarray(b, dtype=complex))
    if len(a) != len(b):
        return float("inf")
    worst = 0.0
    for x in a:
        j = int(np.argmin([abs(x - y) for y in b]))
        worst = max(worst, abs(x - b.pop(j)))
    return worst


def format_report(results: list[CheckResult]) -> str:
    lines = [r.line() for r in results]
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    return "\n".join(lines)
