"""Generalized fidelity and fidelity susceptibility.

A Hamiltonian family is any callable ``lam -> H(lam)``.  The fidelity between
the tracked eigenstate at ``lam`` and at ``lam + eps`` is

    F = <L(lam)|R(lam+eps)> <L(lam+eps)|R(lam)>

which equals the metric form ``<<R|R'>> <<R'|R>>`` when the metrics are built
from the left eigenvectors.  The susceptibility estimate is ``(1 - F)/eps**2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .biortho import BiorthogonalSystem, match_states, solve_biorthogonal
from .errors import NotBiorthonormal, NotNormalized, StepTooLarge
from .linalg import expm_action
from .metric import MetricOperator, evolve_metric, metric_inner

Family = Callable[[float], np.ndarray]

DEFAULT_EPSILON = 1e-4
_NORM_TOL = 1e-10


@dataclass(frozen=True)
class FidelityResult:
    f: complex
    form: str
    epsilon: float | None = None

    @property
    def geometric_phase_change(self) -> bool:
        """``|F| > 1`` can only come from the metric changing between the two points."""
        return abs(self.f) > 1.0


@dataclass(frozen=True)
class SusceptibilityResult:
    chi: complex
    epsilon_used: float
    richardson: bool
    f: complex = complex("nan")
    rigidity: float = float("nan")
    components: tuple = field(default=(), repr=False)

    @property
    def re_chi(self) -> float:
        return self.chi.real


def _norm_scale(g: MetricOperator, psi) -> float:
    # <psi|G|psi> is a cancelling sum of terms as large as ||G|| ||psi||^2
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return max(1.0, np.linalg.norm(g.g, 2) * np.vdot(psi, psi).real)


def fidelity_metric(psi1, g1: MetricOperator, psi2, g2: MetricOperator, epsilon=None) -> FidelityResult:
    for psi, g in ((psi1, g1), (psi2, g2)):
        n = metric_inner(g, psi, psi)
        if abs(n - 1.0) > _NORM_TOL * _norm_scale(g, psi):
            raise NotNormalized(f"<psi|G|psi> = {n:.12g}, expected 1")
    f = metric_inner(g1, psi1, psi2) * metric_inner(g2, psi2, psi1)
    return FidelityResult(f, "metric", epsilon)


def _bra(x) -> np.ndarray:
    return np.asarray(x, dtype=complex).reshape(-1)


def fidelity_biortho(l1, r1, l2, r2, epsilon=None) -> FidelityResult:
    """``<l1|r2><l2|r1>``; ``l1`` and ``l2`` are bras (row vectors)."""
    l1, r1, l2, r2 = map(_bra, (l1, r1, l2, r2))
    for l, r in ((l1, r1), (l2, r2)):
        if abs(l @ r - 1.0) > _NORM_TOL:
            raise NotBiorthonormal(f"<l|r> = {l @ r:.12g}, expected 1")
    return FidelityResult(complex((l1 @ r2) * (l2 @ r1)), "biorthogonal", epsilon)


def fidelity_deficit(l1, r1, l2, r2) -> complex:
    """``1 - F`` without the catastrophic cancellation of forming ``F`` first.

    The second pair is first rotated into the gauge where ``<l1|r2> = <l1|r1>``.
    With ``dR = r2 - r1`` and ``dL = l2 - l1`` the deficit is then
    ``(n1 <dL|dR> - <l1|dR><dL|r1>) / (n1 n2)``, a combination of products of
    O(eps) differences, so the relative error stays near machine precision
    even when ``1 - F`` is ~1e-11.  Normalizations ``n_k = <l_k|r_k>`` are
    divided out rather than assumed.
    """
    l1, r1, l2, r2 = map(_bra, (l1, r1, l2, r2))
    n1 = l1 @ r1
    a = l1 @ r2
    if abs(a) < 1e-3 * abs(n1):
        return complex(1.0 - (a * (l2 @ r1)) / (n1 * (l2 @ r2)))
    c = n1 / a
    r2 = r2 * c
    l2 = l2 / c
    n2 = l2 @ r2
    dr = r2 - r1
    dl = l2 - l1
    return complex((n1 * (dl @ dr) - (l1 @ dr) * (dl @ r1)) / (n1 * n2))


def _follow(sys0: BiorthogonalSystem, band: int, family: Family, lam: float):
    sys1 = solve_biorthogonal(family(lam))
    return sys1, match_states(sys0, sys1)[band]


def _one_sided(family: Family, lam: float, band: int, eps: float, sys0: BiorthogonalSystem):
    sys1, j = _follow(sys0, band, family, lam + eps)
    d = fidelity_deficit(sys0.left(band), sys0.right(band), sys1.left(j), sys1.right(j))
    if abs(d) > 0.5:
        raise StepTooLarge(f"|1 - F| = {abs(d):.3g} at eps = {eps:g}")
    return d / eps**2, 1.0 - d, float(sys1.rigidity[j])


def _symmetric(family: Family, lam: float, band: int, eps: float, sys0: BiorthogonalSystem):
    lo, jl = _follow(sys0, band, family, lam - eps)
    hi, jh = _follow(sys0, band, family, lam + eps)
    d = fidelity_deficit(lo.left(jl), lo.right(jl), hi.left(jh), hi.right(jh))
    if abs(d) > 0.5:
        raise StepTooLarge(f"|1 - F| = {abs(d):.3g} at eps = {eps:g}")
    return d / (2.0 * eps) ** 2, 1.0 - d, float(min(lo.rigidity[jl], hi.rigidity[jh]))


def susceptibility_fd(
    family: Family,
    lam: float,
    band: int = 0,
    epsilon: float = DEFAULT_EPSILON,
    richardson: bool = True,
    symmetric: bool = False,
    system: BiorthogonalSystem | None = None,
) -> SusceptibilityResult:
    """Finite-difference fidelity susceptibility of eigenstate ``band`` at ``lam``.

    ``band`` indexes the canonical eigenvalue order at ``lam``; the state is
    followed to the displaced point by overlap matching.  With ``richardson``
    the estimates at ``eps`` and ``eps/2`` are combined as
    ``2 chi(eps/2) - chi(eps)``, which removes the O(eps) bias left by the
    third-order term of the fidelity.  The ``symmetric`` stencil
    ``F(lam - eps, lam + eps)`` is even in ``eps``, so its bias starts at
    O(eps^2) and the combination becomes ``(4 chi(eps/2) - chi(eps)) / 3``.
    Raises ``AtExceptionalPoint`` when any evaluated point is (numerically)
    an exceptional point.
    """
    sys0 = system if system is not None else solve_biorthogonal(family(lam))
    step = _symmetric if symmetric else _one_sided
    chi, f, rig = step(family, lam, band, epsilon, sys0)
    rig = min(rig, float(sys0.rigidity[band]))
    if not richardson:
        return SusceptibilityResult(complex(chi), epsilon, False, complex(f), rig, (chi,))
    chi_half, _, rig_half = step(family, lam, band, 0.5 * epsilon, sys0)
    combined = (4.0 * chi_half - chi) / 3.0 if symmetric else 2.0 * chi_half - chi
    return SusceptibilityResult(
        complex(combined), epsilon, True, complex(f), min(rig, rig_half), (chi, chi_half)
    )


def fidelity_at_time(sys1: BiorthogonalSystem, i: int, h1, sys2: BiorthogonalSystem, j: int, h2, t: float) -> complex:
    """Metric-form fidelity after evolving both states and both metrics to time ``t``."""
    psi1 = expm_action(h1, t, sys1.right(i))
    psi2 = expm_action(h2, t, sys2.right(j))
    g1 = evolve_metric(sys1, t)
    g2 = evolve_metric(sys2, t)
    return fidelity_metric(psi1, g1, psi2, g2).f


def fidelity_time_invariance_check(
    family: Family,
    lam: float,
    epsilon: float,
    t_grid: Sequence[float],
    band: int = 0,
    relative: bool = False,
) -> float:
    """``max_t |F(t) - F(0)|`` (divided by ``|F(0)|`` when ``relative``)."""
    h1, h2 = family(lam), family(lam + epsilon)
    sys1 = solve_biorthogonal(h1)
    sys2 = solve_biorthogonal(h2)
    j = match_states(sys1, sys2)[band]
    f0 = fidelity_at_time(sys1, band, h1, sys2, j, h2, 0.0)
    dev = max(abs(fidelity_at_time(sys1, band, h1, sys2, j, h2, t) - f0) for t in t_grid)
    return dev / abs(f0) if relative else dev
