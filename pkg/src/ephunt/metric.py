"""Hilbert-space metric operators for non-Hermitian dynamics.

The metric ``G`` must be Hermitian positive-definite and obey
``dG/dt = i (G H - H^H G)``.  Away from exceptional points it can be built
from the left eigenvectors, ``G = sum_i |L_i><L_i|``, and evolved in closed
form because each left projector only picks up the factor
``exp(-2 Im(E_i) t)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .biortho import BiorthogonalSystem
from .errors import DimensionMismatch, NotNormalized
from .linalg import as_matrix

PROVENANCES = ("gauge", "evolved", "closed-form-toy")


@dataclass(frozen=True)
class MetricOperator:
    """``degenerate`` lists eigenvalue groups whose basis, and so this ``g``, was an arbitrary pick."""

    g: np.ndarray
    provenance: str = "gauge"
    degenerate: tuple = ()

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        g = as_matrix(self.g)
        scale = np.linalg.norm(g)
        if np.linalg.norm(g - g.conj().T) > 1e-10 * scale:
            raise NotNormalized("metric is not Hermitian")
        object.__setattr__(self, "g", 0.5 * (g + g.conj().T))
        if not is_positive_definite(self.g):
            raise NotNormalized("metric is not positive-definite")

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    def inner(self, psi, phi) -> complex:
        return metric_inner(self, psi, phi)


def is_positive_definite(g, rel_floor: float = 1e-12) -> bool:
    g = np.asarray(g, dtype=complex)
    herm = 0.5 * (g + g.conj().T)
    lowest = np.linalg.eigvalsh(herm)[0]
    return bool(lowest > rel_floor * np.linalg.norm(herm, 2))


def _left_weights(sys: BiorthogonalSystem, t: float) -> np.ndarray:
    return np.exp(-2.0 * sys.values.imag * t)


def build_metric(sys: BiorthogonalSystem) -> MetricOperator:
    w = sys.lefts
    return MetricOperator(w.conj().T @ w, "gauge", sys.degenerate_groups)


def evolve_metric(sys: BiorthogonalSystem, t: float) -> MetricOperator:
    """``G(t) = sum_i exp(-2 Im(E_i) t) |L_i><L_i|`` for time-independent ``H``."""
    if t == 0:
        return build_metric(sys)
    w = sys.lefts
    g = (w.conj().T * _left_weights(sys, t)) @ w
    return MetricOperator(g, "evolved", sys.degenerate_groups)


def metric_rhs(g, h) -> np.ndarray:
    """Right-hand side ``i (G H - H^H G)`` of the metric equation of motion."""
    g = np.asarray(g, dtype=complex)
    h = np.asarray(h, dtype=complex)
    return 1j * (g @ h - h.conj().T @ g)


def eom_residual(g, dg_dt, h) -> float:
    """Relative Frobenius residual of the metric equation of motion."""
    gm = g.g if isinstance(g, MetricOperator) else np.asarray(g, dtype=complex)
    dg = np.asarray(dg_dt, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if not (gm.shape == dg.shape == h.shape):
        raise DimensionMismatch(f"shapes {gm.shape}, {dg.shape}, {h.shape} differ")
    return float(np.linalg.norm(dg - metric_rhs(gm, h)) / max(np.linalg.norm(gm), 1.0))


def central_difference(fn, t: float, step: float = 1e-5) -> np.ndarray:
    """Centered derivative of a matrix-valued function of time."""
    return (np.asarray(fn(t + step)) - np.asarray(fn(t - step))) / (2.0 * step)


def rk4_evolve_metric(g0, h, t: float, step: float = 1e-3) -> np.ndarray:
    """Integrate the metric equation of motion with fixed-step RK4.

    Used only as an independent cross-check of :func:`evolve_metric`; the
    final partial step is shortened so the endpoint is hit exactly.
    """
    g = np.array(g0.g if isinstance(g0, MetricOperator) else g0, dtype=complex)
    h = np.asarray(h, dtype=complex)
    n_steps = int(np.ceil(abs(t) / step - 1e-12))
    if n_steps == 0:
        return g
    dt = t / n_steps
    for _ in range(n_steps):
        k1 = metric_rhs(g, h)
        k2 = metric_rhs(g + 0.5 * dt * k1, h)
        k3 = metric_rhs(g + 0.5 * dt * k2, h)
        k4 = metric_rhs(g + dt * k3, h)
        g = g + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return g


def metric_inner(g, psi, phi) -> complex:
    """``<psi| G |phi>``."""
    gm = g.g if isinstance(g, MetricOperator) else np.asarray(g, dtype=complex)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    phi = np.asarray(phi, dtype=complex).reshape(-1)
    if not (psi.shape[0] == phi.shape[0] == gm.shape[0]):
        raise DimensionMismatch("vector and metric dimensions differ")
    return complex(psi.conj() @ gm @ phi)
