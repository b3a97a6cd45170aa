"""Built-in Hamiltonian families.

* ``H(r) = [[i r, 1], [1, -i r]]``, the two-level PT-symmetric toy with
  exceptional points at ``r = +-1``.
* The non-Hermitian SSH ring with gain/loss ``+-iu`` on the two sublattices,
  intra-cell hopping ``v`` and inter-cell hopping ``w``; available as the
  2N x 2N real-space matrix and as 2x2 Bloch blocks.

The SSH ground state fills the lower band ``eps_k^-`` at every momentum, so
its biorthogonal fidelity factorizes into a product over ``k`` and the
susceptibility density is the average of per-mode 2x2 susceptibilities.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AtExceptionalPoint, InvalidSpec
from .fidelity import DEFAULT_EPSILON, susceptibility_fd
from .metric import MetricOperator

_EP_DENOM_TOL = 1e-12


# --------------------------------------------------------------------------- toy


@dataclass(frozen=True)
class ToyParams:
    """Coupling ``r`` with the derived angle ``alpha`` (unbroken) and rate ``big_lambda`` (broken)."""

    r: float

    def __post_init__(self):
        if not np.isfinite(self.r):
            raise InvalidSpec(f"r must be finite, got {self.r}")

    @property
    def alpha(self) -> float:
        """``cos(alpha) = sqrt(1 - r^2)``; defined for ``|r| <= 1``."""
        return float(np.arcsin(self.r))

    @property
    def big_lambda(self) -> float:
        """``sqrt(r^2 - 1)``; defined for ``|r| >= 1``."""
        return float(np.sqrt(self.r * self.r - 1.0))


def toy_hamiltonian(r: float) -> np.ndarray:
    return np.array([[1j * r, 1.0], [1.0, -1j * r]], dtype=complex)


def toy_chi_exact(r: float) -> float:
    if abs(r) == 1.0:
        raise AtExceptionalPoint(f"r = {r} is an exceptional point")
    return -1.0 / (4.0 * (1.0 - r * r) ** 2)


def toy_metric_exact(r: float, t: float = 0.0) -> MetricOperator:
    """Closed-form metric: static for ``|r| < 1``, time dependent for ``|r| > 1``.

    The broken-region expression is written for ``r > 1``; ``r < -1`` follows
    from ``H(-r) = conj(H(r))``.
    """
    if abs(r) == 1.0:
        raise AtExceptionalPoint(f"r = {r} is an exceptional point")
    if abs(r) < 1.0:
        cos_a = np.sqrt(1.0 - r * r)
        g = np.array([[1.0, -1j * r], [1j * r, 1.0]]) / cos_a
        return MetricOperator(g, "closed-form-toy")
    if r < 0:
        # H(-r) = conj(H(r)), so the metric is the time-reversed conjugate
        return MetricOperator(np.conj(toy_metric_exact(-r, -t).g), "closed-form-toy")
    lam = np.sqrt(r * r - 1.0)
    grow, decay = np.exp(2 * t * lam), np.exp(-2 * t * lam)
    g11 = (lam + r) * decay - (lam - r) * grow
    g22 = (lam + r) * grow - (lam - r) * decay
    g12 = -1j * (grow + decay)
    g = np.array([[g11, g12], [-g12, g22]]) / (2.0 * lam)
    return MetricOperator(g, "closed-form-toy")


@dataclass(frozen=True)
class ToyModel:
    """The 2x2 toy as a one-parameter family in ``r``."""

    name = "toy"
    parameter = "r"

    def hamiltonian(self, r: float) -> np.ndarray:
        return toy_hamiltonian(r)

    __call__ = hamiltonian

    def chi_exact(self, r: float) -> float:
        return toy_chi_exact(r)

    def discriminants(self, r: float) -> np.ndarray:
        # (E+ - E-)^2 / 4 = 1 - r^2, negative in the broken region
        return np.array([1.0 - r * r])

    def min_gap(self, r: float) -> float:
        return float(2.0 * np.sqrt(abs(1.0 - r * r)))


# --------------------------------------------------------------------------- SSH


@dataclass(frozen=True)
class SshParams:
    u: float
    v: float
    w: float
    n_cells: int

    def __post_init__(self):
        if self.u < 0:
            raise InvalidSpec(f"gain/loss u must be >= 0, got {self.u}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise InvalidSpec(f"n_cells must be an integer >= 2, got {self.n_cells}")


@dataclass(frozen=True)
class BlochBlock:
    k: float
    xi_k: complex
    block: np.ndarray
    bands: tuple[complex, complex]


def ssh_momenta(n_cells: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n_cells) / n_cells


def bloch_matrix(u: float, v: float, w: float, k: float) -> np.ndarray:
    xi = v + w * np.exp(1j * k)
    return np.array([[1j * u, xi], [np.conj(xi), -1j * u]], dtype=complex)


def ssh_bloch(p: SshParams, k: float) -> BlochBlock:
    xi = complex(p.v + p.w * np.exp(1j * k))
    eps = np.sqrt(complex(abs(xi) ** 2 - p.u**2))
    return BlochBlock(k=k, xi_k=xi, block=bloch_matrix(p.u, p.v, p.w, k), bands=(eps, -eps))


def ssh_realspace(p: SshParams) -> np.ndarray:
    """Single-particle 2N x 2N matrix, sites ordered (1 up, 1 down, 2 up, ...)."""
    n = p.n_cells
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    up = 2 * np.arange(n)
    down = up + 1
    h[up, up] = 1j * p.u
    h[down, down] = -1j * p.u
    h[up, down] += p.v
    h[down, up] += p.v
    nxt = (up + 2) % (2 * n)
    h[down, nxt] += p.w
    h[nxt, down] += p.w
    return h


def ssh_discriminants(u: float, v: float, w: float, n_cells: int) -> np.ndarray:
    """``|xi_k|^2 - u^2`` on the momentum grid; zero marks a band coalescence."""
    k = ssh_momenta(n_cells)
    return v * v + w * w + 2.0 * v * w * np.cos(k) - u * u


def ssh_chi0_summand(u, v, w, k):
    """Per-mode lower-band susceptibility; broadcasts over array arguments."""
    denom = v * v + w * w + 2.0 * v * w * np.cos(k) - u * u
    return (v * v * np.sin(k) ** 2 - u * u) / (4.0 * denom**2)


def ssh_chi0_density(p: SshParams) -> float:
    """Ground-state fidelity susceptibility density for a ``w`` displacement."""
    k = ssh_momenta(p.n_cells)
    denom = ssh_discriminants(p.u, p.v, p.w, p.n_cells)
    bad = np.abs(denom) <= _EP_DENOM_TOL
    if np.any(bad):
        kk = k[np.argmax(bad)]
        raise AtExceptionalPoint(f"band coalescence at k = {kk:.12g} (w = {p.w})")
    return float(np.sum(ssh_chi0_summand(p.u, p.v, p.w, k)) / p.n_cells)


def ssh_rigidity(u: float, v: float, w: float, n_cells: int) -> float:
    """Smallest lower-band phase rigidity over the momentum grid.

    For the block ``[[iu, xi], [xi*, -iu]]`` and eigenvalue ``e`` the left and
    right vectors are ``(xi*, e - iu)`` and ``(xi, e - iu)``, which gives
    ``2 |e| |e - iu| / (|xi|^2 + |e - iu|^2)``.
    """
    k = ssh_momenta(n_cells)
    xi2 = v * v + w * w + 2.0 * v * w * np.cos(k)
    e = -np.sqrt((xi2 - u * u).astype(complex))
    shifted = np.abs(e - 1j * u) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        rig = 2.0 * np.abs(e) * np.sqrt(shifted) / (xi2 + shifted)
    rig = np.where(xi2 + shifted == 0.0, 0.0, rig)
    return float(np.min(rig))


def ssh_chi0_fd(
    p: SshParams,
    epsilon: float = DEFAULT_EPSILON,
    richardson: bool = True,
) -> complex:
    """Susceptibility density by finite differences on each Bloch block.

    Independent of the closed form: every ``k`` goes through the generic
    eigensolve / biorthogonalize / fidelity pipeline for the lower band.
    """
    return SshGroundState(p.u, p.v, p.w, p.n_cells).chi_fd(p.w, epsilon, richardson)


@dataclass(frozen=True)
class SshEP:
    k: float
    w: float
    multiplicity: int


def ssh_ep_locations(u: float, v: float, n_cells: int) -> list[SshEP]:
    """Positive ``w`` at which some grid momentum has ``|xi_k| = u``.

    Roots of ``w^2 + 2 v cos(k) w + v^2 - u^2 = 0``; momenta ``k`` and
    ``2 pi - k`` give the same root and are merged into one entry with
    multiplicity 2.
    """
    if u <= 0:
        raise InvalidSpec("EP locations need u > 0")
    out: dict[tuple[int, int], SshEP] = {}
    for m, k in enumerate(ssh_momenta(n_cells)):
        disc = u * u - v * v * np.sin(k) ** 2
        if disc < 0:
            continue
        root = np.sqrt(disc)
        for sign in (1.0, -1.0):
            w = -v * np.cos(k) + sign * root
            if w <= 0:
                continue
            key = (min(m, (n_cells - m) % n_cells), int(sign))
            if key in out:
                prev = out[key]
                out[key] = SshEP(prev.k, prev.w, prev.multiplicity + 1)
            else:
                out[key] = SshEP(float(k), float(w), 1)
            if disc == 0:
                break
    return sorted(out.values(), key=lambda e: e.w)


def ssh_phase(u: float, v: float, w: float) -> str:
    """Thermodynamic-limit region of the ``(u, v, w)`` parameter space."""
    if w > v + u:
        return "pt-symmetric-topological"
    if w < v - u:
        return "pt-symmetric-trivial"
    if v - u < w < v + u:
        return "pt-broken"
    return "boundary"


@dataclass(frozen=True)
class SshGroundState:
    """The SSH half-filled ground state as a one-parameter family.

    ``parameter`` selects which of ``u``, ``v``, ``w`` is swept; the others
    are held at the stored values.  Only the ``w`` susceptibility has the
    closed form; the others go through :meth:`chi_fd`.
    """

    u: float
    v: float
    w: float
    n_cells: int
    parameter: str = "w"
    name = "ssh"

    def __post_init__(self):
        if self.parameter not in ("u", "v", "w"):
            raise InvalidSpec(f"cannot sweep SSH parameter {self.parameter!r}")
        SshParams(self.u, self.v, self.w, self.n_cells)

    def params(self, lam: float) -> SshParams:
        vals = {"u": self.u, "v": self.v, "w": self.w, self.parameter: lam}
        return SshParams(vals["u"], vals["v"], vals["w"], self.n_cells)

    def hamiltonian(self, lam: float) -> np.ndarray:
        return ssh_realspace(self.params(lam))

    __call__ = hamiltonian

    def chi_exact(self, lam: float) -> float:
        if self.parameter != "w":
            raise NotImplementedError("closed form exists only for w sweeps")
        return ssh_chi0_density(self.params(lam))

    def chi_fd(self, lam: float, epsilon: float = DEFAULT_EPSILON, richardson: bool = True):
        p = self.params(lam)
        total = 0.0 + 0.0j
        for k in ssh_momenta(self.n_cells):
            def family(x, k=k):
                q = self.params(x)
                return bloch_matrix(q.u, q.v, q.w, k)
            total += susceptibility_fd(family, lam, 0, epsilon, richardson).chi
        return total / p.n_cells

    def rigidity(self, lam: float) -> float:
        p = self.params(lam)
        return ssh_rigidity(p.u, p.v, p.w, p.n_cells)

    def discriminants(self, lam: float) -> np.ndarray:
        p = self.params(lam)
        return ssh_discriminants(p.u, p.v, p.w, p.n_cells)

    def min_gap(self, lam: float) -> float:
        return float(2.0 * np.sqrt(np.min(np.abs(self.discriminants(lam)))))
