"""Biorthonormal left/right eigenpairs, phase rigidity and state tracking."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbiguousMatching,
    AtExceptionalPoint,
    DimensionMismatch,
    NoConvergence,
    SingularMatrix,
    ZeroVector,
)
from .linalg import TOL_EIG, RawEigenSystem, eig_general, lu_solve

TOL_EP = 1e-8
NEAR_EP = 1e-1
_TIE = 1e-12


@dataclass(frozen=True)
class BiorthogonalSystem:
    """Eigenvalues with paired right kets (columns) and left bras (rows).

    ``lefts @ rights`` is the identity.  Each pair is scaled so that
    ``||R_i|| == ||L_i||``; this is the normalization under which the metric
    ``sum_i |L_i><L_i|`` reproduces the textbook closed forms for PT-symmetric
    models, and it reduces to unit vectors with ``L_i = R_i^H`` for Hermitian
    input.
    """

    values: np.ndarray
    rights: np.ndarray
    lefts: np.ndarray
    rigidity: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def right(self, i: int) -> np.ndarray:
        return self.rights[:, i]

    def left(self, i: int) -> np.ndarray:
        """The bra ``<L_i|`` as a row vector."""
        return self.lefts[i]

    @property
    def min_rigidity(self) -> float:
        return float(np.min(self.rigidity))

    @property
    def near_ep(self) -> bool:
        return self.min_rigidity < NEAR_EP

    @property
    def degenerate_groups(self) -> tuple[tuple[int, ...], ...]:
        """Index groups sharing an eigenvalue (to ``TOL_EIG`` relative).

        Inside such a group any invertible recombination is an equally valid
        eigenbasis, so quantities built from it (the metric in particular)
        reflect an arbitrary choice.
        """
        scale = max(1.0, float(np.max(np.abs(self.values))))
        groups, seen = [], set()
        for i in range(self.dim):
            if i in seen:
                continue
            g = tuple(j for j in range(i, self.dim) if abs(self.values[j] - self.values[i]) <= TOL_EIG * scale)
            seen.update(g)
            if len(g) > 1:
                groups.append(g)
        return tuple(groups)

    def biorthonormality_error(self) -> float:
        return float(np.max(np.abs(self.lefts @ self.rights - np.eye(self.dim))))

    def completeness_error(self) -> float:
        return float(np.max(np.abs(self.rights @ self.lefts - np.eye(self.dim))))


def rigidity(left, right) -> float:
    """Phase rigidity ``|<l|r>| / (||l|| ||r||)`` with ``left`` given as a bra row."""
    left = np.asarray(left, dtype=complex).reshape(-1)
    right = np.asarray(right, dtype=complex).reshape(-1)
    nl, nr = np.linalg.norm(left), np.linalg.norm(right)
    if nl == 0.0 or nr == 0.0:
        raise ZeroVector("rigidity of a zero vector is undefined")
    return float(min(abs(left @ right) / (nl * nr), 1.0))


def _anchor_index(r: np.ndarray) -> int:
    mags = np.abs(r)
    # first entry within a relative hair of the max, so near-ties do not flip between calls
    return int(np.flatnonzero(mags >= (1.0 - 1e-8) * mags.max())[0])


def biorthogonalize(raw: RawEigenSystem, tol_ep: float = TOL_EP) -> BiorthogonalSystem:
    if not np.all(raw.converged):
        raise NoConvergence("eigensystem has unconverged pairs")
    vecs = raw.right_vectors
    n = raw.dim
    try:
        inv = lu_solve(vecs, np.eye(n, dtype=complex))
    except SingularMatrix as exc:
        raise AtExceptionalPoint(f"right eigenvectors are linearly dependent ({exc})") from exc

    rig = np.array([rigidity(inv[i], vecs[:, i]) for i in range(n)])
    if rig.min() < tol_ep:
        i = int(np.argmin(rig))
        raise AtExceptionalPoint(
            f"rigidity {rig[i]:.3e} of state {i} (E={raw.values[i]:.6g}) below {tol_ep:g}"
        )

    rights = np.empty_like(vecs)
    lefts = np.empty_like(inv)
    for i in range(n):
        r, l = vecs[:, i], inv[i]
        scale = np.sqrt(np.linalg.norm(l) / np.linalg.norm(r))
        r = r * scale
        j = _anchor_index(r)
        phase = r[j] / abs(r[j])
        r = r / phase
        r[j] = abs(r[j])
        l = l * (phase / scale)
        l = l / (l @ r)
        rights[:, i] = r
        lefts[i] = l
    return BiorthogonalSystem(values=raw.values.copy(), rights=rights, lefts=lefts, rigidity=rig)


def solve_biorthogonal(h) -> BiorthogonalSystem:
    """Eigensolve and biorthogonalize in one step."""
    return biorthogonalize(eig_general(h))


@dataclass(frozen=True)
class StateMatching:
    """``permutation[i]`` is the index in the new system that continues old state ``i``."""

    permutation: np.ndarray
    overlaps: np.ndarray
    crossed_ep: bool

    def __getitem__(self, i: int) -> int:
        return int(self.permutation[i])


def match_states(prev: BiorthogonalSystem, nxt: BiorthogonalSystem) -> StateMatching:
    """Greedy assignment on ``|<L_i(prev)|R_j(next)>|``.

    Pairs are taken in order of decreasing overlap, ties broken by the
    smaller eigenvalue distance and then by lower index.  Greedy matching is
    exact for the small parameter steps used in sweeps but is not an optimal
    assignment in general.
    """
    if prev.dim != nxt.dim:
        raise DimensionMismatch(f"cannot match systems of dimension {prev.dim} and {nxt.dim}")
    n = prev.dim
    ov = np.abs(prev.lefts @ nxt.rights)
    de = np.abs(prev.values[:, None] - nxt.values[None, :])

    for i in range(n):
        if n < 2:
            break
        order = np.argsort(-ov[i], kind="stable")
        a, b = order[0], order[1]
        if ov[i, a] - ov[i, b] < _TIE * max(ov[i, a], 1.0) and abs(de[i, a] - de[i, b]) < _TIE:
            raise AmbiguousMatching(f"state {i} overlaps states {a} and {b} equally")

    pairs = sorted(
        ((-ov[i, j], de[i, j], i, j) for i in range(n) for j in range(n)),
    )
    perm = np.full(n, -1)
    taken = np.zeros(n, dtype=bool)
    for _, _, i, j in pairs:
        if perm[i] < 0 and not taken[j]:
            perm[i] = j
            taken[j] = True
    chosen = ov[np.arange(n), perm]
    crossed = min(prev.min_rigidity, nxt.min_rigidity) < NEAR_EP
    return StateMatching(permutation=perm, overlaps=chosen, crossed_ep=crossed)
