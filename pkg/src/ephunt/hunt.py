"""Parameter sweeps, exceptional-point detection and finite-size scaling.

An exceptional point shows up in a susceptibility curve as ``Re chi -> -inf``.
Candidates are flagged from the curve, then located precisely by bisecting a
signed spectral discriminant supplied by the model (it changes sign where
two eigenvalues coalesce), so the reported location never relies on
evaluating ``chi`` at the singular point itself.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .biortho import NEAR_EP, TOL_EP, match_states, solve_biorthogonal
from .errors import AmbiguousMatching, AtExceptionalPoint, EPHuntError, EvenNRejected, InvalidSpec, StepTooLarge
from .fidelity import DEFAULT_EPSILON, susceptibility_fd
from .models import SshGroundState, SshParams, ssh_chi0_density

log = logging.getLogger(__name__)

OK, NEAR_EP_STATUS, SKIPPED = "ok", "near-ep", "skipped-at-ep"
DEFAULT_THRESHOLD = 1e3
BISECT_WIDTH = 1e-10


def make_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive grid ``lo, lo+step, ..., hi`` snapped to 12 decimals."""
    if not (math.isfinite(lo) and math.isfinite(hi) and math.isfinite(step)):
        raise InvalidSpec("grid bounds must be finite")
    if step <= 0 or hi < lo:
        raise InvalidSpec(f"empty grid: [{lo}, {hi}] with step {step}")
    n = int(round((hi - lo) / step)) + 1
    return np.round(lo + step * np.arange(n), 12)


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep.  ``model`` must provide ``hamiltonian`` and ``discriminants``."""

    model: object
    grid: Sequence[float]
    band: int = 0
    epsilon: float = DEFAULT_EPSILON
    richardson: bool = True
    method: str = "auto"
    threads: int = 1

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or g.size < 1:
            raise InvalidSpec("sweep grid needs at least one point")
        if np.any(np.diff(g) <= 0):
            raise InvalidSpec("sweep grid must be strictly increasing")
        if not self.epsilon > 0:
            raise InvalidSpec("epsilon must be positive")
        if self.method not in ("auto", "closed-form", "fd"):
            raise InvalidSpec(f"unknown method {self.method!r}")
        object.__setattr__(self, "grid", g)


@dataclass(frozen=True)
class Sample:
    lam: float
    f: complex
    chi: complex
    rigidity: float
    status: str
    chi_exact: float = float("nan")


@dataclass
class SusceptibilityCurve:
    samples: list[Sample]
    parameter: str = "lambda"
    model: str = ""

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([s.lam for s in self.samples])

    @property
    def re_chi(self) -> np.ndarray:
        return np.array([s.chi.real for s in self.samples])

    @property
    def statuses(self) -> list[str]:
        return [s.status for s in self.samples]


def _status(rig: float) -> str:
    return NEAR_EP_STATUS if rig < NEAR_EP else OK


def _skipped(lam: float) -> Sample:
    nan = float("nan")
    return Sample(float(lam), complex(nan, nan), complex(nan, nan), nan, SKIPPED)


def _map(fn, items, threads: int) -> list:
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _exact_or_nan(model, lam: float) -> float:
    try:
        return float(model.chi_exact(lam))
    except (AttributeError, NotImplementedError, EPHuntError):
        return float("nan")


def _sweep_matrix_family(spec: SweepSpec) -> list[Sample]:
    model = spec.model
    grid = spec.grid

    def solve(lam):
        try:
            return solve_biorthogonal(model.hamiltonian(lam))
        except AtExceptionalPoint:
            return None

    systems = _map(solve, grid, spec.threads)

    # tracking pass is sequential: each band index follows from the last good point
    bands: list[int | None] = []
    prev, band = None, spec.band
    for sys in systems:
        if sys is None:
            bands.append(None)
            continue
        if prev is not None:
            try:
                band = match_states(prev, sys)[band]
            except AmbiguousMatching:
                # only happens straddling an EP, where "the same state" has no meaning
                log.debug("ambiguous tracking; keeping canonical index %d", band)
        bands.append(band)
        prev = sys

    def evaluate(item):
        lam, sys, b = item
        if sys is None:
            return _skipped(lam)
        try:
            res = susceptibility_fd(
                model.hamiltonian, lam, b, spec.epsilon, spec.richardson, system=sys
            )
        except (AtExceptionalPoint, StepTooLarge) as exc:
            log.debug("skipping %s = %g: %s", getattr(model, "parameter", "lambda"), lam, exc)
            return _skipped(lam)
        return Sample(float(lam), res.f, res.chi, res.rigidity, _status(res.rigidity), _exact_or_nan(model, lam))

    return _map(evaluate, list(zip(grid, systems, bands)), spec.threads)


def _sweep_ssh(spec: SweepSpec, use_fd: bool) -> list[Sample]:
    model: SshGroundState = spec.model

    def evaluate(lam):
        try:
            exact = model.chi_exact(lam) if model.parameter == "w" else float("nan")
        except AtExceptionalPoint:
            return _skipped(lam)
        rig = model.rigidity(lam)
        if rig < TOL_EP:
            return _skipped(lam)
        if use_fd:
            try:
                chi = complex(model.chi_fd(lam, spec.epsilon, spec.richardson))
            except (AtExceptionalPoint, StepTooLarge):
                return _skipped(lam)
        else:
            chi = complex(exact)
        nan = float("nan")
        return Sample(float(lam), complex(nan, nan), chi, rig, _status(rig), exact)

    return _map(evaluate, spec.grid, spec.threads)


def run_sweep(spec: SweepSpec) -> SusceptibilityCurve:
    """Susceptibility of the tracked state at every grid point.

    Points at an exceptional point are recorded as ``skipped-at-ep``; they
    never abort the sweep.  For the SSH ground state the default method is
    the closed-form density; ``method="fd"`` forces per-mode finite
    differences instead.
    """
    model = spec.model
    if isinstance(model, SshGroundState):
        use_fd = spec.method == "fd" or model.parameter != "w"
        samples = _sweep_ssh(spec, use_fd)
    else:
        samples = _sweep_matrix_family(spec)
    return SusceptibilityCurve(
        samples, getattr(model, "parameter", "lambda"), getattr(model, "name", "")
    )


# --------------------------------------------------------------------------- detection


@dataclass(frozen=True)
class EPCandidate:
    lambda_ep: float
    bracket: tuple[float, float]
    min_band_gap: float
    ep_residual: float
    divergence_fit_exponent: float
    evidence: str


@dataclass
class EPReport:
    candidates: list[EPCandidate] = field(default_factory=list)
    threshold: float = DEFAULT_THRESHOLD
    rejected: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.candidates)

    @property
    def locations(self) -> list[float]:
        return [c.lambda_ep for c in self.candidates]


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    out, start = [], None
    for i, m in enumerate(mask):
        if m and start is None:
            start = i
        elif not m and start is not None:
            out.append((start, i - 1))
            start = None
    if start is not None:
        out.append((start, len(mask) - 1))
    return out


def _bisect(fn, lo: float, hi: float, flo: float, width: float) -> tuple[float, float]:
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = fn(mid)
        if fm == 0.0:
            return mid, mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo, hi


def _fit_exponent(lams: np.ndarray, re_chi: np.ndarray, root: float) -> float:
    """Fit ``-Re chi ~ c |lam - root|^-p`` on the better-sampled side of ``root``."""
    ok = np.isfinite(re_chi) & (re_chi < 0) & (lams != root)
    left = np.flatnonzero(ok & (lams < root))[::-1][:4]
    right = np.flatnonzero(ok & (lams > root))[:4]
    idx = left if len(left) >= len(right) else right
    if len(idx) < 2:
        return float("nan")
    x = np.log(np.abs(lams[idx] - root))
    y = np.log(-re_chi[idx])
    return float(-np.polyfit(x, y, 1)[0])


def _roots_in(model, lams: np.ndarray) -> list[tuple[float, float, float]]:
    """Refined discriminant roots between consecutive ``lams``."""
    disc = np.array([model.discriminants(x) for x in lams])
    found: list[tuple[float, float, float]] = []
    for i in range(len(lams)):
        for m in np.flatnonzero(disc[i] == 0.0):
            found.append((lams[i], lams[i], lams[i]))
    for i in range(len(lams) - 1):
        a, b = disc[i], disc[i + 1]
        for m in np.flatnonzero(a * b < 0):
            fn = lambda x, m=m: model.discriminants(x)[m]
            lo, hi = _bisect(fn, lams[i], lams[i + 1], a[m], BISECT_WIDTH)
            found.append((0.5 * (lo + hi), lams[i], lams[i + 1]))
    merged: list[tuple[float, float, float]] = []
    for root in sorted(found):
        if merged and abs(root[0] - merged[-1][0]) < 1e-9:
            continue
        merged.append(root)
    return merged


_GAP_CLOSED = 1e-3


def _gap_minimum(model, lo: float, hi: float) -> tuple[float, float, float] | None:
    # bounded Brent resolves lam to ~sqrt(machine eps) relative, and the gap at an EP
    # closes like sqrt(distance), so a true coalescence still leaves a gap ~1e-4
    res = minimize_scalar(model.min_gap, bounds=(lo, hi), method="bounded", options={"xatol": BISECT_WIDTH})
    if res.fun < _GAP_CLOSED:
        return float(res.x), lo, hi
    return None


def detect_eps(curve: SusceptibilityCurve, model, threshold: float = DEFAULT_THRESHOLD) -> EPReport:
    """Find exceptional points along a sweep.

    Grid points with ``Re chi`` below ``-threshold`` (the threshold is raised
    to ``100 x median |Re chi|`` on curves whose typical scale is large) or
    that were skipped as exceptional are grouped into runs.  Each run,
    widened by one grid point per side, is searched for sign changes of the
    model's discriminants, which are bisected to a bracket narrower than
    ``1e-10``.  Runs without a coalescence are listed in ``rejected``.
    """
    lams = curve.lambdas
    re = curve.re_chi
    finite = np.isfinite(re)
    scale = float(np.median(np.abs(re[finite]))) if finite.any() else 0.0
    eff = max(threshold, 100.0 * scale)
    skipped = np.array([s == SKIPPED for s in curve.statuses], dtype=bool)
    flagged = skipped | (finite & (re < -eff))

    report = EPReport(threshold=eff)
    for a, b in _runs(flagged):
        lo, hi = max(a - 1, 0), min(b + 1, len(lams) - 1)
        window = lams[lo: hi + 1]
        if hasattr(model, "discriminants"):
            roots = _roots_in(model, window)
        else:
            hit = _gap_minimum(model, window[0], window[-1]) if len(window) > 1 else None
            roots = [hit] if hit else []
        if not roots:
            report.rejected.append(
                f"[{window[0]:.6g}, {window[-1]:.6g}]: Re chi below -{eff:.3g} without eigenvalue coalescence"
            )
            continue
        for root, blo, bhi in roots:
            if any(abs(root - c.lambda_ep) < 1e-9 for c in report.candidates):
                continue
            p = _fit_exponent(lams, re, root)
            near = re[lo: hi + 1][np.isfinite(re[lo: hi + 1])]
            most = float(near.min()) if near.size else float("nan")
            resid = float(np.min(np.abs(model.discriminants(root)))) if hasattr(model, "discriminants") else float("nan")
            evidence = (
                f"{b - a + 1} flagged grid point(s), min Re chi = {most:.6g}"
                + (f", {int(skipped[a: b + 1].sum())} skipped at EP" if skipped[a: b + 1].any() else "")
            )
            report.candidates.append(
                EPCandidate(
                    lambda_ep=float(root),
                    bracket=(float(blo), float(bhi)),
                    min_band_gap=float(model.min_gap(root)),
                    ep_residual=resid,
                    divergence_fit_exponent=p,
                    evidence=evidence,
                )
            )
    report.candidates.sort(key=lambda c: c.lambda_ep)
    return report


# --------------------------------------------------------------------------- scaling


@dataclass(frozen=True)
class ScalingResult:
    n: list[int]
    chi0: list[float]
    slope: float | None
    intercept: float | None
    max_residual: float | None


def scaling_run(n_list: Sequence[int], v: float = 1.0) -> ScalingResult:
    """``chi0`` at the Hermitian critical point ``u = 0, w = v`` versus ``N``.

    With two or more sizes the values are fitted to ``slope * (N - 1) + intercept``.
    Even ``N`` puts ``k = pi`` exactly on the gap closing and is rejected.
    """
    ns = [int(n) for n in n_list]
    if not ns:
        raise InvalidSpec("no system sizes given")
    even = [n for n in ns if n % 2 == 0]
    if even:
        raise EvenNRejected(f"even sizes {even} hit the k = pi divergence; use odd N")
    chi = [ssh_chi0_density(SshParams(0.0, v, v, n)) for n in ns]
    if len(set(ns)) < 2:
        return ScalingResult(ns, chi, None, None, None)
    x = np.array(ns, dtype=float) - 1.0
    y = np.array(chi)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(y - (slope * x + intercept))))
    return ScalingResult(ns, chi, float(slope), float(intercept), resid)
