"""Generalized fidelity susceptibility for non-Hermitian Hamiltonians.

The biorthogonal eigensystem of ``H(lam)`` gives a metric-aware fidelity
between nearby parameters; its susceptibility diverges to ``-inf`` (real
part) at exceptional points, which :mod:`ephunt.hunt` uses to locate them.
"""
from .biortho import BiorthogonalSystem, biorthogonalize, match_states, rigidity, solve_biorthogonal
from .errors import AtExceptionalPoint, EPHuntError
from .fidelity import fidelity_biortho, fidelity_metric, susceptibility_fd
from .hunt import SweepSpec, detect_eps, make_grid, run_sweep, scaling_run
from .linalg import eig_general, expm_action, lu_solve
from .metric import MetricOperator, build_metric, evolve_metric
from .models import SshGroundState, SshParams, ToyModel

__version__ = "0.1.0"
