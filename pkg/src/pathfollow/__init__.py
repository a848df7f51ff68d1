"""Path-following solvers for parametric generalized equations.

Tracks solutions x(t) of 0 in g(x(t)) - p(t) + F(x(t)) on [0, T] for
set-valued F built from scalar diode-style characteristics, using one
semismooth Newton corrector per time step (uniform grid) or an adaptive
step-size controller with a certified error ledger.
"""

from .errors import (
    AllSingular,
    DimensionMismatch,
    NoReference,
    NoSolution,
    OracleDiverged,
    PathFollowError,
    RefineDiverged,
    SingularMatrix,
    Stalled,
)
from .monotone import AffineBranch, IdealDiode, PracticalDiode, ProductMap
from .problems import (
    ParametricProblem,
    PROBLEMS,
    make_ideal_diode,
    make_practical_diode,
    make_problem,
    make_transistor,
    reference_solution,
    splitting_oracle,
)
from .reform import ApproxPoint, NewtonSystem, approx_step, assemble_newton, newton_step, residual
from .solvers import (
    RunConfig,
    StepRecord,
    Trajectory,
    accept_step,
    adaptive_path_follow,
    ck_update,
    forward_backward,
    refine,
    single_step,
    uniform_path_follow,
)

__all__ = [
    "AffineBranch",
    "AllSingular",
    "ApproxPoint",
    "DimensionMismatch",
    "IdealDiode",
    "NewtonSystem",
    "NoReference",
    "NoSolution",
    "OracleDiverged",
    "PROBLEMS",
    "ParametricProblem",
    "PathFollowError",
    "PracticalDiode",
    "ProductMap",
    "RefineDiverged",
    "RunConfig",
    "SingularMatrix",
    "Stalled",
    "StepRecord",
    "Trajectory",
    "accept_step",
    "adaptive_path_follow",
    "approx_step",
    "assemble_newton",
    "ck_update",
    "forward_backward",
    "make_ideal_diode",
    "make_practical_diode",
    "make_problem",
    "make_transistor",
    "newton_step",
    "refine",
    "reference_solution",
    "residual",
    "single_step",
    "splitting_oracle",
    "uniform_path_follow",
]

__version__ = "0.1.0"
