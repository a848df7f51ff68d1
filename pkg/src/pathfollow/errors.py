"""Error types shared across the solver stack.

Numerical failures carry an optional ``partial`` payload (a Trajectory)
so drivers can hand committed steps back to the CLI for post-mortem output.
"""


class PathFollowError(Exception):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SingularMatrix(PathFollowError):
    """A pivot fell below the relative singularity threshold."""


class NoSolution(PathFollowError):
    """The resolvent inclusion x + lam*f = z has no solution for any f in F(x)."""


class DimensionMismatch(PathFollowError):
    """Componentwise arguments do not match the product map dimension."""


class NoReference(PathFollowError):
    """The problem ships no reference-solution oracle."""


class OracleDiverged(PathFollowError):
    """A reference oracle failed to reach its tolerance within its iteration cap."""


class AllSingular(PathFollowError):
    """Every slope / parametrization selection produced a singular system."""


class RefineDiverged(PathFollowError):
    """Fixed-point refinement hit its iteration cap above the target residual."""


class Stalled(PathFollowError):
    """The adaptive controller rejected every step size twice in a row."""
