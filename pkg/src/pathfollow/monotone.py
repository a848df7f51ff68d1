"""Scalar set-valued characteristics and their componentwise products.

Three kinds are shipped: the normal cone to [0, inf) (ideal diode), the
square-root diode with a vertical segment (practical diode, in both the
monotone and the swapped non-monotone branch ordering), and a single-valued
affine branch. Each kind exposes

  * membership_residual -- exact distance from y to F(x),
  * resolvent           -- a selection of (I + lam*F)^{-1}, closed form,
  * resolvent_slopes    -- the one-sided derivative limits of that selection.

The swapped practical diode has a multivalued resolvent on an overlap
window; the selection there is steered by a hint (nearest candidate), which
is how the path followers keep a locally Lipschitz branch choice.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NoSolution


def _check_lam(lam):
    if not lam > 0.0:
        raise ValueError(f"resolvent parameter must be positive, got {lam}")


def _pick(candidates, hint):
    # nearest to hint; ties and the no-hint case resolve deterministically
    # toward the smallest magnitude, then the smaller value
    if hint is None:
        return min(candidates, key=lambda c: (abs(c), c))
    return min(candidates, key=lambda c: (abs(c - hint), c))


class ScalarMonotoneMap:
    """Base for one-dimensional set-valued characteristics."""

    is_monotone = False

    def membership_residual(self, x, y):
        raise NotImplementedError

    def resolvent(self, lam, z, hint=None):
        raise NotImplementedError

    def resolvent_slopes(self, lam, z, hint=None):
        raise NotImplementedError


@dataclass(frozen=True)
class IdealDiode(ScalarMonotoneMap):
    """Normal cone to [0, inf): (-inf, 0] at x = 0, {0} for x > 0, empty for x < 0."""

    is_monotone = True

    def membership_residual(self, x, y):
        if x < 0.0:
            return math.inf
        if x == 0.0:
            return max(y, 0.0)
        return abs(y)

    def resolvent(self, lam, z, hint=None):
        _check_lam(lam)
        return max(z, 0.0)

    def resolvent_slopes(self, lam, z, hint=None):
        _check_lam(lam)
        if z > 0.0:
            return (1.0,)
        if z < 0.0:
            return (0.0,)
        return (0.0, 1.0)


@dataclass(frozen=True)
class PracticalDiode(ScalarMonotoneMap):
    """Square-root diode: [v1, v2] at x = 0 and sqrt branches off zero.

    With swap_branches=False the x > 0 branch carries v2 (graph maximal
    monotone); with True it carries v1, which makes the graph non-monotone
    and the resolvent multivalued on the window (lam*v1, lam*v2).
    """

    v1: float
    v2: float
    swap_branches: bool = False

    def __post_init__(self):
        if not self.v1 < self.v2:
            raise ValueError(f"need v1 < v2, got v1={self.v1}, v2={self.v2}")

    @property
    def is_monotone(self):
        return not self.swap_branches

    @property
    def pos_const(self):
        return self.v1 if self.swap_branches else self.v2

    @property
    def neg_const(self):
        return self.v2 if self.swap_branches else self.v1

    def membership_residual(self, x, y):
        if x > 0.0:
            return abs(y - (self.pos_const + math.sqrt(x)))
        if x < 0.0:
            return abs(y - (self.neg_const - math.sqrt(-x)))
        return max(self.v1 - y, y - self.v2, 0.0)

    def _candidates(self, lam, z):
        # branch inclusions reduce to quadratics in sqrt(+-x); the stable
        # root form -2c/(lam + sqrt(lam^2 - 4c)) avoids cancellation near
        # the breakpoints
        out = []
        c = z - lam * self.neg_const
        if c < 0.0:
            u = -2.0 * c / (lam + math.sqrt(lam * lam - 4.0 * c))
            out.append(-u * u)
        if lam * self.v1 <= z <= lam * self.v2:
            out.append(0.0)
        c = lam * self.pos_const - z
        if c < 0.0:
            u = -2.0 * c / (lam + math.sqrt(lam * lam - 4.0 * c))
            out.append(u * u)
        return out

    def resolvent(self, lam, z, hint=None):
        _check_lam(lam)
        candidates = self._candidates(lam, z)
        if not candidates:
            # unreachable while v1 < v2 (the branch ranges cover the line)
            raise NoSolution(f"no resolvent candidate at z={z!r}")
        return _pick(candidates, hint)

    def resolvent_slopes(self, lam, z, hint=None):
        x = self.resolvent(lam, z, hint)
        if x > 0.0:
            return (1.0 / (1.0 + lam / (2.0 * math.sqrt(x))),)
        if x < 0.0:
            return (1.0 / (1.0 + lam / (2.0 * math.sqrt(-x))),)
        # both one-sided limits are 0: the segment is flat and the sqrt
        # branches meet it with infinite graph slope
        return (0.0,)


@dataclass(frozen=True)
class AffineBranch(ScalarMonotoneMap):
    """Single-valued affine characteristic F(x) = {slope*x + offset}."""

    slope: float = 0.0
    offset: float = 0.0

    @property
    def is_monotone(self):
        return self.slope >= 0.0

    def membership_residual(self, x, y):
        return abs(y - (self.slope * x + self.offset))

    def resolvent(self, lam, z, hint=None):
        _check_lam(lam)
        denom = 1.0 + lam * self.slope
        if denom == 0.0:
            if z == lam * self.offset:
                return hint if hint is not None else 0.0
            raise NoSolution(f"z={z!r} outside the range of (I + lam*F), 1 + lam*slope = 0")
        return (z - lam * self.offset) / denom

    def resolvent_slopes(self, lam, z, hint=None):
        _check_lam(lam)
        denom = 1.0 + lam * self.slope
        if denom == 0.0:
            raise NoSolution("degenerate affine branch: 1 + lam*slope = 0")
        return (1.0 / denom,)


@dataclass(frozen=True)
class ProductMap:
    """Componentwise product of scalar characteristics, one per coordinate."""

    components: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def dimension(self):
        return len(self.components)

    @property
    def is_monotone(self):
        return all(c.is_monotone for c in self.components)

    def _check_dim(self, v, what):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dimension,):
            raise DimensionMismatch(
                f"{what} has shape {v.shape}, product map has dimension {self.dimension}"
            )
        return v

    def membership_residual(self, x, y):
        """Euclidean norm of the per-coordinate distances dist(y_i, F_i(x_i))."""
        x = self._check_dim(x, "x")
        y = self._check_dim(y, "y")
        total = 0.0
        for i, comp in enumerate(self.components):
            r = comp.membership_residual(float(x[i]), float(y[i]))
            if math.isinf(r):
                return math.inf
            total += r * r
        return math.sqrt(total)

    def resolvent(self, lam, z, hint=None):
        z = self._check_dim(z, "z")
        if hint is not None:
            hint = self._check_dim(hint, "hint")
        return np.array(
            [
                comp.resolvent(lam, float(z[i]), None if hint is None else float(hint[i]))
                for i, comp in enumerate(self.components)
            ]
        )

    def resolvent_slopes(self, lam, z, hint=None, cap=None):
        """All diagonal slope matrices from the per-coordinate slope sets.

        The Cartesian product is enumerated first-choice-first, capped at
        2**dimension entries.
        """
        z = self._check_dim(z, "z")
        if hint is not None:
            hint = self._check_dim(hint, "hint")
        scalar_sets = [
            comp.resolvent_slopes(lam, float(z[i]), None if hint is None else float(hint[i]))
            for i, comp in enumerate(self.components)
        ]
        if cap is None:
            cap = 2 ** self.dimension
        combos = itertools.islice(itertools.product(*scalar_sets), cap)
        return tuple(np.diag(combo) for combo in combos)
