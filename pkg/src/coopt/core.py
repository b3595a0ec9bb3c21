"""Problem definitions, decision points, and comparison semantics.

A problem is a black box: given a point in a bounded (possibly mixed
real/integer) search domain it returns a vector of objective values and a
single scalar infeasibility measure.  A point is feasible when that measure
is <= 0.  Everything downstream (solvers, the archive, the scheduler) relies
only on the comparison rules defined here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

INFEASIBLE_SENTINEL = math.inf


class VarKind(Enum):
    REAL = "real"
    INTEGER = "integer"


class EvaluationFailure(ValueError):
    """Raised when a model produces output that cannot be used."""


@dataclass(frozen=True)
class Domain:
    """Bounded search box with a kind (real or integer) per dimension.

    Parameters
    ----------
    lower, upper : array-like
        Per-dimension bounds, lower <= upper.
    kinds : sequence of VarKind, optional
        Defaults to all-REAL.  Integer dimensions must have integer bounds.
    """

    lower: np.ndarray
    upper: np.ndarray
    kinds: tuple[VarKind, ...] = ()

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be 1-D arrays of equal length")
        kinds = self.kinds or tuple(VarKind.REAL for _ in lower)
        if len(kinds) != lower.size:
            raise ValueError("one kind per dimension required")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        for lo, hi, kind in zip(lower, upper, kinds):
            if kind is VarKind.INTEGER and (lo != round(lo) or hi != round(hi)):
                raise ValueError("integer dimension with non-integer bounds")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "kinds", tuple(kinds))

    @property
    def size(self) -> int:
        return self.lower.size

    @property
    def ranges(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def integer_mask(self) -> np.ndarray:
        return np.array([k is VarKind.INTEGER for k in self.kinds])

    def clip(self, values: np.ndarray) -> np.ndarray:
        """Project onto the box and re-round integer dimensions."""
        out = np.clip(np.asarray(values, dtype=float), self.lower, self.upper)
        mask = self.integer_mask
        if mask.any():
            out[mask] = np.round(out[mask])
        return out

    def contains(self, values: np.ndarray) -> bool:
        values = np.asarray(values, dtype=float)
        if values.shape != self.lower.shape:
            return False
        if np.any(values < self.lower) or np.any(values > self.upper):
            return False
        mask = self.integer_mask
        return not mask.any() or bool(np.all(values[mask] == np.round(values[mask])))

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        values = self.lower + rng.random(self.size) * self.ranges
        mask = self.integer_mask
        if mask.any():
            values[mask] = rng.integers(
                self.lower[mask].astype(int), self.upper[mask].astype(int) + 1
            )
        return freeze_point(values)

    def random_population(self, rng: np.random.Generator, n: int) -> list[np.ndarray]:
        return [self.random_point(rng) for _ in range(n)]


def box(lower: Sequence[float], upper: Sequence[float],
        kinds: Sequence[VarKind] = ()) -> Domain:
    return Domain(np.asarray(lower, dtype=float), np.asarray(upper, dtype=float),
                  tuple(kinds))


def uniform_box(lo: float, hi: float, n: int) -> Domain:
    return box([lo] * n, [hi] * n)


def freeze_point(values: np.ndarray) -> np.ndarray:
    """Return a read-only float copy; points are shared across agents."""
    out = np.array(values, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, slots=True)
class Evaluation:
    """Outcome of one model evaluation, with attribution.

    ``objectives`` is a tuple (length = objective count of the problem) and
    ``constraint`` the scalar infeasibility measure; the point is feasible
    iff ``constraint <= 0``.  ``solver_id`` and ``seq`` identify who asked
    and in which global order the evaluation completed.
    """

    point: np.ndarray
    objectives: tuple[float, ...]
    constraint: float
    solver_id: str = ""
    seq: int = -1

    @property
    def feasible(self) -> bool:
        return self.constraint <= 0.0

    @property
    def failed(self) -> bool:
        return self.constraint == INFEASIBLE_SENTINEL

    def key(self) -> tuple:
        """Hashable identity on objective space used for set comparisons."""
        return (self.objectives, self.constraint)


@dataclass(frozen=True)
class Problem:
    """A named black-box model over a bounded domain.

    ``model(point, parameters)`` returns ``(objectives, constraint)`` where
    objectives is a scalar or sequence of length ``n_obj``.  Models must be
    deterministic unless ``stochastic`` is set.
    """

    name: str
    domain: Domain
    n_obj: int
    model: Callable
    parameters: object = None
    known_optimum: Optional[float] = None
    front_parametrization: Optional[Callable[[float], tuple[float, ...]]] = None
    stochastic: bool = False
    attrs: dict = field(default_factory=dict)


def evaluate_model(problem: Problem, point: np.ndarray,
                   solver_id: str = "", seq: int = -1) -> Evaluation:
    """Evaluate the model once; one call is one unit of evaluation budget.

    Non-finite or raising models yield a sentinel evaluation (all objectives
    and the constraint set to +inf) so that every point stays orderable and
    no exception leaks into a solver.
    """
    point = freeze_point(point)
    try:
        raw_z, raw_g = problem.model(point, problem.parameters)
        z = tuple(float(v) for v in np.atleast_1d(raw_z))
        g = float(raw_g)
    except Exception:
        return _failed_evaluation(problem, point, solver_id, seq)
    if len(z) != problem.n_obj or not all(math.isfinite(v) for v in z) \
            or not math.isfinite(g):
        return _failed_evaluation(problem, point, solver_id, seq)
    return Evaluation(point, z, g, solver_id, seq)


def _failed_evaluation(problem, point, solver_id, seq) -> Evaluation:
    z = tuple(INFEASIBLE_SENTINEL for _ in range(problem.n_obj))
    return Evaluation(point, z, INFEASIBLE_SENTINEL, solver_id, seq)


def better(a: Evaluation, b: Evaluation) -> bool:
    """Strict single-objective ordering: does ``a`` precede ``b``?

    Feasible beats infeasible; among feasible the smaller objective wins;
    among infeasible the smaller constraint measure wins.  Exact ties are
    not "better" (callers keep the earlier arrival).
    """
    if a.feasible:
        if not b.feasible:
            return True
        return a.objectives[0] < b.objectives[0]
    if b.feasible:
        return False
    return a.constraint < b.constraint


def dominates(a: Evaluation, b: Evaluation) -> bool:
    """Multi-objective dominance (minimization) with feasibility layering.

    Both feasible: componentwise <= with at least one strict <.  A feasible
    point dominates any infeasible one.  Both infeasible: smaller constraint
    measure dominates.
    """
    if len(a.objectives) != len(b.objectives):
        raise ValueError(
            f"objective count mismatch: {len(a.objectives)} vs {len(b.objectives)}"
        )
    if a.feasible and b.feasible:
        strictly = False
        for x, y in zip(a.objectives, b.objectives):
            if x > y:
                return False
            if x < y:
                strictly = True
        return strictly
    if a.feasible:
        return True
    if b.feasible:
        return False
    return a.constraint < b.constraint
