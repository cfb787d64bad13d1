"""Block-iterative extrapolated best-approximation solver.

The problem: find the point closest to an anchor ``x0`` subject to convex
set constraints and proximal prescriptions ``F x = p`` with ``F`` firmly
nonexpansive.  Each iteration projects the current iterate through a
selected affine subspace, activates a block of constraints by firmly
quasinonexpansive operators, extrapolates the averaged activation, and
re-projects the anchor with the two-halfspace closed form from
:mod:`proxpoint.haugazeau`.  Classical serial and fully parallel schemes
are provided as baselines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .core import Array, Operator, Regularity, as_signal
from .haugazeau import InfeasibleHalfspacesError, q_operator

# A y_n this much shorter than d_n - z_n (in squared norm, relative) is
# treated as degenerate extrapolation: the step reduces to t_n = z_n.
DEGENERATE_RATIO = 1e-14


# ---------------------------------------------------------------------------
# Problem model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineSubspace:
    """Constraint given by the exact projector onto a closed affine set."""

    projector: Operator


@dataclass(frozen=True)
class ConvexSet:
    """Constraint activated by iteration-indexed firmly quasinonexpansive
    operators whose common fixed set is the constraint set."""

    activation_factory: Callable[[int], Operator]

    @classmethod
    def from_operator(cls, op: Operator) -> "ConvexSet":
        return cls(lambda n: op)


@dataclass(frozen=True)
class Prescription:
    """Proximal prescription F x = p with F firmly nonexpansive."""

    F: Operator
    p: Array


Constraint = Union[AffineSubspace, ConvexSet, Prescription]


@dataclass(frozen=True)
class Problem:
    """Anchor plus constraints; ``affine_ids`` lists the affine constraints
    whose projectors the solver may exploit for extrapolation.

    An empty ``affine_ids`` means the ambient space is used (the selected
    projection is the identity), which is always admissible.
    """

    x0: Array
    constraints: tuple
    affine_ids: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "x0", as_signal(self.x0))
        constraints = tuple(self.constraints)
        object.__setattr__(self, "constraints", constraints)
        object.__setattr__(self, "affine_ids", tuple(self.affine_ids))
        if not constraints:
            raise ValueError("problem needs at least one constraint")
        for i in self.affine_ids:
            if not (0 <= i < len(constraints)):
                raise ValueError(f"affine id {i} out of range")
            if not isinstance(constraints[i], AffineSubspace):
                raise ValueError(f"constraint {i} is not an affine subspace")
        dim = self.x0.shape[0]
        for i, c in enumerate(constraints):
            if isinstance(c, Prescription):
                as_signal(c.p, dim=dim)

    @property
    def dim(self) -> int:
        return self.x0.shape[0]


def fixed_point_activation(F: Operator, p: Array) -> Operator:
    """Fixed-point reformulation of a prescription: T = p + Id - F.

    ``T`` is firmly nonexpansive and its fixed points are exactly the
    signals with ``F x = p``.
    """
    p = as_signal(p)

    def fn(x: Array) -> Array:
        fx = np.asarray(F(x), dtype=float)
        if fx.shape != p.shape:
            raise ValueError(
                f"prescription dimension mismatch: F maps to {fx.shape}, p has {p.shape}")
        return p + x - fx

    return Operator(fn, Regularity.FIRMLY_NONEXPANSIVE,
                    f"fixed-point activation of {F.descriptor}")


def _activation(constraint: Constraint, z: Array, n: int) -> Array:
    if isinstance(constraint, AffineSubspace):
        return np.asarray(constraint.projector(z), dtype=float)
    if isinstance(constraint, ConvexSet):
        return np.asarray(constraint.activation_factory(n)(z), dtype=float)
    return constraint.p + z - np.asarray(constraint.F(z), dtype=float)


def constraint_residual(constraint: Constraint, x: Array, n: int = 0) -> float:
    """Distance-to-satisfaction proxy: |a - x| for the constraint's activation."""
    return float(np.linalg.norm(_activation(constraint, x, n) - x))


# ---------------------------------------------------------------------------
# Block schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Schedule:
    """Block-selection rule: ``select(n)`` returns the affine id i(n) (or
    None for the ambient space) and the active block I_n.  ``coverage``
    maps each constraint id to the M_i it achieves (every id occurs in
    every window of M_i consecutive iterations); ``window`` is max M_i."""

    select: Callable[[int], tuple]
    coverage: dict
    window: int


def schedule_round_robin(num_constraints: int, affine_ids: Sequence[int] = (),
                         block_size: int = 1,
                         always_active: Sequence[int] = ()) -> Schedule:
    """Cyclic schedule: i(n) cycles over ``affine_ids`` (ambient space if
    empty) and I_n holds ``always_active`` plus a cyclic window of
    ``block_size`` of the remaining ids."""
    if num_constraints < 1:
        raise ValueError("need at least one constraint")
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    affine = tuple(affine_ids)
    always = tuple(always_active)
    for i in affine + always:
        if not (0 <= i < num_constraints):
            raise ValueError(f"constraint id {i} out of range")
    remaining = sorted(set(range(num_constraints)) - set(affine) - set(always))
    if not always and not remaining and not affine:
        raise ValueError("schedule has nothing to activate")

    def select(n: int) -> tuple:
        i_n = affine[n % len(affine)] if affine else None
        if remaining:
            m = len(remaining)
            start = (n * block_size) % m
            width = min(block_size, m)
            block = tuple(remaining[(start + j) % m] for j in range(width))
        else:
            block = ()
        active = always + block
        if not active:
            active = (i_n,)
        return i_n, active

    coverage = {}
    for i in affine:
        coverage[i] = len(affine)
    for i in always:
        coverage[i] = 1
    for i in remaining:
        coverage[i] = math.ceil(len(remaining) / block_size)
    return Schedule(select=select, coverage=coverage,
                    window=max(coverage.values()))


# ---------------------------------------------------------------------------
# Relaxation rules
# ---------------------------------------------------------------------------

def full_extrapolation(n: int, lo: float, hi: float) -> float:
    """Always take the largest admissible relaxation."""
    return hi


def alternating_extrapolation(period: int = 3, reduced: float = 0.5):
    """Take half the extrapolation every ``period`` iterations, the full
    one otherwise."""
    if period < 1:
        raise ValueError("period must be >= 1")

    def rule(n: int, lo: float, hi: float) -> float:
        return hi * reduced if n % period == 0 else hi

    return rule


# ---------------------------------------------------------------------------
# Control and trace
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ControlConfig:
    """Per-run solver controls.

    ``weight_rule(n, active_ids)`` returns the activation weights (uniform
    when None); they must lie in [0, 1], sum to 1, and give at least
    ``epsilon`` to the index with the largest activation move.
    ``relaxation_rule(n, lo, hi)`` picks the relaxation within the
    admissible interval (clamped afterwards).
    """

    schedule: Schedule
    epsilon: float = 0.01
    weight_rule: Optional[Callable[[int, tuple], Array]] = None
    relaxation_rule: Callable[[int, float, float], float] = full_extrapolation
    max_iter: int = 100_000
    theta_tol: float = 1e-12
    step_tol: float = 1e-9

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.theta_tol < 0 or self.step_tol < 0:
            raise ValueError("tolerances must be nonnegative")


class SolveStatus(Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class TraceRecord:
    """One iteration: selection, activation size theta, relaxation and its
    admissible interval, step and anchor distances."""

    n: int
    selected: Optional[int]
    active: tuple
    theta: float
    lam: float
    lam_lo: float
    lam_hi: float
    step_norm: float
    anchor_dist: float
    degenerate: bool = False


@dataclass
class SolveTrace:
    records: list = field(default_factory=list)
    status: SolveStatus = SolveStatus.MAX_ITER
    residuals: Optional[list] = None


def _weights_for(config: ControlConfig, n: int, active: tuple,
                 thetas: Array) -> Array:
    if config.weight_rule is None:
        w = np.full(len(active), 1.0 / len(active))
    else:
        w = np.asarray(config.weight_rule(n, active), dtype=float)
        if w.shape != (len(active),):
            raise ValueError("weight rule returned the wrong number of weights")
    if np.any(w < 0.0) or np.any(w > 1.0) or abs(float(np.sum(w)) - 1.0) > 1e-12:
        raise ValueError("weights must lie in [0, 1] and sum to 1")
    j = int(np.argmax(thetas))  # smallest index among the maximizers
    if w[j] < config.epsilon - 1e-15:
        raise ValueError(
            f"weight {w[j]:.3g} at the maximal activation is below epsilon={config.epsilon}")
    return w


def step(x: Array, problem: Problem, config: ControlConfig, n: int) -> tuple:
    """One iteration of the block-iterative extrapolated scheme.

    Returns ``(x_next, record)``.  The sequence must originate at the
    anchor (x at iteration 0 is ``problem.x0``): the anchored re-projection
    is only valid along such trajectories, and feeding an unrelated iterate
    can cut away the solution set.  Raises InfeasibleHalfspacesError if the
    re-projection detects an empty halfspace intersection.
    """
    i_n, active = config.schedule.select(n)
    if not active:
        raise ValueError("schedule produced an empty activation block")
    if i_n is None:
        z = x
        reproject = None
    else:
        constraint = problem.constraints[i_n]
        if not isinstance(constraint, AffineSubspace):
            raise ValueError(f"selected constraint {i_n} is not an affine subspace")
        reproject = constraint.projector
        z = np.asarray(reproject(x), dtype=float)

    acts = [_activation(problem.constraints[i], z, n) for i in active]
    thetas = np.array([float(np.dot(a - z, a - z)) for a in acts])
    w = _weights_for(config, n, active, thetas)
    positive = w > 0.0
    theta = float(np.dot(w[positive], thetas[positive]))

    degenerate = False
    lam = lam_lo = lam_hi = 0.0
    if theta <= config.theta_tol:
        t = z
    else:
        d = np.zeros_like(z)
        for wi, a in zip(w, acts):
            if wi > 0.0:
                d += wi * a
        dz = d - z
        dz2 = float(np.dot(dz, dz))
        y = (np.asarray(reproject(d), dtype=float) if reproject is not None else d) - z
        ny2 = float(np.dot(y, y))
        if ny2 <= DEGENERATE_RATIO * dz2:
            t = z
            degenerate = True
        else:
            lam_lo = config.epsilon * theta / dz2
            lam_hi = theta / ny2
            lam = min(max(config.relaxation_rule(n, lam_lo, lam_hi), lam_lo), lam_hi)
            t = z + lam * y

    anchor_dist = float(np.linalg.norm(x - problem.x0))
    x_next, _ = q_operator(problem.x0, x, t)
    record = TraceRecord(n=n, selected=i_n, active=tuple(active), theta=theta,
                         lam=lam, lam_lo=lam_lo, lam_hi=lam_hi,
                         step_norm=float(np.linalg.norm(x_next - x)),
                         anchor_dist=anchor_dist, degenerate=degenerate)
    return x_next, record


def solve(problem: Problem, config: ControlConfig) -> tuple:
    """Iterate :func:`step` until stationarity over a full coverage window
    or ``max_iter``; returns ``(x, trace)``.

    Stationarity means theta_n <= theta_tol and |x_{n+1} - x_n| <= step_tol
    on ``schedule.window`` consecutive iterations, which guarantees every
    constraint was activated while the iterate stood still.
    """
    x = problem.x0
    trace = SolveTrace()
    quiet = 0
    for n in range(config.max_iter):
        try:
            x_next, record = step(x, problem, config, n)
        except InfeasibleHalfspacesError:
            trace.status = SolveStatus.INFEASIBLE
            return x, trace
        trace.records.append(record)
        x = x_next
        if record.theta <= config.theta_tol and record.step_norm <= config.step_tol:
            quiet += 1
            if quiet >= config.schedule.window:
                trace.status = SolveStatus.CONVERGED
                break
        else:
            quiet = 0
    n_last = trace.records[-1].n if trace.records else 0
    trace.residuals = [constraint_residual(c, x, n_last) for c in problem.constraints]
    return x, trace


# ---------------------------------------------------------------------------
# Classical baselines
# ---------------------------------------------------------------------------

def haugazeau_periodic(x0: Array, projectors: Sequence[Callable[[Array], Array]],
                       iters: int) -> Array:
    """Serial anchored projections: activate one set per iteration in cyclic
    order and re-project the anchor through the two-halfspace closed form."""
    if not projectors:
        raise ValueError("need at least one projector")
    x0 = as_signal(x0)
    x = x0
    m = len(projectors)
    for n in range(iters):
        t = np.asarray(projectors[n % m](x), dtype=float)
        x, _ = q_operator(x0, x, t)
    return x


def pierra_parallel(x0: Array, projectors: Sequence[Callable[[Array], Array]],
                    iters: int, callback: Optional[Callable] = None) -> Array:
    """Simultaneous anchored projections with extrapolated relaxation.

    All sets are activated each iteration with uniform weights; the
    averaged move is extrapolated by theta_n / |y_n|^2 before the anchor
    re-projection.  ``callback(n, theta, lam, x)`` is invoked once per
    iteration when supplied.
    """
    if not projectors:
        raise ValueError("need at least one projector")
    x0 = as_signal(x0)
    x = x0
    w = 1.0 / len(projectors)
    for n in range(iters):
        acts = [np.asarray(proj(x), dtype=float) for proj in projectors]
        thetas = [float(np.dot(a - x, a - x)) for a in acts]
        theta = w * sum(thetas)
        lam = 0.0
        if theta == 0.0:
            t = x
        else:
            d = np.zeros_like(x)
            for a in acts:
                d += w * a
            y = d - x
            ny2 = float(np.dot(y, y))
            if ny2 == 0.0:
                t = x
            else:
                lam = theta / ny2
                t = x + lam * y
        if callback is not None:
            callback(n, theta, lam, x)
        x, _ = q_operator(x0, x, t)
    return x
