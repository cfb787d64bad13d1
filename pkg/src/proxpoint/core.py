"""Signals, operator contracts, and randomized property checkers.

The ambient space is finite-dimensional Euclidean: a signal is a 1-D
float64 ndarray with finite entries.  Operators are wrapped in a small
value type that carries the declared regularity class so that downstream
code (and the property checkers below) can verify the declaration.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

Array = np.ndarray

# Tolerance hierarchy used across the package: algebraic identities are
# checked to ALGEBRAIC_TOL, iterative limits to ITERATIVE_TOL.
ALGEBRAIC_TOL = 1e-10
ITERATIVE_TOL = 1e-6


def as_signal(values, dim: Optional[int] = None) -> Array:
    """Coerce ``values`` to a finite 1-D float64 vector.

    Raises ValueError on non-1-D input, non-finite entries, or (when
    ``dim`` is given) a length mismatch.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"signal must be 1-D, got shape {x.shape}")
    if x.size == 0:
        raise ValueError("signal must have positive dimension")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal has non-finite entries")
    if dim is not None and x.shape[0] != dim:
        raise ValueError(f"signal has dim {x.shape[0]}, expected {dim}")
    return x


def dot(x: Array, y: Array) -> float:
    """Euclidean inner product of two signals of equal dimension."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(np.dot(x, y))


def norm(x: Array) -> float:
    """Euclidean norm."""
    return float(np.linalg.norm(x))


class Regularity(Enum):
    """Declared regularity class of an operator."""

    FIRMLY_NONEXPANSIVE = "firmly_nonexpansive"
    CLASS_T = "class_t"
    GENERAL = "general"


@dataclass(frozen=True)
class Operator:
    """An evaluatable map on signals with a declared regularity class.

    ``fn`` must preserve dimension and be deterministic.  The declared
    ``regularity`` is a claim, not an enforced property; use
    :func:`check_firmly_nonexpansive` / :func:`check_class_t` to test it.
    """

    fn: Callable[[Array], Array]
    regularity: Regularity = Regularity.GENERAL
    descriptor: str = "operator"

    def __call__(self, x: Array) -> Array:
        return self.fn(x)


def identity_operator() -> Operator:
    """The identity map (firmly nonexpansive, fixes everything)."""
    return Operator(lambda x: x, Regularity.FIRMLY_NONEXPANSIVE, "identity")


def _power_iteration(forward, adjoint, dim_in: int, max_iter: int = 200,
                     rtol: float = 1e-12, seed: int = 0) -> float:
    """Largest singular value of a linear map given by forward/adjoint."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim_in)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        w = np.asarray(forward(v), dtype=float)
        sigma_new = float(np.linalg.norm(w))
        if sigma_new == 0.0:
            return 0.0
        v = np.asarray(adjoint(w), dtype=float)
        v /= np.linalg.norm(v)
        if abs(sigma_new - sigma) <= rtol * sigma_new:
            sigma = sigma_new
            break
        sigma = sigma_new
    return sigma


@dataclass(frozen=True)
class LinearMap:
    """Bounded linear map with adjoint and an upper bound on its norm.

    ``norm_bound`` must satisfy ``|L x| <= norm_bound * |x|``; builders
    that estimate it numerically inflate the estimate so the bound holds.
    """

    forward: Callable[[Array], Array]
    adjoint: Callable[[Array], Array]
    norm_bound: float
    dim_in: int
    dim_out: int

    def __post_init__(self):
        if not (self.norm_bound > 0):
            raise ValueError("norm_bound must be positive")

    @classmethod
    def from_matrix(cls, a: Array) -> "LinearMap":
        """Wrap a dense matrix; the norm bound comes from power iteration
        (200 iterations or relative change < 1e-12) inflated by 1e-9."""
        a = np.asarray(a, dtype=float)
        if a.ndim != 2:
            raise ValueError("matrix must be 2-D")
        sigma = _power_iteration(lambda x: a @ x, lambda y: a.T @ y, a.shape[1])
        if sigma == 0.0:
            raise ValueError("zero linear map")
        return cls(
            forward=lambda x: a @ x,
            adjoint=lambda y: a.T @ y,
            norm_bound=sigma * (1.0 + 1e-9),
            dim_in=a.shape[1],
            dim_out=a.shape[0],
        )


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a randomized operator-property check.

    ``worst_violation`` is the largest observed residual of the tested
    inequality (non-positive means the inequality held with slack) and
    ``witness`` is the sample realizing it.  The RNG seed is recorded so
    a failure can be replayed.
    """

    passed: bool
    trials: int
    tol: float
    worst_violation: float
    witness: Optional[tuple]
    seed: Optional[int]


def check_firmly_nonexpansive(op: Callable[[Array], Array], dim: Optional[int] = None,
                              trials: int = 10_000, tol: float = 1e-10,
                              seed: int = 0, sampler=None) -> CheckReport:
    """Test ``|Fx-Fy|^2 + |(x-Fx)-(y-Fy)|^2 <= |x-y|^2 + tol`` on random pairs.

    Pairs are standard normal in dimension ``dim`` unless a ``sampler``
    callable ``rng -> (x, y)`` is supplied.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if sampler is None:
        if dim is None:
            raise ValueError("either dim or sampler is required")
        def sampler(rng):
            return rng.standard_normal(dim), rng.standard_normal(dim)
    rng = np.random.default_rng(seed)
    worst = -np.inf
    witness = None
    for _ in range(trials):
        x, y = sampler(rng)
        fx = np.asarray(op(x), dtype=float)
        fy = np.asarray(op(y), dtype=float)
        lhs = np.dot(fx - fy, fx - fy)
        res = (x - fx) - (y - fy)
        lhs += np.dot(res, res)
        d = x - y
        violation = lhs - np.dot(d, d)
        if violation > worst:
            worst = violation
            witness = (np.array(x), np.array(y))
    return CheckReport(passed=bool(worst <= tol), trials=trials, tol=tol,
                       worst_violation=float(worst), witness=witness, seed=seed)


def check_class_t(op: Callable[[Array], Array], fixed_points: Sequence[Array],
                  dim: Optional[int] = None, trials: int = 1_000,
                  tol: float = 1e-10, seed: int = 0, sampler=None) -> CheckReport:
    """Test ``<y - Tx, x - Tx> <= tol`` for sampled ``x`` and fixed points ``y``.

    Every supplied fixed point must actually be fixed to within ``tol``;
    a non-fixed point raises ValueError.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    fixed = [as_signal(y) for y in fixed_points]
    if not fixed:
        raise ValueError("at least one fixed point is required")
    for y in fixed:
        ty = np.asarray(op(y), dtype=float)
        if np.linalg.norm(ty - y) > tol:
            raise ValueError(
                f"supplied fixed point is not fixed: |Ty - y| = {np.linalg.norm(ty - y):.3e}")
    if sampler is None:
        if dim is None:
            dim = fixed[0].shape[0]
        def sampler(rng):
            return rng.standard_normal(dim)
    rng = np.random.default_rng(seed)
    worst = -np.inf
    witness = None
    for _ in range(trials):
        x = sampler(rng)
        tx = np.asarray(op(x), dtype=float)
        for y in fixed:
            violation = float(np.dot(y - tx, x - tx))
            if violation > worst:
                worst = violation
                witness = (np.array(x), np.array(y))
    return CheckReport(passed=bool(worst <= tol), trials=trials, tol=tol,
                       worst_violation=float(worst), witness=witness, seed=seed)
