"""Closed-form projection of an anchor onto two coupled halfspaces.

Given an anchor ``x0`` and points ``s``, ``t``, the target set is

    D = {x : <x - s, x0 - s> <= 0} intersect {x : <x - t, s - t> <= 0}.

``q_operator`` returns ``proj_D x0`` through a three-branch closed form;
``halfspace_pair_projection_oracle`` recomputes the same projection by
enumerating the KKT candidates and is used to validate the closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import Array, as_signal

# Cancellation guard: rho = mu*nu - chi^2 is clamped to 0 when within
# RHO_CLAMP * mu*nu of zero (rho's rounding error is eps * mu*nu, orders of
# magnitude below the window).
RHO_CLAMP = 1e-12
# With rho = 0 and chi < 0 the halfspaces are anti-collinear with slab gap
# -chi/sqrt(mu).  A gap below GAP_NOISE times the length scale of the
# triple is rounding noise, not a genuinely empty intersection.
GAP_NOISE = 1e-9


class InfeasibleHalfspacesError(RuntimeError):
    """The two halfspaces have numerically empty intersection."""


class QBranch(Enum):
    B1 = "degenerate"
    B2 = "segment"
    B3 = "interior"


@dataclass(frozen=True)
class QDiagnostics:
    """Scalars of the closed form: chi = <x0-s, s-t>, mu = |x0-s|^2,
    nu = |s-t|^2, rho = mu*nu - chi^2 (clamped), and the branch taken."""

    chi: float
    mu: float
    nu: float
    rho: float
    branch: QBranch


def q_operator(x0: Array, s: Array, t: Array) -> tuple:
    """Project the anchor ``x0`` onto D, returning (point, diagnostics).

    Branches: ``t`` when rho = 0 and chi >= 0; a point on the line through
    s and t when rho > 0 and chi*nu >= rho; otherwise the combination
    ``s + (nu/rho)(chi (x0-s) + mu (t-s))``.  Raises
    InfeasibleHalfspacesError when rho = 0 and chi < 0, which signals an
    empty D (violated feasibility along a solver trajectory).
    """
    x0 = as_signal(x0)
    s = as_signal(s, dim=x0.shape[0])
    t = as_signal(t, dim=x0.shape[0])
    xs = x0 - s
    st = s - t
    chi = float(np.dot(xs, st))
    mu = float(np.dot(xs, xs))
    nu = float(np.dot(st, st))
    rho = mu * nu - chi * chi
    if rho <= RHO_CLAMP * mu * nu:
        rho = 0.0
    if rho == 0.0:
        if chi < 0.0:
            scale = 1.0 + math.sqrt(mu) + math.sqrt(nu)
            if -chi <= GAP_NOISE * math.sqrt(mu) * scale:
                chi = 0.0
            else:
                raise InfeasibleHalfspacesError(
                    f"empty halfspace intersection: chi={chi:.6e}, "
                    f"mu={mu:.6e}, nu={nu:.6e}")
        return np.array(t), QDiagnostics(chi, mu, nu, rho, QBranch.B1)
    if chi * nu >= rho:
        point = x0 + (1.0 + chi / nu) * (t - s)
        return point, QDiagnostics(chi, mu, nu, rho, QBranch.B2)
    point = s + (nu / rho) * (chi * xs + mu * (t - s))
    return point, QDiagnostics(chi, mu, nu, rho, QBranch.B3)


def halfspace_pair_projection_oracle(x0: Array, s: Array, t: Array,
                                     feas_tol: float = 1e-9) -> Array:
    """Project ``x0`` onto D by enumerating the four KKT candidates.

    Candidates: x0 itself, the projection onto each boundary hyperplane,
    and the projection onto the intersection of the two boundary
    hyperplanes.  The feasible candidate closest to x0 is returned; if no
    candidate is feasible, D is empty and InfeasibleHalfspacesError is
    raised.
    """
    x0 = as_signal(x0)
    s = as_signal(s, dim=x0.shape[0])
    t = as_signal(t, dim=x0.shape[0])
    # Halfspace i is {x : <a_i, x> <= b_i}; a zero normal makes it vacuous.
    a1, b1 = x0 - s, float(np.dot(s, x0 - s))
    a2, b2 = s - t, float(np.dot(t, s - t))
    scale = max(1.0, float(np.dot(a1, a1)), float(np.dot(a2, a2)))

    candidates = [x0]
    n1 = float(np.dot(a1, a1))
    if n1 > 0.0:
        candidates.append(x0 - ((float(np.dot(a1, x0)) - b1) / n1) * a1)
    n2 = float(np.dot(a2, a2))
    if n2 > 0.0:
        candidates.append(x0 - ((float(np.dot(a2, x0)) - b2) / n2) * a2)
    if n1 > 0.0 and n2 > 0.0:
        gram = np.array([[n1, float(np.dot(a1, a2))],
                         [float(np.dot(a1, a2)), n2]])
        rhs = np.array([float(np.dot(a1, x0)) - b1, float(np.dot(a2, x0)) - b2])
        if np.linalg.det(gram) > 1e-14 * n1 * n2:
            lam = np.linalg.solve(gram, rhs)
            candidates.append(x0 - lam[0] * a1 - lam[1] * a2)

    best = None
    best_dist = np.inf
    for cand in candidates:
        if float(np.dot(a1, cand)) - b1 > feas_tol * scale:
            continue
        if float(np.dot(a2, cand)) - b2 > feas_tol * scale:
            continue
        dist = float(np.linalg.norm(cand - x0))
        if dist < best_dist:
            best, best_dist = cand, dist
    if best is None:
        raise InfeasibleHalfspacesError("no feasible KKT candidate: empty intersection")
    return best
