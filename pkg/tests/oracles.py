"""Independent oracles used by the tests.

These deliberately avoid the code paths they validate: the isotonic oracle
solves the cone-constrained least-squares problem by projected gradient in
an increment parametrization (no adjacent pooling), the halfspace oracle
enumerates KKT candidates for arbitrary inequality pairs, and the affine
oracle solves the equality-constrained normal equations directly.
"""
from __future__ import annotations

import numpy as np


def isotonic_qp_batch(vs: np.ndarray, iters: int = 100_000) -> np.ndarray:
    """Projection of each row of ``vs`` onto the nondecreasing cone.

    Parametrize y = A u with A lower-triangular ones and u[1:] >= 0; then
    minimize |A u - v|^2 by projected gradient with step 1/|A^T A|.
    """
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    m, d = vs.shape
    a = np.tril(np.ones((d, d)))
    h = a.T @ a
    step = 1.0 / np.linalg.norm(h, 2)
    u = np.zeros((m, d))
    u[:, 0] = vs[:, 0]
    at_v = vs @ a
    for _ in range(iters):
        u -= step * (u @ h - at_v)
        u[:, 1:] = np.maximum(u[:, 1:], 0.0)
    return u @ a.T


def isotonic_qp(v: np.ndarray, iters: int = 100_000) -> np.ndarray:
    return isotonic_qp_batch(np.asarray(v, dtype=float)[None, :], iters)[0]


def project_two_halfspaces(x0, a1, b1, a2, b2, feas_tol=1e-9):
    """Projection of x0 onto {<a1,x> <= b1} intersect {<a2,x> <= b2} by KKT
    candidate enumeration; returns None when the intersection is empty."""
    x0 = np.asarray(x0, dtype=float)
    candidates = [x0]
    n1 = float(np.dot(a1, a1))
    n2 = float(np.dot(a2, a2))
    if n1 > 0:
        candidates.append(x0 - ((np.dot(a1, x0) - b1) / n1) * a1)
    if n2 > 0:
        candidates.append(x0 - ((np.dot(a2, x0) - b2) / n2) * a2)
    if n1 > 0 and n2 > 0:
        gram = np.array([[n1, float(np.dot(a1, a2))], [float(np.dot(a1, a2)), n2]])
        if np.linalg.det(gram) > 1e-14 * n1 * n2:
            lam = np.linalg.solve(gram, [np.dot(a1, x0) - b1, np.dot(a2, x0) - b2])
            candidates.append(x0 - lam[0] * a1 - lam[1] * a2)
    scale = max(1.0, n1, n2)
    best, best_dist = None, np.inf
    for cand in candidates:
        if np.dot(a1, cand) - b1 > feas_tol * scale:
            continue
        if np.dot(a2, cand) - b2 > feas_tol * scale:
            continue
        dist = float(np.linalg.norm(cand - x0))
        if dist < best_dist:
            best, best_dist = cand, dist
    return best


def youla_two_subspace(x0, proj_u, proj_v, p, iters):
    """Classical alternating scheme for one subspace membership plus one
    prescribed subspace projection, started at the anchor."""
    x = np.asarray(x0, dtype=float)
    for _ in range(iters):
        pu = proj_u(x)
        x = p + pu - proj_v(pu)
    return x


def affine_best_approx(basis_u, basis_v, p, x0):
    """Exact solution of min |x - x0| s.t. x in range(basis_u) and
    proj_V x = p, via the KKT system (bases orthonormal)."""
    b = basis_v.T @ basis_u
    d = basis_v.T @ p
    c_free = basis_u.T @ x0
    lam = np.linalg.solve(b @ b.T, b @ c_free - d)
    return basis_u @ (c_free - b.T @ lam)
