"""Catalog of observation operators, projections, and prox maps.

Scalar maps accept a float or an ndarray and act elementwise, so the
coordinatewise lift of each scalar observation model comes for free.
Vector operators take and return 1-D float64 arrays.  Convex sets are
passed around as their exact projectors (callables).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import expit

from .core import (
    ALGEBRAIC_TOL,
    Array,
    LinearMap,
    Operator,
    Regularity,
    as_signal,
)


@dataclass(frozen=True)
class Interval:
    """Nonempty closed interval, possibly unbounded on either side."""

    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval bounds must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")
        if math.isinf(self.lo) and math.isinf(self.hi) and self.lo == self.hi:
            raise ValueError("interval bounds cannot both be infinite of the same sign")

    @classmethod
    def symmetric(cls, omega: float) -> "Interval":
        if omega < 0:
            raise ValueError("omega must be nonnegative")
        return cls(-omega, omega)


@dataclass(frozen=True)
class BlockPartition:
    """Ordered contiguous index ranges (half-open) covering ``0..dim``."""

    blocks: tuple

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("partition needs at least one block")
        expected = 0
        for start, stop in self.blocks:
            if start != expected or stop <= start:
                raise ValueError("blocks must be nonempty, contiguous, and ordered")
            expected = stop

    @property
    def dim(self) -> int:
        return self.blocks[-1][1]

    @classmethod
    def even(cls, dim: int, num_blocks: int) -> "BlockPartition":
        if not (1 <= num_blocks <= dim):
            raise ValueError("need 1 <= num_blocks <= dim")
        edges = np.linspace(0, dim, num_blocks + 1).astype(int)
        return cls(tuple((int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])))


def _match_scalar(out: Array, reference) -> "float | Array":
    if np.ndim(reference) == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# Scalar observation maps (elementwise on arrays)
# ---------------------------------------------------------------------------

def soft_threshold(xi, omega: Interval):
    """Dead-zone shrinkage: xi-hi above the interval, 0 inside, xi-lo below."""
    x = np.asarray(xi, dtype=float)
    out = np.where(x > omega.hi, x - omega.hi,
                   np.where(x < omega.lo, x - omega.lo, 0.0))
    return _match_scalar(out, xi)


def hard_clip(xi, interval: Interval):
    """Saturating clip onto the interval: min(max(xi, lo), hi)."""
    out = np.clip(np.asarray(xi, dtype=float), interval.lo, interval.hi)
    return _match_scalar(out, xi)


_SOFT_CLIP_KINDS = {
    "tanh": np.tanh,
    "atan": lambda x: (2.0 / np.pi) * np.arctan(x),
    "rational": lambda x: x / (1.0 + np.abs(x)),
    "exp_sat": lambda x: np.sign(x) * (-np.expm1(-np.abs(x))),
}


def soft_clip(xi, kind: str):
    """Smooth saturation: tanh, (2/pi)atan, xi/(1+|xi|), or sign(xi)(1-e^{-|xi|})."""
    try:
        fn = _SOFT_CLIP_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown soft clip kind {kind!r}; "
                         f"choose from {sorted(_SOFT_CLIP_KINDS)}") from None
    return _match_scalar(fn(np.asarray(xi, dtype=float)), xi)


def logistic_encoder(xi, eta: float):
    """Logistic response 1/(1 + exp(eta - xi)); increasing, range (0, 1)."""
    out = expit(np.asarray(xi, dtype=float) - eta)
    return _match_scalar(out, xi)


def hard_threshold(xi, omega: float):
    """Dead-zone truncation: xi where |xi| > omega, else 0 (discontinuous)."""
    x = np.asarray(xi, dtype=float)
    out = np.where(np.abs(x) > omega, x, 0.0)
    return _match_scalar(out, xi)


def hard_threshold_transform(chi, omega: float):
    """Lossless transform of hard-threshold observations; composed with the
    hard thresholder it gives the soft thresholder on [-omega, omega]."""
    c = np.asarray(chi, dtype=float)
    return _match_scalar(c - omega * np.sign(c), chi)


def sqrt_sampler(xi, omega: float):
    """Non-Lipschitz sampler sign(xi) sqrt(xi^2 - omega^2) outside the dead zone."""
    x = np.asarray(xi, dtype=float)
    out = np.where(np.abs(x) > omega,
                   np.sign(x) * np.sqrt(np.maximum(x * x - omega * omega, 0.0)),
                   0.0)
    return _match_scalar(out, xi)


def sqrt_sampler_transform(chi, omega: float):
    """Lossless transform of sqrt-sampler observations; the composition with
    the sampler is the soft thresholder on [-omega, omega]."""
    c = np.asarray(chi, dtype=float)
    out = np.sign(c) * (np.sqrt(c * c + omega * omega) - omega)
    return _match_scalar(out, chi)


def sqrt_sampler_prescription(chi: float, omega: float):
    """Turn a raw sqrt-sampler observation into an equivalent prescription.

    Returns ``(sigma(chi), phi)`` where ``sigma`` is the lossless transform
    and ``phi = sigma o sampler`` is the firmly nonexpansive scalar map the
    prescription refers to (pointwise equal to the soft thresholder).
    """
    if omega <= 0:
        raise ValueError("omega must be positive")

    def phi(xi):
        return sqrt_sampler_transform(sqrt_sampler(xi, omega), omega)

    return sqrt_sampler_transform(chi, omega), phi


# ---------------------------------------------------------------------------
# Basis and block operators
# ---------------------------------------------------------------------------

def _check_orthonormal(basis: Array) -> Array:
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
        raise ValueError("basis must be a square matrix")
    gram = basis.T @ basis
    if np.max(np.abs(gram - np.eye(basis.shape[0]))) > ALGEBRAIC_TOL:
        raise ValueError("basis is not orthonormal")
    return basis


def coordinatewise_basis_operator(x: Array, basis: Optional[Array],
                                  scalar_ops: Sequence[tuple]) -> Array:
    """Apply scalar maps to basis coefficients: sum_i beta_i rho_i(<x, e_i>) e_i.

    ``basis`` has the orthonormal vectors e_i as columns (None = standard
    basis).  ``scalar_ops`` is a sequence of (beta_i, rho_i) where rho_i is
    increasing and (1/beta_i)-Lipschitz; under that hypothesis the induced
    map is firmly nonexpansive.
    """
    x = as_signal(x)
    if len(scalar_ops) != x.shape[0]:
        raise ValueError("need one (beta, rho) pair per coordinate")
    if basis is None:
        coeffs = x
    else:
        basis = _check_orthonormal(basis)
        coeffs = basis.T @ x
    out = np.array([beta * float(rho(c)) for (beta, rho), c in zip(scalar_ops, coeffs)])
    if basis is None:
        return out
    return basis @ out


def group_soft_threshold(x: Array, part: BlockPartition, rho: Sequence[float]) -> Array:
    """Blockwise shrinkage (1 - rho_i / max(|x_i|, rho_i)) x_i; small blocks vanish."""
    x = as_signal(x, dim=part.dim)
    if len(rho) != len(part.blocks):
        raise ValueError("need one threshold per block")
    out = np.empty_like(x)
    for (start, stop), r in zip(part.blocks, rho):
        if r <= 0:
            raise ValueError("block thresholds must be positive")
        block = x[start:stop]
        out[start:stop] = (1.0 - r / max(float(np.linalg.norm(block)), r)) * block
    return out


def block_norm_shrink(x: Array, part: BlockPartition,
                      scalar_prox: Sequence[Callable[[float], float]],
                      rho: Sequence[float]) -> Array:
    """Blockwise prox through the norm: prox(|x_i|) x_i/|x_i| above rho_i, else 0.

    Each ``scalar_prox[i]`` must be the prox of an even function vanishing
    at 0, and ``rho[i]`` the largest subgradient of that function at 0.
    """
    x = as_signal(x, dim=part.dim)
    if not (len(scalar_prox) == len(rho) == len(part.blocks)):
        raise ValueError("need one scalar prox and one rho per block")
    out = np.zeros_like(x)
    for (start, stop), prox, r in zip(part.blocks, scalar_prox, rho):
        block = x[start:stop]
        nx = float(np.linalg.norm(block))
        if nx > r:
            out[start:stop] = (float(prox(nx)) / nx) * block
    return out


# ---------------------------------------------------------------------------
# Set-distance observations
# ---------------------------------------------------------------------------

def isotonic_projection(v: Array) -> Array:
    """Euclidean projection onto the nondecreasing cone by adjacent pooling.

    Left-to-right sweep; a new element is pooled into its predecessor block
    while the predecessor's mean strictly exceeds the running mean, so ties
    are left untouched.  Each output level is the exact mean of its block.
    """
    v = as_signal(v)
    sums: list[float] = []
    counts: list[int] = []
    for val in v:
        cur_sum, cur_count = float(val), 1
        while sums and sums[-1] * cur_count > cur_sum * counts[-1]:
            cur_sum += sums.pop()
            cur_count += counts.pop()
        sums.append(cur_sum)
        counts.append(cur_count)
    out = np.empty_like(v)
    pos = 0
    for s, c in zip(sums, counts):
        out[pos:pos + c] = s / c
        pos += c
    return out


def ball_saturation(y: Array, rho: float) -> Array:
    """Projection onto the centered ball of radius rho (hard saturation)."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    y = as_signal(y)
    ny = float(np.linalg.norm(y))
    if ny > rho:
        return (rho / ny) * y
    return y


def distance_prox(x: Array, proj: Callable[[Array], Array], omega: float) -> Array:
    """Prox of omega times the distance to the set with exact projector ``proj``:
    move to the projection when within omega of the set, else move omega toward it."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    x = as_signal(x)
    r = np.asarray(proj(x), dtype=float)
    d = float(np.linalg.norm(x - r))
    if d > omega:
        return r + (1.0 - omega / d) * (x - r)
    return r


def vector_hard_threshold_observation(x: Array, proj: Callable[[Array], Array],
                                      omega: float) -> Array:
    """Discontinuous set-distance thresholder: x if dist > omega, else its projection."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    x = as_signal(x)
    r = np.asarray(proj(x), dtype=float)
    if float(np.linalg.norm(x - r)) > omega:
        return x
    return r


def _set_transform(y: Array, proj: Callable[[Array], Array], omega: float) -> Array:
    """Lossless transform for hard-thresholded observations: step omega toward
    the set when outside it, identity on members."""
    y = np.asarray(y, dtype=float)
    r = np.asarray(proj(y), dtype=float)
    d = float(np.linalg.norm(y - r))
    if d > 0.0:
        return y + (omega / d) * (r - y)
    return y


@dataclass(frozen=True)
class EquivalentPrescription:
    """A firmly nonexpansive operator together with its prescribed value.

    Enforcing ``F x = p`` is equivalent to reproducing the raw observation
    the pair was derived from; ``provenance`` records that derivation.
    """

    F: Operator
    p: Array
    provenance: str


def equivalent_prescription_from_hard(q: Array, proj: Callable[[Array], Array],
                                      omega: float,
                                      descriptor: str = "set") -> EquivalentPrescription:
    """Convert a raw set-distance hard-threshold observation into an
    equivalent proximal prescription.

    ``q`` must come from :func:`vector_hard_threshold_observation` with the
    same set and omega.  The returned operator is the prox of omega times
    the set distance, and ``F x = p`` holds exactly when the raw observation
    of ``x`` equals ``q``.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    q = as_signal(q)
    p = _set_transform(q, proj, omega)
    op = Operator(lambda x: distance_prox(x, proj, omega),
                  Regularity.FIRMLY_NONEXPANSIVE,
                  f"distance_prox({descriptor}, omega={omega})")
    return EquivalentPrescription(F=op, p=p,
                                  provenance=f"hard threshold at distance {omega} from {descriptor}")


# ---------------------------------------------------------------------------
# Cocoercive aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObservationSpec:
    """One observation block: q = Q(L xbar) with Q beta-cocoercive."""

    L: LinearMap
    Q: Operator
    beta: float
    q: Array

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        as_signal(self.q, dim=self.L.dim_out)


def cocoercive_aggregate(specs: Sequence[ObservationSpec]) -> EquivalentPrescription:
    """Aggregate cocoercive observation blocks into a single prescription.

    With beta = 1 / sum(|L_i|^2 / beta_i), the operator
    F = beta * sum_i L_i* o Q_i o L_i is firmly nonexpansive and
    p = beta * sum_i L_i* q_i satisfies: F x = p iff every block reproduces
    its observation, Q_i(L_i x) = q_i.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("need at least one observation block")
    dim = specs[0].L.dim_in
    for spec in specs:
        if spec.L.dim_in != dim:
            raise ValueError("all observation blocks must share the domain dimension")
    beta = 1.0 / sum(s.L.norm_bound ** 2 / s.beta for s in specs)
    p = beta * sum(s.L.adjoint(s.q) for s in specs)

    def fn(x: Array) -> Array:
        acc = np.zeros(dim)
        for s in specs:
            acc += s.L.adjoint(np.asarray(s.Q(s.L.forward(x)), dtype=float))
        return beta * acc

    labels = ", ".join(s.Q.descriptor for s in specs)
    op = Operator(fn, Regularity.FIRMLY_NONEXPANSIVE,
                  f"cocoercive aggregate of [{labels}]")
    return EquivalentPrescription(F=op, p=np.asarray(p, dtype=float),
                                  provenance=f"aggregation of {len(specs)} blocks")


# ---------------------------------------------------------------------------
# Exact projectors onto simple sets
# ---------------------------------------------------------------------------

def box_projector(lo, hi, descriptor: str = "box") -> Operator:
    """Coordinatewise projection onto [lo, hi] (scalars or per-coordinate arrays)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(lo > hi):
        raise ValueError("empty box")
    return Operator(lambda x: np.clip(x, lo, hi),
                    Regularity.FIRMLY_NONEXPANSIVE, descriptor)


def ball_projector(radius: float, center: Optional[Array] = None,
                   descriptor: str = "ball") -> Operator:
    """Projection onto the ball of given radius (default centered at 0)."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if center is None:
        return Operator(lambda x: ball_saturation(x, radius),
                        Regularity.FIRMLY_NONEXPANSIVE, descriptor)
    c = as_signal(center)
    return Operator(lambda x: c + ball_saturation(np.asarray(x, dtype=float) - c, radius),
                    Regularity.FIRMLY_NONEXPANSIVE, descriptor)


def halfspace_projector(normal: Array, offset: float,
                        descriptor: str = "halfspace") -> Operator:
    """Projection onto {x : <normal, x> <= offset}."""
    a = as_signal(normal)
    na2 = float(np.dot(a, a))
    if na2 == 0.0:
        raise ValueError("normal must be nonzero")

    def proj(x):
        excess = float(np.dot(a, x)) - offset
        if excess > 0.0:
            return x - (excess / na2) * a
        return np.asarray(x, dtype=float)

    return Operator(proj, Regularity.FIRMLY_NONEXPANSIVE, descriptor)


def hyperplane_projector(normal: Array, offset: float,
                         descriptor: str = "hyperplane") -> Operator:
    """Projection onto the affine set {x : <normal, x> = offset}."""
    a = as_signal(normal)
    na2 = float(np.dot(a, a))
    if na2 == 0.0:
        raise ValueError("normal must be nonzero")
    return Operator(lambda x: x - ((float(np.dot(a, x)) - offset) / na2) * a,
                    Regularity.FIRMLY_NONEXPANSIVE, descriptor)


# ---------------------------------------------------------------------------
# Band limitation, total variation, subgradient projection
# ---------------------------------------------------------------------------

def bandlimit_projector(n: int, b: int) -> Operator:
    """Orthogonal projector keeping the DC bin plus (b-1)/2 conjugate pairs
    of the length-n DFT; b must be odd and 1 <= b <= n."""
    if not (1 <= b <= n):
        raise ValueError(f"need 1 <= B <= N, got B={b}, N={n}")
    if b % 2 == 0:
        raise ValueError(f"B must be odd (DC bin plus conjugate pairs), got {b}")
    keep = (b - 1) // 2

    def proj(x):
        spectrum = np.fft.rfft(np.asarray(x, dtype=float))
        spectrum[keep + 1:] = 0.0
        return np.fft.irfft(spectrum, n=n)

    return Operator(proj, Regularity.FIRMLY_NONEXPANSIVE, f"bandlimit(N={n}, B={b})")


def tv(x: Array) -> float:
    """Total variation: sum of absolute consecutive differences."""
    x = as_signal(x)
    if x.shape[0] < 2:
        raise ValueError("total variation needs dim >= 2")
    return float(np.sum(np.abs(np.diff(x))))


def tv_subgradient(x: Array) -> Array:
    """Chain-rule subgradient of tv: adjoint difference of sign(diff(x)),
    with sign(0) = 0."""
    x = as_signal(x)
    if x.shape[0] < 2:
        raise ValueError("total variation needs dim >= 2")
    u = np.sign(np.diff(x))
    s = np.zeros_like(x)
    s[:-1] -= u
    s[1:] += u
    return s


def subgradient_projector(f: Callable[[Array], float],
                          s: Callable[[Array], Array], x: Array) -> Array:
    """One subgradient-projection step onto the level set {f <= 0}.

    Returns ``x - (f(x)/|s(x)|^2) s(x)`` when f(x) > 0 and x itself
    otherwise.  A zero subgradient at a point with f(x) > 0 signals an
    inconsistent selection and raises ValueError.
    """
    x = as_signal(x)
    fx = float(f(x))
    if fx <= 0.0:
        return x
    g = np.asarray(s(x), dtype=float)
    g2 = float(np.dot(g, g))
    if g2 == 0.0:
        raise ValueError("zero subgradient at a point with f(x) > 0")
    return x - (fx / g2) * g


def level_set_operator(f: Callable[[Array], float], s: Callable[[Array], Array],
                       descriptor: str = "level set") -> Operator:
    """Subgradient projector onto {f <= 0} as a firmly quasinonexpansive map."""
    return Operator(lambda x: subgradient_projector(f, s, x),
                    Regularity.CLASS_T, descriptor)


def tv_ball_operator(gamma: float) -> Operator:
    """Subgradient projector onto the total-variation ball {tv <= gamma}."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return level_set_operator(lambda x: tv(x) - gamma, tv_subgradient,
                              f"tv ball (gamma={gamma:.6g})")


# ---------------------------------------------------------------------------
# Reference instances for the property suites
# ---------------------------------------------------------------------------

def firmly_nonexpansive_suite(dim: int = 8, seed: int = 0) -> list:
    """One representative instance of every catalog operator that is
    declared firmly nonexpansive, as (Operator, dim) pairs."""
    rng = np.random.default_rng(seed)
    omega = Interval.symmetric(1.0)
    suite = [
        (Operator(lambda x: x, Regularity.FIRMLY_NONEXPANSIVE, "identity"), dim),
        (Operator(lambda x: soft_threshold(x, omega),
                  Regularity.FIRMLY_NONEXPANSIVE, "soft threshold (omega=1)"), dim),
        (Operator(lambda x: hard_clip(x, omega),
                  Regularity.FIRMLY_NONEXPANSIVE, "hard clip [-1, 1]"), dim),
        (Operator(lambda x: logistic_encoder(x, 0.3),
                  Regularity.FIRMLY_NONEXPANSIVE, "logistic encoder (eta=0.3)"), dim),
        (Operator(lambda x: sqrt_sampler_transform(sqrt_sampler(x, 0.8), 0.8),
                  Regularity.FIRMLY_NONEXPANSIVE, "sqrt sampler composition (omega=0.8)"), dim),
        (Operator(lambda x: hard_threshold_transform(hard_threshold(x, 0.8), 0.8),
                  Regularity.FIRMLY_NONEXPANSIVE, "hard threshold composition (omega=0.8)"), dim),
        (Operator(isotonic_projection,
                  Regularity.FIRMLY_NONEXPANSIVE, "isotonic projection"), dim),
        (Operator(lambda x: ball_saturation(x, 1.5),
                  Regularity.FIRMLY_NONEXPANSIVE, "ball saturation (rho=1.5)"), dim),
        (bandlimit_projector(dim, 2 * ((dim - 1) // 4) + 1), dim),
    ]
    for kind in sorted(_SOFT_CLIP_KINDS):
        suite.append((Operator(lambda x, k=kind: soft_clip(x, k),
                               Regularity.FIRMLY_NONEXPANSIVE, f"soft clip ({kind})"), dim))

    basis = np.linalg.qr(rng.standard_normal((dim, dim)))[0]
    ops = tuple((1.0, np.tanh) for _ in range(dim))
    suite.append((Operator(lambda x: coordinatewise_basis_operator(x, basis, ops),
                           Regularity.FIRMLY_NONEXPANSIVE,
                           "tanh in a random orthonormal basis"), dim))

    part = BlockPartition.even(dim, 2)
    rho = (0.7, 1.3)
    suite.append((Operator(lambda x: group_soft_threshold(x, part, rho),
                           Regularity.FIRMLY_NONEXPANSIVE, "group soft threshold"), dim))
    prox = tuple((lambda t, r=r: max(t - r, 0.0)) for r in rho)
    suite.append((Operator(lambda x: block_norm_shrink(x, part, prox, rho),
                           Regularity.FIRMLY_NONEXPANSIVE, "block norm shrink"), dim))

    ball = ball_projector(0.8)
    suite.append((Operator(lambda x: distance_prox(x, ball, 0.5),
                           Regularity.FIRMLY_NONEXPANSIVE,
                           "distance prox (ball, omega=0.5)"), dim))

    spec_dim = max(dim // 2, 1)
    xbar = rng.standard_normal(dim)
    specs = []
    for q_op in (box_projector(-0.5, 0.5), ball_projector(0.9)):
        lin = LinearMap.from_matrix(rng.standard_normal((spec_dim, dim)))
        specs.append(ObservationSpec(L=lin, Q=q_op, beta=1.0,
                                     q=np.asarray(q_op(lin.forward(xbar)), dtype=float)))
    suite.append((cocoercive_aggregate(specs).F, dim))
    return suite
