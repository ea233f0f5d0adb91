"""Discrete centered isotropic measures on the unit sphere.

A measure is a finite set of unit vectors u_i with positive weights c_i.
Isotropy means sum_i c_i u_i (x) u_i = Id (hence sum c_i = n), centering
means sum_i c_i u_i = 0.  This module validates and normalises such
measures, reduces their support by Caratheodory steps, evaluates the
weighted-determinant inequality det(sum t_i c_i u_i (x) u_i) >= prod t_i^c_i
together with its stability amplification factor, and lifts measures one
dimension up for the product-inequality machinery.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .rng import as_rng

__all__ = [
    "MeasureError", "SingularMomentError", "NotIsotropicError", "NoFrameError",
    "IsotropyReport", "DiscreteMeasure", "LiftedMeasure",
    "simplex_measure", "orthonormal_measure",
    "isotropize", "reduce_support", "support_bound",
    "ball_barthe_check", "BallBartheReport", "ball_barthe_stability_factor",
    "big_determinant_subset", "lift", "fit_orthonormal_frame",
    "scalar_split_bound",
]

UNIT_NORM_TOL = 1e-12
THETA_STAR_ENUM_CAP = 2_000_000
THETA_STAR_SAMPLES = 100_000


class MeasureError(ValueError):
    """Base class for measure failures."""


class SingularMomentError(MeasureError):
    """The moment matrix is singular; no isotropic linear image exists."""


class NotIsotropicError(MeasureError):
    """The operation requires an (approximately) isotropic input."""


class NoFrameError(MeasureError):
    """The clustering hypothesis for the orthonormal-frame fit fails."""


@dataclass(frozen=True)
class IsotropyReport:
    """Residuals of the isotropy, centering and total-mass conditions."""
    isotropy_residual: float
    centering_residual: float
    mass_residual: float

    @property
    def max_residual(self) -> float:
        return max(self.isotropy_residual, self.centering_residual, self.mass_residual)

    def ok(self, tol: float) -> bool:
        return self.max_residual <= tol


class DiscreteMeasure:
    """Unit vectors with positive weights on the sphere S^{n-1}."""

    def __init__(self, points, weights):
        P = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
        w = np.ascontiguousarray(np.atleast_1d(weights), dtype=float)
        if P.shape[0] != w.shape[0]:
            raise MeasureError("point/weight count mismatch")
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(w))):
            raise MeasureError("non-finite measure data")
        if np.any(w <= 0):
            raise MeasureError("weights must be positive")
        norms = np.linalg.norm(P, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            raise MeasureError(
                f"points must be unit vectors within {UNIT_NORM_TOL:g} "
                f"(worst deviation {np.abs(norms - 1.0).max():.3g})")
        P.flags.writeable = False
        w.flags.writeable = False
        self.points = P
        self.weights = w

    @property
    def k(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def moment_matrix(self) -> np.ndarray:
        return (self.points * self.weights[:, None]).T @ self.points

    def barycenter(self) -> np.ndarray:
        return self.weights @ self.points

    def mass(self) -> float:
        return float(self.weights.sum())

    def validate(self, tol: float = 1e-8) -> IsotropyReport:
        """Report-only check of the isotropy / centering / mass conditions."""
        del tol  # residuals are reported; thresholds are the caller's business
        M = self.moment_matrix()
        return IsotropyReport(
            isotropy_residual=float(np.linalg.norm(M - np.eye(self.n), "fro")),
            centering_residual=float(np.linalg.norm(self.barycenter())),
            mass_residual=float(abs(self.mass() - self.n)),
        )

    def restricted(self, idx) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points[idx], self.weights[idx])

    def to_json(self) -> dict:
        return {"n": int(self.n), "points": self.points.tolist(),
                "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "DiscreteMeasure":
        return cls(np.asarray(data["points"], float), np.asarray(data["weights"], float))

    def __repr__(self):
        return f"DiscreteMeasure(n={self.n}, k={self.k})"


def simplex_measure(n: int) -> DiscreteMeasure:
    """The extremal measure: regular-simplex vertices, each of weight n/(n+1)."""
    from .geometry import regular_simplex
    V = regular_simplex(n).vertices
    return DiscreteMeasure(V, np.full(n + 1, n / (n + 1.0)))


def orthonormal_measure(n: int) -> DiscreteMeasure:
    """+-e_i each with weight 1/2 (centered isotropic, cross-polytope support)."""
    P = np.vstack([np.eye(n), -np.eye(n)])
    return DiscreteMeasure(P, np.full(2 * n, 0.5))


def isotropize(points, weights) -> DiscreteMeasure:
    """One-step linear normalisation to an isotropic measure.

    Maps u_i -> M^{-1/2} u_i / |M^{-1/2} u_i| with weight c_i |M^{-1/2} u_i|^2,
    where M is the input moment matrix.  The output is isotropic to machine
    precision; centering is NOT restored by this transform.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    w = np.atleast_1d(np.asarray(weights, dtype=float))
    if np.any(w <= 0):
        raise MeasureError("weights must be positive")
    M = (P * w[:, None]).T @ P
    evals, evecs = np.linalg.eigh(M)
    if evals.min() <= 1e-12 * max(evals.max(), 1.0):
        raise SingularMomentError("moment matrix is singular")
    R = evecs @ np.diag(evals ** -0.5) @ evecs.T
    Q = P @ R.T
    norms = np.linalg.norm(Q, axis=1)
    return DiscreteMeasure(Q / norms[:, None], w * norms ** 2)


def support_bound(n: int) -> int:
    """Caratheodory bound on the support size: n(n+3)/2 + 1 (at most 2 n^2)."""
    return n * (n + 3) // 2 + 1


def reduce_support(mu: DiscreteMeasure, tol: float = 1e-8) -> DiscreteMeasure:
    """Shrink the support of a centered isotropic measure below n(n+3)/2 + 1.

    Repeated Caratheodory steps: the constraints (moment matrix, barycenter,
    total mass) are affine in the weights, so while the support exceeds the
    affine dimension there is a kernel direction; move along it until a
    weight hits zero (ties broken at the smallest index) and drop the atom.
    The moment data is preserved exactly, so the output inherits the input
    residuals.
    """
    report = mu.validate()
    if not report.ok(tol):
        raise NotIsotropicError(
            f"input residual {report.max_residual:.3g} exceeds tolerance {tol:g}")
    n = mu.n
    target_k = support_bound(n)
    P = mu.points.copy()
    w = mu.weights.copy()
    iu = np.triu_indices(n)
    while True:
        k = w.size
        if k <= target_k:
            # a kernel may still exist for special configurations; stop once
            # the guaranteed bound is met to keep the operation deterministic
            break
        B = np.empty((iu[0].size + n + 1, k))
        for j in range(k):
            outer = np.outer(P[j], P[j])
            B[:iu[0].size, j] = outer[iu]
            B[iu[0].size:-1, j] = P[j]
            B[-1, j] = 1.0
        _, svals, Vt = np.linalg.svd(B)
        sigma_min = svals[min(B.shape) - 1] if k <= B.shape[0] else 0.0
        if k > B.shape[0]:
            z = Vt[-1]
        else:
            if sigma_min > 1e-10 * max(svals[0], 1.0):
                break
            z = Vt[-1]
        z = z if z[np.argmax(np.abs(z))] > 0 else -z
        pos = z > 1e-14
        if not np.any(pos):
            z = -z
            pos = z > 1e-14
            if not np.any(pos):
                break
        steps = np.where(pos, w / np.where(pos, z, 1.0), np.inf)
        t = steps.min()
        drop = int(np.argmin(steps))
        w = w - t * z
        w[drop] = 0.0
        keep = w > 1e-13 * w.max()
        keep[drop] = False
        P, w = P[keep], w[keep]
    return DiscreteMeasure(P, w)


def _subset_indices(k: int, n: int, enum_cap: int, n_samples: int, seed: int):
    """All n-subsets of range(k), or a deduplicated uniform sample of them."""
    total = math.comb(k, n)
    if total <= enum_cap:
        idx = np.fromiter(itertools.chain.from_iterable(
            itertools.combinations(range(k), n)), dtype=np.intp)
        return idx.reshape(-1, n), True
    rng = as_rng(seed)
    picks = {tuple(np.sort(rng.choice(k, size=n, replace=False)))
             for _ in range(n_samples)}
    return np.array(sorted(picks), dtype=np.intp), False


def _subset_products(mu: DiscreteMeasure, idx: np.ndarray) -> np.ndarray:
    """q_S = (prod of weights over S) * det[u_i : i in S]^2 for each subset row."""
    U = mu.points[idx]                       # (S, n, n)
    dets = np.linalg.det(U)
    return np.prod(mu.weights[idx], axis=1) * dets ** 2


@dataclass(frozen=True)
class BallBartheReport:
    """Both sides of the weighted-determinant inequality plus its stability factor.

    ``exact`` is False when the subset enumeration was downgraded to uniform
    sampling; theta_star is then a lower bound.
    """
    lhs: float
    rhs: float
    theta_star: float
    exact: bool
    subset_count: int


def ball_barthe_check(mu: DiscreteMeasure, t, *,
                      enum_cap: int = THETA_STAR_ENUM_CAP,
                      n_subset_samples: int = THETA_STAR_SAMPLES,
                      seed: int = 0) -> BallBartheReport:
    """Evaluate det(sum t_i c_i u_i u_i^T), prod t_i^{c_i} and the factor theta*.

    theta* = 1 + (1/2) sum over n-subsets S of q_S (sqrt(prod_{i in S} t_i)/t0 - 1)^2
    with q_S the weight-determinant products and t0^2 = lhs (Cauchy-Binet),
    and the guarantee is lhs >= theta* * rhs >= rhs for isotropic measures.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape[0] != mu.k:
        raise MeasureError("t must have one entry per atom")
    if np.any(t <= 0):
        raise MeasureError("t entries must be positive")
    c = mu.weights
    M = (mu.points * (t * c)[:, None]).T @ mu.points
    lhs = float(np.linalg.det(M))
    rhs = float(np.exp(np.dot(c, np.log(t))))
    idx, exact = _subset_indices(mu.k, mu.n, enum_cap, n_subset_samples, seed)
    q = _subset_products(mu, idx)
    t_prod = np.prod(t[idx], axis=1)
    t0 = math.sqrt(lhs)
    theta_star = 1.0 + 0.5 * float(q @ (np.sqrt(t_prod) / t0 - 1.0) ** 2)
    return BallBartheReport(lhs=lhs, rhs=rhs, theta_star=theta_star,
                            exact=exact, subset_count=idx.shape[0])


def scalar_split_bound(a, b, x):
    """(xa-1)^2 + (xb-1)^2 and its lower bound (a^2-b^2)^2 / (2 (a^2+b^2)^2)."""
    a, b, x = np.asarray(a, float), np.asarray(b, float), np.asarray(x, float)
    lhs = (x * a - 1.0) ** 2 + (x * b - 1.0) ** 2
    rhs = (a ** 2 - b ** 2) ** 2 / (2.0 * (a ** 2 + b ** 2) ** 2)
    return lhs, rhs


def ball_barthe_stability_factor(mu: DiscreteMeasure, t, indices) -> dict:
    """Explicit stability factor from an (n+1)-index chain of big subsets.

    Given indices i_1 < ... < i_{n+1} whose two overlapping n-subsets
    {i_1..i_n} and {i_2..i_{n+1}} both have weight-determinant product at
    least beta, the determinant inequality self-improves to
    lhs >= (1 + beta (t_{i1} - t_{i_{n+1}})^2 / (4 (t_{i1} + t_{i_{n+1}})^2)) rhs.
    Returns the pieces plus whether the premise held.
    """
    idx = np.asarray(indices, dtype=np.intp)
    n = mu.n
    if idx.size != n + 1:
        raise MeasureError("need n+1 indices")
    t = np.asarray(t, dtype=float)
    q_first = float(_subset_products(mu, idx[:n][None, :])[0])
    q_last = float(_subset_products(mu, idx[1:][None, :])[0])
    beta = min(q_first, q_last)
    t1, t2 = t[idx[0]], t[idx[-1]]
    factor = 1.0 + beta * (t1 - t2) ** 2 / (4.0 * (t1 + t2) ** 2)
    return {"beta": beta, "factor": factor,
            "q_first": q_first, "q_last": q_last}


def big_determinant_subset(mu: DiscreteMeasure):
    """The n-subset maximising c_{i1}...c_{in} det^2; its value is >= 1/C(k,n)."""
    k, n = mu.k, mu.n
    if k > 2 * n * n:
        raise MeasureError(f"support {k} exceeds the enumeration bound 2n^2 = {2*n*n}")
    idx, _ = _subset_indices(k, n, THETA_STAR_ENUM_CAP, 0, 0)
    q = _subset_products(mu, idx)
    best = int(np.argmax(q))
    return tuple(int(i) for i in idx[best]), float(q[best])


class LiftedMeasure:
    """A centered isotropic measure lifted one dimension up.

    The lifted atoms are sign * sqrt(n/(n+1)) u_i + (1/sqrt(n+1)) e with
    weights (n+1)/n c_i, where e is the added coordinate axis; both signs
    give an isotropic system in dimension n+1 with barycenter sqrt(n+1) e.
    """

    def __init__(self, base: DiscreteMeasure, sign: int = +1, tol: float = 1e-8):
        if sign not in (+1, -1):
            raise MeasureError("sign must be +1 or -1")
        report = base.validate()
        if report.isotropy_residual > tol or report.centering_residual > tol:
            raise NotIsotropicError(
                f"lift requires a centered isotropic base (residual "
                f"{report.max_residual:.3g} > {tol:g})")
        n = base.n
        scale = math.sqrt(n / (n + 1.0))
        pole = np.zeros(n + 1)
        pole[-1] = 1.0
        P = np.hstack([sign * scale * base.points,
                       np.full((base.k, 1), 1.0 / math.sqrt(n + 1.0))])
        self.base = base
        self.sign = sign
        self.pole = pole
        self.points = P
        self.weights = (n + 1.0) / n * base.weights
        self.points.flags.writeable = False
        self.weights.flags.writeable = False

    @property
    def k(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def moment_matrix(self) -> np.ndarray:
        return (self.points * self.weights[:, None]).T @ self.points

    def barycenter(self) -> np.ndarray:
        return self.weights @ self.points

    def as_measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.points, self.weights)

    def __repr__(self):
        return f"LiftedMeasure(n={self.base.n}, k={self.k}, sign={self.sign:+d})"


def lift(mu: DiscreteMeasure, sign: int = +1) -> LiftedMeasure:
    """Lift a centered isotropic measure to an isotropic system one dimension up."""
    return LiftedMeasure(mu, sign=sign)


def fit_orthonormal_frame(vs, eta: float) -> np.ndarray:
    """Fit an orthonormal basis w_1..w_n to an isotropic vector system.

    The input vectors v_i (not necessarily unit) must satisfy
    sum v_i (x) v_i = Id, and each must either be short (norm <= eta) or
    eta-close in angle to one of v_1...v_n; then the returned basis has
    angle(v_i, w_i) < 3 sqrt(k) eta for i <= n.  Implemented as the
    orthogonal Procrustes fit to the first n cluster representatives.
    """
    V = np.atleast_2d(np.asarray(vs, dtype=float))
    k, n = V.shape
    if not 0 < eta < 1.0 / (3.0 * math.sqrt(k)):
        raise NoFrameError(f"eta must lie in (0, 1/(3 sqrt(k))) = (0, {1/(3*math.sqrt(k)):.4g})")
    M = V.T @ V
    if np.linalg.norm(M - np.eye(n), "fro") > 1e-8:
        raise NoFrameError("input system is not isotropic")
    norms = np.linalg.norm(V, axis=1)
    if np.any(norms[:n] <= eta):
        raise NoFrameError("a cluster representative is shorter than eta")
    unit = V / np.maximum(norms, 1e-300)[:, None]
    for i in range(k):
        if norms[i] <= eta:
            continue
        cosines = np.clip(unit[i] @ unit[:n].T, -1.0, 1.0)
        if np.arccos(cosines).min() > eta:
            raise NoFrameError(f"vector {i} is neither short nor close to a representative")
    # orthogonal Procrustes: closest orthogonal matrix to the representative block
    U, _, Wt = np.linalg.svd(V[:n].T)
    return (U @ Wt).T


def vector_angles(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Pairwise-row angles between matched rows of X and Y."""
    X, Y = np.atleast_2d(X), np.atleast_2d(Y)
    cx = np.einsum("ij,ij->i", X, Y)
    nx = np.linalg.norm(X, axis=1) * np.linalg.norm(Y, axis=1)
    return np.arccos(np.clip(cx / np.maximum(nx, 1e-300), -1.0, 1.0))
