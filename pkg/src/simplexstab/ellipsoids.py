"""Loewner ellipsoids, John ellipsoids via polarity, and contact measures.

The minimum-volume enclosing ellipsoid (MVEE) is computed on the lifted
point set by first-order Khachiyan iterations with away steps, then the
identified contact set is polished by Newton iterations on the optimality
system, which drives the duality gap to machine precision.  Contact points
and dual weights are converted into a centered isotropic measure on the
sphere certifying that the unit ball is the Loewner (equivalently, on the
polar side, the John) ellipsoid of the normalised body.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .geometry import (DegenerateBodyError, Ellipsoid, GeometryError,
                       Polytope, polar)
from .isotropic import DiscreteMeasure, IsotropyReport, reduce_support, support_bound
from .rng import make_rng

__all__ = [
    "EllipsoidSolverError", "JohnDecomposition",
    "mvee", "mvee_support_residual", "polar_ellipsoid",
    "john_contact_measure", "john_ellipsoid_of_polar",
    "random_isotropic_measure",
]


class EllipsoidSolverError(GeometryError):
    """The ellipsoid solver failed to reach its certificate."""


def _khachiyan_weights(Q: np.ndarray, eps: float, max_iter: int) -> np.ndarray:
    """Away-step Frank-Wolfe on the lifted log-det design problem."""
    m, d = Q.shape
    p = np.full(m, 1.0 / m)
    for _ in range(int(max_iter)):
        M = (Q * p[:, None]).T @ Q
        try:
            Minv = np.linalg.inv(M)
        except np.linalg.LinAlgError:
            raise DegenerateBodyError("point set does not span the space")
        kappa = np.einsum("ij,jk,ik->i", Q, Minv, Q)
        i_up = int(np.argmax(kappa))
        eps_up = kappa[i_up] / d - 1.0
        kappa_act = np.where(p > 1e-300, kappa, np.inf)
        i_dn = int(np.argmin(kappa_act))
        eps_dn = 1.0 - kappa[i_dn] / d
        if max(eps_up, eps_dn) <= eps:
            break
        if eps_up >= eps_dn:
            kap = kappa[i_up]
            step = (kap - d) / (d * (kap - 1.0))
            p = (1.0 - step) * p
            p[i_up] += step
        else:
            kap = kappa[i_dn]
            step_cap = p[i_dn] / (1.0 - p[i_dn]) if p[i_dn] < 1.0 else np.inf
            step = min((d - kap) / (d * (kap - 1.0)), step_cap)
            p = (1.0 + step) * p
            p[i_dn] -= step
            p = np.maximum(p, 0.0)
            p /= p.sum()
    return p


def _design_certificate(Q: np.ndarray, p: np.ndarray) -> float:
    d = Q.shape[1]
    M = (Q * p[:, None]).T @ Q
    kappa = np.einsum("ij,jk,ik->i", Q, np.linalg.inv(M), Q)
    return float(kappa.max() / d - 1.0)


def _newton_polish(Q: np.ndarray, p: np.ndarray, rounds: int = 12,
                   tol: float = 1e-13) -> np.ndarray:
    """Drive the design optimality system to (near) machine precision.

    On the active set the optimal weights satisfy kappa_i(p) = d; damped
    least-squares Newton steps on that system converge even when the
    optimal face is degenerate (e.g. many co-spherical contacts).  The
    active set is seeded from the kappa values of the first-order solution
    and revised between rounds; the result is never worse than the input.
    """
    m, d = Q.shape
    best_p = p
    try:
        best_cert = _design_certificate(Q, p)
    except np.linalg.LinAlgError:
        return p
    for _ in range(rounds):
        M = (Q * p[:, None]).T @ Q
        try:
            Minv = np.linalg.inv(M)
        except np.linalg.LinAlgError:
            break
        kappa = np.einsum("ij,jk,ik->i", Q, Minv, Q)
        support = np.flatnonzero((kappa >= d * (1.0 - 1e-3)) | (p > 1e-6))
        if support.size < d:
            support = np.argsort(kappa)[-d:]
        ps = p[support]
        ps = np.maximum(ps, 1e-12)
        ps /= ps.sum()
        Qs = Q[support]
        for _ in range(100):
            Ms = (Qs * ps[:, None]).T @ Qs
            try:
                K = Qs @ np.linalg.inv(Ms) @ Qs.T
            except np.linalg.LinAlgError:
                break
            F = np.diag(K) - d
            if np.abs(F).max() < tol * d:
                break
            step, *_ = np.linalg.lstsq(-(K ** 2), -F, rcond=1e-10)
            lam = 1.0
            while (ps + lam * step).min() < -1e-3 and lam > 1e-6:
                lam *= 0.5
            ps = np.maximum(ps + lam * step, 0.0)
            total = ps.sum()
            if total <= 0:
                break
            ps /= total
        new_p = np.zeros(m)
        new_p[support] = ps
        try:
            cert = _design_certificate(Q, new_p)
        except np.linalg.LinAlgError:
            break
        if cert < best_cert:
            best_p, best_cert = new_p, cert
        if best_cert < 1e-12:
            break
        p = 0.5 * p + 0.5 * new_p
    return best_p


def mvee_support_residual(points: np.ndarray, p: np.ndarray) -> float:
    """Duality-gap style certificate max_i kappa_i/d - 1 for design weights p."""
    X = np.atleast_2d(points)
    Q = np.hstack([X, np.ones((X.shape[0], 1))])
    d = Q.shape[1]
    M = (Q * p[:, None]).T @ Q
    kappa = np.einsum("ij,jk,ik->i", Q, np.linalg.inv(M), Q)
    return float(kappa.max() / d - 1.0)


def mvee(points, eps: float = 1e-7, max_iter: int = 100_000):
    """Minimum-volume enclosing ellipsoid of a point set.

    Returns (Ellipsoid, dual_weights).  The weights are nonnegative, sum to
    one and are supported on (near-)contact points; the ellipsoid satisfies
    the (1+eps) optimality certificate, and after the Newton polish the
    certificate is usually at machine precision.  Non-centred data is
    handled by the standard lift to dimension n+1.
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    m, n = X.shape
    if not 0.0 < eps < 0.5:
        raise GeometryError("eps must lie in (0, 0.5)")
    if m < n + 1 or np.linalg.matrix_rank(X - X.mean(axis=0)) < n:
        raise DegenerateBodyError("points do not affinely span the space")
    Q = np.hstack([X, np.ones((m, 1))])
    p = _khachiyan_weights(Q, max(eps, 1e-8), max_iter)
    p = _newton_polish(Q, p)
    center = p @ X
    S = (X * p[:, None]).T @ X - np.outer(center, center)
    try:
        Sinv = np.linalg.inv(S)
    except np.linalg.LinAlgError:
        raise DegenerateBodyError("degenerate point set (singular scatter)")
    shape = Sinv / n
    cert = mvee_support_residual(X, p)
    if cert > eps:
        raise EllipsoidSolverError(
            f"certificate {cert:.3g} exceeds eps = {eps:g} after {max_iter} iterations")
    # inflate so containment holds exactly at the certified accuracy
    shape = shape / (1.0 + cert * (n + 1.0) / n)
    return Ellipsoid(center, shape), p


def polar_ellipsoid(E: Ellipsoid) -> Ellipsoid:
    """Polar body of an ellipsoid with the origin in its interior.

    For E = {x : (x-c)^T A (x-c) <= 1} the polar is again an ellipsoid;
    completing the square in <y, c> + |A^{-1/2} y| <= 1 gives its center
    and shape matrix.
    """
    c, A = E.center, E.shape
    if float(c @ A @ c) >= 1.0:
        raise GeometryError("origin is not interior to the ellipsoid")
    Ainv = np.linalg.inv(A)
    M = Ainv - np.outer(c, c)
    Minv = np.linalg.inv(M)
    center = -Minv @ c
    scale = 1.0 + float(c @ Minv @ c)
    return Ellipsoid(center, M / scale)


@dataclass
class JohnDecomposition:
    """A body normalised so the unit ball is its Loewner/John ellipsoid,
    together with the contact measure certifying it."""
    body: Polytope
    contacts: DiscreteMeasure
    kind: str                       # "lowner-contacts" or "john-contacts"
    residuals: IsotropyReport
    boundary_residual: float        # worst |  |u_i| - 1 | before renormalisation

    def ok(self, tol: float = 1e-6) -> bool:
        return self.residuals.ok(tol) and self.boundary_residual <= tol


def _polish_weights(U: np.ndarray, n: int) -> np.ndarray:
    """Nonnegative least-squares fit of weights to the exact contact conditions."""
    k = U.shape[0]
    rows = np.empty((n * n + n + 1, k))
    for j in range(k):
        rows[:n * n, j] = np.outer(U[j], U[j]).ravel()
        rows[n * n:-1, j] = U[j]
        rows[-1, j] = 1.0
    target = np.concatenate([np.eye(n).ravel(), np.zeros(n), [float(n)]])
    w, _ = nnls(rows, target)
    return w


def john_contact_measure(K: Polytope, eps: float = 1e-7,
                         tol: float = 1e-6) -> JohnDecomposition:
    """Contact measure of the Loewner ellipsoid of a full-dimensional polytope.

    The body is mapped by the affine map sending its Loewner ellipsoid to
    the unit ball; vertices landing on the sphere are the contact points,
    whose weights are polished by nonnegative least squares onto the exact
    conditions sum c_i u_i (x) u_i = Id, sum c_i u_i = 0, and then the
    support is reduced below n(n+3)/2 + 1.  If the residuals still exceed
    ``tol`` the decomposition is returned with a warning, never silently.
    """
    X = K.vertices
    n = K.n
    E, p = mvee(X, eps=eps)
    evals, evecs = np.linalg.eigh(E.shape)
    L = evecs @ np.diag(np.sqrt(evals)) @ evecs.T
    mapped = (X - E.center) @ L.T
    norms = np.linalg.norm(mapped, axis=1)
    on_sphere = np.abs(norms - 1.0) <= max(10.0 * eps, 1e-8)
    heavy = p > 10.0 * eps
    contact_idx = np.flatnonzero(on_sphere | heavy)
    if contact_idx.size < n + 1:
        contact_idx = np.argsort(np.abs(norms - 1.0))[:n + 1]
    boundary_residual = float(np.abs(norms[contact_idx] - 1.0).max())
    U = mapped[contact_idx] / norms[contact_idx, None]
    w = _polish_weights(U, n)
    keep = w > 1e-12
    U, w = U[keep], w[keep]
    mu = DiscreteMeasure(U, w)
    if mu.k > support_bound(n):
        mu = reduce_support(mu, tol=max(10.0 * tol, 1e-6))
    residuals = mu.validate()
    if residuals.max_residual > tol or boundary_residual > tol:
        warnings.warn(
            f"john decomposition residual {residuals.max_residual:.3g} "
            f"(boundary {boundary_residual:.3g}) exceeds tol {tol:g}",
            RuntimeWarning, stacklevel=2)
    body = Polytope(vertices=mapped, check=False)
    return JohnDecomposition(body=body, contacts=mu, kind="lowner-contacts",
                             residuals=residuals,
                             boundary_residual=boundary_residual)


def john_ellipsoid_of_polar(K: Polytope, eps: float = 1e-7) -> Ellipsoid:
    """John ellipsoid of K as the polar image of the Loewner ellipsoid of K°."""
    Kp = polar(K)
    E, _ = mvee(Kp.vertices, eps=eps)
    return polar_ellipsoid(E)


def random_isotropic_measure(n: int, k_points: int, seed: int) -> DiscreteMeasure:
    """Centered isotropic measure from the Loewner contacts of a random polytope.

    Gaussian points are drawn with the given seed, their convex hull is
    normalised through the John route, and the resulting contact measure
    (isotropic and centered to ~1e-6 or better) is returned.  Identical
    seeds give identical measures.
    """
    if k_points < n + 1:
        raise GeometryError("need at least n+1 points")
    rng = make_rng(seed)
    pts = rng.standard_normal((k_points, n))
    decomp = john_contact_measure(Polytope(vertices=pts))
    return decomp.contacts
