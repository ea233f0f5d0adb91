"""Extremal families, deficits, simplex alignment and stability exponents.

The extremal constructions attach a controlled perturbation to the regular
simplex (an extra spherical vertex, truncated corners of the circumscribed
simplex, its polar, or stretched facet bumps), all normalised so the unit
ball remains the relevant Loewner/John ellipsoid.  Deficits are measured
against the exact simplex oracles, bodies are aligned to the simplex over
the orthogonal group, and empirical stability exponents are fitted from
log-log regressions of distance against the measured deficit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import functionals as fn
from .ellipsoids import mvee
from .geometry import (GeometryError, Polytope, containment_margin,
                       gauge_many, hausdorff_distance, point_set_hausdorff,
                       polar, regular_simplex, regular_simplex_polar,
                       symdiff_volume, vertex_enumeration)
from .rng import make_rng

__all__ = [
    "FamilyError", "InsufficientSignalError", "NormalizationError",
    "ExtremalFamily", "ExperimentRow", "ExperimentReport",
    "make_family", "FAMILY_KINDS",
    "align_to_simplex", "align_points_to_simplex_vertices", "AlignmentResult",
    "measure_deficit", "fit_exponent",
    "sandwich_check", "centroid_bound_check",
    "stability_bound_log10", "extremality_check",
]

FAMILY_KINDS = ("vertex-added", "corner-cut", "polar-vertex-added", "stretched-vertex")

# distance-exponent constant of the stability bounds, as log10(c) = 26 n log10(n)
BOUND_EXPONENT = 26


class FamilyError(GeometryError):
    """Invalid extremal-family parameters."""


class InsufficientSignalError(RuntimeError):
    """The measured deficits sit below the Monte-Carlo noise floor."""


class NormalizationError(GeometryError):
    """The body is not normalised to the unit Loewner/John ellipsoid."""


@dataclass
class ExtremalFamily:
    kind: str
    n: int
    eps_grid: np.ndarray
    bodies: list
    side: str                 # deficit the family keeps small: lowner | john | lowner-width


@dataclass
class ExperimentRow:
    eps_nominal: float
    eps_measured: float
    eps_stderr: float
    delta_H: float
    delta_vol: float
    delta_vol_stderr: float
    bound_margin_log10: float


@dataclass
class ExperimentReport:
    family: str
    n: int
    rows: list
    slope: float
    slope_stderr: float
    r_squared: float
    distance_used: str        # delta_vol | delta_H

    def as_csv_rows(self):
        for r in self.rows:
            yield {"eps_nominal": r.eps_nominal, "eps_measured": r.eps_measured,
                   "delta_H": r.delta_H, "delta_vol": r.delta_vol,
                   "bound_margin": r.bound_margin_log10}


def _rotate_towards(v: np.ndarray, away_from: np.ndarray, angle: float) -> np.ndarray:
    """Rotate unit v by ``angle`` within span{v, away_from}, away from the second vector."""
    w = away_from - (away_from @ v) * v
    w /= np.linalg.norm(w)
    return math.cos(angle) * v - math.sin(angle) * w


def make_family(kind: str, n: int, eps_grid, cut_scale: float = 2.0) -> ExtremalFamily:
    """Construct one of the extremal families on the given nominal-deficit grid.

    vertex-added:       hull of the simplex plus an extra unit vertex at
                        angle eps from the first vertex, moved along the
                        great circle through the second vertex and past the
                        first (Loewner ball stays the unit ball).
    corner-cut:         circumscribed simplex with its n+1 corners cut off
                        by simplices of edge proportional to eps^(1/n)
                        (John ball stays the unit ball).
    polar-vertex-added: polar of the vertex-added body (John side).
    stretched-vertex:   hull of the simplex vertices v_i and the stretched
                        opposite-facet centroids -(1/n + eps^(1/n)/4) v_i.
    """
    eps_grid = np.sort(np.atleast_1d(np.asarray(eps_grid, dtype=float)))
    if np.any(eps_grid <= 0.0) or np.any(eps_grid >= 0.1):
        raise FamilyError("eps grid must lie in (0, 0.1)")
    if kind not in FAMILY_KINDS:
        raise FamilyError(f"unknown family kind {kind!r}")
    simplex = regular_simplex(n)
    V = simplex.vertices
    bodies = []
    if kind in ("vertex-added", "polar-vertex-added"):
        for eps in eps_grid:
            extra = _rotate_towards(V[0], V[1], float(eps))
            K = Polytope(vertices=np.vstack([V, extra]))
            bodies.append(polar(K) if kind == "polar-vertex-added" else K)
        side = "lowner" if kind == "vertex-added" else "john"
    elif kind == "corner-cut":
        # full edge of the circumscribed simplex and its height along a vertex
        edge = math.sqrt(2.0 * n * (n + 1.0))
        for eps in eps_grid:
            cut_edge = cut_scale * float(eps) ** (1.0 / n)
            rho = cut_edge / edge
            if rho >= 0.5:
                raise FamilyError("over-cut: cut edge reaches half the full edge")
            depth = rho * (n + 1.0)
            A = np.vstack([V, -V])
            b = np.concatenate([np.ones(n + 1), np.full(n + 1, n - depth)])
            bodies.append(Polytope(halfspaces=(A, b)))
        side = "john"
    else:  # stretched-vertex
        for eps in eps_grid:
            bump = 1.0 / n + 0.25 * float(eps) ** (1.0 / n)
            K = Polytope(vertices=np.vstack([V, -bump * V]))
            bodies.append(K)
        # the facet bumps barely move the mean width (the support gain lives
        # on an O(h)-radius cap of directions), which is the deficit this
        # family is built to keep small
        side = "lowner-width"
    return ExtremalFamily(kind=kind, n=n, eps_grid=eps_grid, bodies=bodies, side=side)


@dataclass
class AlignmentResult:
    rotation: np.ndarray
    delta_H: float
    delta_vol: float | None = None
    delta_vol_stderr: float | None = None


def _rotation_from_angles(n: int, angles: np.ndarray) -> np.ndarray:
    """Product of Givens rotations over the coordinate planes."""
    R = np.eye(n)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            c, s = math.cos(angles[k]), math.sin(angles[k])
            G = np.eye(n)
            G[i, i] = c; G[j, j] = c
            G[i, j] = -s; G[j, i] = s
            R = G @ R
            k += 1
    return R


def _procrustes(source: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Orthogonal matrix R (any determinant sign) minimising |R source - target|."""
    U, _, Vt = np.linalg.svd(target.T @ source)
    return U @ Vt


def _assignment_rotation(directions: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Hungarian matching of unit directions to target vertices, then Procrustes.

    Returns the rotation R such that targets @ R.T best matches the
    directions (the target-to-body map).
    """
    cos = np.clip(directions @ targets.T, -1.0, 1.0)
    cost = np.arccos(cos)
    rows, cols = linear_sum_assignment(cost)
    return _procrustes(targets[cols], directions[rows])


def _best_rotation(n: int, candidates, objective, sweeps: int = 3,
                   step0: float = 0.05, min_step: float = 1e-5):
    """Pick the best candidate rotation and refine it by monotone
    coordinate-plane rotations of shrinking step size."""
    best_R, best = None, math.inf
    for R in candidates:
        val = objective(R)
        if val < best:
            best_R, best = R, val
    n_planes = n * (n - 1) // 2
    step = step0
    for _ in range(sweeps):
        improved = False
        for plane in range(n_planes):
            for sign in (+1.0, -1.0):
                angles = np.zeros(n_planes)
                angles[plane] = sign * step
                R_try = _rotation_from_angles(n, angles) @ best_R
                val = objective(R_try)
                if val < best:
                    best_R, best = R_try, val
                    improved = True
        step *= 0.35
        if not improved and step < min_step:
            break
    return best_R, best


def align_to_simplex(K: Polytope, target: Polytope, n_restarts: int = 20,
                     seed: int = 0, n_samples: int = 0,
                     refine_sweeps: int = 2) -> AlignmentResult:
    """Best rotation T minimising the Hausdorff distance of K to T target.

    The search seeds orthogonal Procrustes fits from a Hungarian matching
    of the extreme directions plus random restarts, then refines the best
    candidate by monotone coordinate-plane rotations.  When ``n_samples``
    is positive the symmetric-difference volume at the winning rotation is
    estimated as well.
    """
    VK = K.vertices
    VT = target.vertices
    directions = VK / np.linalg.norm(VK, axis=1)[:, None]
    t_dirs = VT / np.linalg.norm(VT, axis=1)[:, None]
    n = K.n
    rng = make_rng(seed)

    def dist_for(R):
        return hausdorff_distance(K, Polytope(vertices=VT @ R.T, check=False))

    candidates = [_assignment_rotation(directions, t_dirs), np.eye(n)]
    for _ in range(n_restarts):
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        candidates.append(_assignment_rotation(directions, t_dirs @ Q.T) @ Q)
        candidates.append(Q)
    best_R, best_d = _best_rotation(n, candidates, dist_for,
                                    sweeps=refine_sweeps, min_step=1e-4)
    result = AlignmentResult(rotation=best_R, delta_H=float(best_d))
    if n_samples > 0:
        est, se = symdiff_volume(K, Polytope(vertices=VT @ best_R.T, check=False),
                                 seed, n_samples)
        result.delta_vol = est
        result.delta_vol_stderr = se
    return result


def align_points_to_simplex_vertices(points: np.ndarray, n: int,
                                     n_restarts: int = 20, seed: int = 0):
    """Regular-simplex vertex set (as a rotation of the standard one) closest
    to the given unit points in point-set Hausdorff distance.

    Returns (rotation, distance); the aligned vertices are the rows of
    regular_simplex(n).vertices @ rotation.T.
    """
    P = np.atleast_2d(points)
    W = regular_simplex(n).vertices
    rng = make_rng(seed)
    dirs = P / np.linalg.norm(P, axis=1)[:, None]

    def dist_for(R):
        return point_set_hausdorff(P, W @ R.T)

    candidates = [_assignment_rotation(dirs, W), np.eye(n)]
    for _ in range(n_restarts):
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        candidates.append(_assignment_rotation(dirs, W @ Q.T) @ Q)
        candidates.append(Q)
    best_R, best_d = _best_rotation(n, candidates, dist_for, sweeps=4)
    return best_R, float(best_d)


def _worst_angle_alignment(points: np.ndarray, n: int, seed: int = 0):
    """Rotation of the standard simplex minimising the worst angular distance
    of each given unit point to its nearest rotated vertex."""
    U = np.atleast_2d(points)
    W = regular_simplex(n).vertices
    rng = make_rng(seed)

    def worst_angle(R):
        cos = np.clip(U @ (W @ R.T).T, -1.0, 1.0)
        return float(np.arccos(cos).min(axis=1).max())

    candidates = [_assignment_rotation(U, W), np.eye(n)]
    for _ in range(10):
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        candidates.append(_assignment_rotation(U, W @ Q.T) @ Q)
    R, angle = _best_rotation(n, candidates, worst_angle, sweeps=6,
                              step0=0.02, min_step=1e-7)
    return R, angle


def _check_unit_ball_normalisation(K: Polytope, side: str, tol: float) -> None:
    if side == "lowner":
        E, _ = mvee(K.vertices)
    elif side == "john":
        E, _ = mvee(polar(K).vertices)
    else:
        raise ValueError("side must be 'lowner' or 'john'")
    resid = max(float(np.abs(E.shape - np.eye(K.n)).max()),
                float(np.linalg.norm(E.center)))
    if resid > tol:
        raise NormalizationError(
            f"unit ball is not the {side} ellipsoid (residual {resid:.3g} > {tol:g})")


def measure_deficit(K, side: str, n_samples: int = fn.DEFAULT_SAMPLES,
                    seed: int = 0, check_tol: float = 1e-6,
                    check_normalisation: bool = True):
    """Relative gauge-mean deficit of K against the extremal simplex value.

    ``lowner`` side (K inside the unit ball): 1 - ell(K)/ell(simplex);
    ``john`` side (K containing the unit ball): ell(K)/ell(polar simplex) - 1;
    ``lowner-width`` (K inside the unit ball): the mean-width deficit,
    evaluated through the polar identity as ell(K polar)/ell(polar simplex) - 1.
    The denominators come from the exact oracle, and the numerator is the
    paired gauge difference against the reference simplex on one common
    Gaussian sample, which cancels most of the Monte-Carlo variance.
    Returns (deficit, stderr).
    """
    if check_normalisation and isinstance(K, Polytope):
        _check_unit_ball_normalisation(
            K, "lowner" if side == "lowner-width" else side, check_tol)
    n = K.n
    oracle_polar = fn.simplex_ell_oracle(n)
    X = make_rng(seed).standard_normal((int(n_samples), n))
    if side == "lowner":
        ref = regular_simplex(n)
        denom = n * oracle_polar
        diff = gauge_many(ref, X) - gauge_many(K, X)
    elif side == "john":
        ref = regular_simplex_polar(n)
        denom = oracle_polar
        diff = gauge_many(K, X) - gauge_many(ref, X)
    elif side == "lowner-width":
        ref = regular_simplex_polar(n)
        denom = oracle_polar
        diff = gauge_many(polar(K), X) - gauge_many(ref, X)
    else:
        raise ValueError("side must be 'lowner', 'john' or 'lowner-width'")
    deficit = float(diff.mean()) / denom
    stderr = float(np.std(diff, ddof=1) / math.sqrt(n_samples)) / denom
    return deficit, stderr


def stability_bound_log10(n: int, eps_measured: float, delta: float) -> float:
    """log10 margin of the distance bound delta <= n^(26 n) eps^(1/4)."""
    if eps_measured <= 0 or delta <= 0:
        return math.inf
    lhs = BOUND_EXPONENT * n * math.log10(n) + 0.25 * math.log10(eps_measured)
    return lhs - math.log10(delta)


def fit_exponent(family: ExtremalFamily, n_samples: int = fn.DEFAULT_SAMPLES,
                 seed: int = 0, align_restarts: int = 12) -> ExperimentReport:
    """Empirical stability exponent of a family: slope of log(distance) against
    log(measured deficit).

    Deficits across the grid share one sample stream (common random
    numbers), distances come from the alignment search, and rows whose
    deficit is below three standard errors are discarded; at least five
    rows spanning 1.5 decades of measured deficit are required.
    Vertex-added families regress the symmetric-difference distance,
    corner-cut and stretched-vertex families the Hausdorff distance.
    """
    n = family.n
    inscribed_side = family.side in ("lowner", "lowner-width")
    target = regular_simplex(n) if inscribed_side else regular_simplex_polar(n)
    use_vol = family.kind in ("vertex-added", "polar-vertex-added")
    rows = []
    for eps, K in zip(family.eps_grid, family.bodies):
        deficit, d_stderr = measure_deficit(K, family.side, n_samples=n_samples, seed=seed)
        res = align_to_simplex(K, target, n_restarts=align_restarts, seed=seed + 1,
                               n_samples=n_samples if use_vol else 0)
        dvol = res.delta_vol if res.delta_vol is not None else float("nan")
        dvol_se = res.delta_vol_stderr if res.delta_vol_stderr is not None else float("nan")
        delta = dvol if use_vol else res.delta_H
        rows.append(ExperimentRow(
            eps_nominal=float(eps), eps_measured=float(deficit),
            eps_stderr=float(d_stderr), delta_H=float(res.delta_H),
            delta_vol=float(dvol), delta_vol_stderr=float(dvol_se),
            bound_margin_log10=stability_bound_log10(n, deficit, delta)
            if delta > 0 else math.inf,
        ))
    usable = [r for r in rows
              if r.eps_measured > 3.0 * r.eps_stderr
              and (r.delta_vol if use_vol else r.delta_H) > 0]
    if len(usable) < 5:
        raise InsufficientSignalError(
            f"only {len(usable)} grid points above the noise floor")
    x = np.log10([r.eps_measured for r in usable])
    y = np.log10([(r.delta_vol if use_vol else r.delta_H) for r in usable])
    if x.max() - x.min() < 1.5:
        raise InsufficientSignalError(
            f"measured deficits span {x.max() - x.min():.2f} decades (< 1.5)")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = max(len(usable) - 2, 1)
    s2 = float(resid @ resid) / dof
    slope_se = math.sqrt(s2 / float(((x - x.mean()) ** 2).sum()))
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return ExperimentReport(family=family.kind, n=n, rows=rows,
                            slope=float(slope), slope_stderr=slope_se,
                            r_squared=r2,
                            distance_used="delta_vol" if use_vol else "delta_H")


def sandwich_check(contact_points: np.ndarray, eta: float,
                   seed: int = 0) -> dict:
    """Two-sided containment of the contact polytope between simplex dilates.

    Given unit contact points u_i whose directions each lie within angle
    eta of some vertex of an aligned regular simplex, the polytope
    Z = {x : <u_i, x> <= 1} is squeezed between (1 - n eta) S and
    (1 + 2 n eta) S for the aligned circumscribed simplex S.  Reports the
    two containment margins; a failed angle hypothesis is reported, not
    raised.
    """
    U = np.atleast_2d(np.asarray(contact_points, dtype=float))
    n = U.shape[1]
    R, worst_angle = _worst_angle_alignment(U, n, seed=seed)
    W = regular_simplex(n).vertices @ R.T
    report = {"worst_angle": worst_angle, "eta": float(eta),
              "hypothesis_ok": worst_angle <= eta + 1e-12}
    S_vertices = -n * W
    Z = Polytope(halfspaces=(U, np.ones(U.shape[0])))
    try:
        Z_vertices = vertex_enumeration(U, np.ones(U.shape[0]))
    except GeometryError as exc:
        report.update({"ok": False, "error": str(exc)})
        return report
    Zbody = Polytope(vertices=Z_vertices, check=False)
    inner = Polytope(vertices=(1.0 - n * eta) * S_vertices, check=False)
    outer = Polytope(vertices=(1.0 + 2.0 * n * eta) * S_vertices, check=False)
    inner_margin = containment_margin(Z, inner)
    outer_margin = containment_margin(outer, Zbody)
    report.update({
        "inner_margin": float(inner_margin),
        "outer_margin": float(outer_margin),
        "ok": report["hypothesis_ok"] and inner_margin >= -1e-9 and outer_margin >= -1e-9,
    })
    return report


def centroid_bound_check(S1: Polytope, eta: float, seed: int = 0) -> dict:
    """Vertex-centroid bound for a circumscribed near-regular simplex.

    S1 must be given by unit facet normals touching the unit ball
    (<u_i, x> <= 1) within angle eta of regular positions; its vertex
    centroid then lies in 4 n eta times the aligned circumscribed simplex.
    Reports the gauge value and margin.
    """
    A, b = S1.halfspaces
    norms = np.linalg.norm(A, axis=1)
    U = A / norms[:, None]
    offsets = b / norms
    if np.abs(offsets - 1.0).max() > 1e-9:
        raise GeometryError("facets must touch the unit ball (unit offsets)")
    n = S1.n
    R, worst_angle = _worst_angle_alignment(U, n, seed=seed)
    W = regular_simplex(n).vertices @ R.T
    sigma = S1.vertices.mean(axis=0)
    # gauge of the aligned circumscribed simplex is the support of the aligned base
    gauge_value = float(np.max(W @ sigma))
    bound = 4.0 * n * eta
    return {"worst_angle": worst_angle, "eta": float(eta),
            "hypothesis_ok": worst_angle <= eta + 1e-12,
            "centroid_gauge": gauge_value, "bound": bound,
            "margin": bound - gauge_value,
            "ok": worst_angle <= eta + 1e-12 and gauge_value <= bound + 1e-12}


def extremality_check(mu_points: np.ndarray, n_samples: int = fn.DEFAULT_SAMPLES,
                      seed: int = 0) -> dict:
    """Both extremality deficits of the hull of an isotropic support.

    For C the hull of the support, the gauge mean of C falls below the
    inscribed-simplex value and that of the polar exceeds the circumscribed
    value; the deficits vanish exactly when the support is a regular
    simplex.  Returns the two measured deficits with standard errors and
    the point-set distance of the support to the best aligned simplex.
    """
    P = np.atleast_2d(mu_points)
    n = P.shape[1]
    C = Polytope(vertices=P, check=False)
    simplex = regular_simplex(n)
    oracle_polar = fn.simplex_ell_oracle(n)
    X = make_rng(seed).standard_normal((int(n_samples), n))
    # paired differences against the simplex on one common sample
    diff_hull = gauge_many(simplex, X) - gauge_many(C, X)
    lowner_deficit = float(diff_hull.mean()) / (n * oracle_polar)
    lowner_se = float(np.std(diff_hull, ddof=1) / math.sqrt(n_samples)) / (n * oracle_polar)
    # the polar gauge is the support function, evaluated directly on both sides
    diff_polar = np.max(X @ P.T, axis=1) - np.max(X @ simplex.vertices.T, axis=1)
    john_deficit = float(diff_polar.mean()) / oracle_polar
    john_se = float(np.std(diff_polar, ddof=1) / math.sqrt(n_samples)) / oracle_polar
    _, dist = align_points_to_simplex_vertices(P, n, seed=seed)
    return {
        "lowner_deficit": lowner_deficit, "lowner_stderr": lowner_se,
        "john_deficit": john_deficit, "john_stderr": john_se,
        "support_distance": dist,
    }
