"""Convex bodies at desk scale: polytopes, balls, ellipsoids and their metrics.

Bodies are immutable after construction.  Polytopes carry a vertex
representation (V-rep), a halfspace representation (H-rep ``A x <= b``),
or both; missing representations are derived on demand and cached
(vertex enumeration from an H-rep is supported for n <= 4 only).
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from .rng import as_rng

__all__ = [
    "GeometryError", "RepresentationError", "DegenerateBodyError",
    "UnboundedSupportError", "GaugeUndefinedError",
    "Polytope", "Ball", "Ellipsoid",
    "regular_simplex", "regular_simplex_polar", "cube", "cross_polytope",
    "simplex_volume", "polar_simplex_volume",
    "support_function", "support_many", "gauge_norm", "gauge_many", "polar",
    "hausdorff_distance", "point_set_hausdorff", "symdiff_volume",
    "contains", "contains_points", "polytope_volume",
    "point_polytope_distance", "vertex_enumeration",
    "unit_ball_volume",
]

VERTEX_ENUM_MAX_DIM = 4
VERTEX_ENUM_MAX_SUBSETS = 400_000


class GeometryError(ValueError):
    """Base class for geometric failures."""


class RepresentationError(GeometryError):
    """A required polytope representation is missing and cannot be derived."""


class DegenerateBodyError(GeometryError):
    """The body is lower-dimensional."""


class UnboundedSupportError(GeometryError):
    """The support function is +infinity in the requested direction."""


class GaugeUndefinedError(GeometryError):
    """The gauge requires the origin in the interior of the body."""


def unit_ball_volume(n: int) -> float:
    """Volume of the Euclidean unit ball in dimension n."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(np.asarray(a, dtype=float))
    a.flags.writeable = False
    return a


class Polytope:
    """Convex polytope with vertex and/or halfspace representation.

    Parameters
    ----------
    vertices : (k, n) array, optional
        Generating points; interior points are harmless.
    halfspaces : (A, b) with A (m, n) and b (m,), optional
        The set {x : A x <= b}.

    At least one representation must be given.  A vertex representation is
    rejected if its affine hull is lower-dimensional.
    """

    def __init__(self, vertices=None, halfspaces=None, *, check: bool = True):
        if vertices is None and halfspaces is None:
            raise RepresentationError("polytope needs vertices or halfspaces")
        self._vertices = None
        self._A = None
        self._b = None
        if vertices is not None:
            V = _readonly(np.atleast_2d(vertices))
            if not np.all(np.isfinite(V)):
                raise GeometryError("non-finite vertex coordinates")
            self._vertices = V
            self._n = V.shape[1]
            if check:
                self._check_full_dimensional(V)
        if halfspaces is not None:
            A, b = halfspaces
            A = _readonly(np.atleast_2d(A))
            b = _readonly(np.atleast_1d(b))
            if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
                raise GeometryError("non-finite halfspace data")
            if A.shape[0] != b.shape[0]:
                raise GeometryError("halfspace normal/offset count mismatch")
            if vertices is not None and A.shape[1] != self._n:
                raise GeometryError("representation dimension mismatch")
            self._A, self._b = A, b
            self._n = A.shape[1]

    @staticmethod
    def _check_full_dimensional(V: np.ndarray) -> None:
        k, n = V.shape
        if k < n + 1:
            raise DegenerateBodyError(f"{k} points cannot span dimension {n}")
        rank = np.linalg.matrix_rank(V - V.mean(axis=0), tol=1e-10 * max(1.0, np.abs(V).max()))
        if rank < n:
            raise DegenerateBodyError("vertex set is lower-dimensional")

    @property
    def n(self) -> int:
        return self._n

    @property
    def has_vertices(self) -> bool:
        return self._vertices is not None

    @property
    def has_halfspaces(self) -> bool:
        return self._A is not None

    @property
    def vertices(self) -> np.ndarray:
        """V-rep, derived by vertex enumeration (n <= 4) when absent."""
        if self._vertices is None:
            V = vertex_enumeration(self._A, self._b)
            if V.shape[0] < self._n + 1:
                raise DegenerateBodyError("halfspace intersection is lower-dimensional or empty")
            self._vertices = _readonly(V)
        return self._vertices

    @property
    def halfspaces(self):
        """H-rep (A, b), derived from the convex hull of the V-rep when absent."""
        if self._A is None:
            hull = ConvexHull(self.vertices)
            A = hull.equations[:, :-1]
            b = -hull.equations[:, -1]
            self._A, self._b = _readonly(A), _readonly(b)
        return self._A, self._b

    def interior_point(self) -> np.ndarray:
        if self._vertices is not None:
            return self._vertices.mean(axis=0)
        return self.vertices.mean(axis=0)

    def to_json(self) -> dict:
        out = {"n": int(self._n), "vertices": None, "halfspaces": None}
        if self._vertices is not None:
            out["vertices"] = self._vertices.tolist()
        if self._A is not None:
            out["halfspaces"] = [{"a": a.tolist(), "b": float(bb)}
                                 for a, bb in zip(self._A, self._b)]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Polytope":
        vertices = data.get("vertices")
        hs = data.get("halfspaces")
        halfspaces = None
        if hs:
            A = np.array([row["a"] for row in hs], dtype=float)
            b = np.array([row["b"] for row in hs], dtype=float)
            halfspaces = (A, b)
        return cls(vertices=vertices, halfspaces=halfspaces)

    def __repr__(self):
        reps = []
        if self._vertices is not None:
            reps.append(f"{self._vertices.shape[0]} vertices")
        if self._A is not None:
            reps.append(f"{self._A.shape[0]} halfspaces")
        return f"Polytope(n={self._n}, {', '.join(reps)})"


class Ball:
    """Euclidean ball of given radius centred at the origin."""

    def __init__(self, radius: float = 1.0, n: int = 2):
        if radius < 0:
            raise GeometryError("negative radius")
        self.radius = float(radius)
        self.n = int(n)

    def support_many(self, U: np.ndarray) -> np.ndarray:
        return self.radius * np.linalg.norm(np.atleast_2d(U), axis=1)

    def gauge_many(self, X: np.ndarray) -> np.ndarray:
        if self.radius == 0.0:
            raise GaugeUndefinedError("gauge of the degenerate ball {0}")
        return np.linalg.norm(np.atleast_2d(X), axis=1) / self.radius

    def volume(self) -> float:
        return unit_ball_volume(self.n) * self.radius ** self.n

    def __repr__(self):
        return f"Ball(radius={self.radius}, n={self.n})"


class Ellipsoid:
    """Ellipsoid {x : (x - c)^T A (x - c) <= 1} with A symmetric positive definite."""

    def __init__(self, center, shape):
        c = _readonly(np.atleast_1d(center))
        A = _readonly(np.atleast_2d(shape))
        if A.shape != (c.size, c.size):
            raise GeometryError("shape matrix dimension mismatch")
        if np.abs(A - A.T).max() > 1e-12 * max(1.0, np.abs(A).max()):
            raise GeometryError("shape matrix is not symmetric")
        eigvals = np.linalg.eigvalsh(0.5 * (A + A.T))
        if eigvals.min() <= 0:
            raise GeometryError("shape matrix is not positive definite")
        self.center = c
        self.shape = A
        self.n = c.size

    def volume(self) -> float:
        sign, logdet = np.linalg.slogdet(self.shape)
        return unit_ball_volume(self.n) * math.exp(-0.5 * logdet)

    def contains_points(self, X: np.ndarray, tol: float = 0.0) -> np.ndarray:
        D = np.atleast_2d(X) - self.center
        q = np.einsum("ij,jk,ik->i", D, self.shape, D)
        return q <= 1.0 + tol

    def boundary_residuals(self, X: np.ndarray) -> np.ndarray:
        D = np.atleast_2d(X) - self.center
        return np.einsum("ij,jk,ik->i", D, self.shape, D) - 1.0

    def support_many(self, U: np.ndarray) -> np.ndarray:
        U = np.atleast_2d(U)
        Ainv = np.linalg.inv(self.shape)
        return U @ self.center + np.sqrt(np.einsum("ij,jk,ik->i", U, Ainv, U))

    def gauge_many(self, X: np.ndarray) -> np.ndarray:
        if self.center @ self.shape @ self.center >= 1.0:
            raise GaugeUndefinedError("origin not interior to ellipsoid")
        if np.linalg.norm(self.center) > 1e-12:
            raise GeometryError("gauge only implemented for centred ellipsoids")
        X = np.atleast_2d(X)
        return np.sqrt(np.einsum("ij,jk,ik->i", X, self.shape, X))

    def to_json(self) -> dict:
        return {"n": int(self.n), "center": self.center.tolist(),
                "shape": self.shape.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "Ellipsoid":
        return cls(np.asarray(data["center"], float), np.asarray(data["shape"], float))

    def __repr__(self):
        return f"Ellipsoid(n={self.n})"


# ---------------------------------------------------------------------------
# canonical bodies


def regular_simplex(n: int) -> Polytope:
    """Regular simplex inscribed in the unit ball, centroid at the origin.

    The n+1 unit vertices v_i satisfy <v_i, v_j> = -1/n for i != j and
    sum to zero; the first vertex is placed on the last coordinate axis.
    Both representations are attached (facet opposite v_i: <-v_i, x> <= 1/n).
    """
    if n < 2:
        raise GeometryError("dimension must be at least 2")
    m = n + 1
    E = np.eye(m)
    ones = np.full(m, 1.0 / m)
    P = math.sqrt(m / n) * (E - ones)          # rows live in the hyperplane sum=0
    # orthonormal basis of that hyperplane via a Householder reflection sending
    # the all-ones direction to the last coordinate axis
    w = np.full(m, 1.0 / math.sqrt(m))
    w[-1] -= 1.0
    w /= np.linalg.norm(w)
    H = np.eye(m) - 2.0 * np.outer(w, w)
    V = (P @ H.T)[:, :n]
    # rotate so the first vertex sits on the last axis (fixes orientation)
    u = V[0] / np.linalg.norm(V[0])
    e = np.zeros(n)
    e[-1] = 1.0
    d = u - e
    if np.linalg.norm(d) > 1e-14:
        d /= np.linalg.norm(d)
        V = V - 2.0 * np.outer(V @ d, d)
    V /= np.linalg.norm(V, axis=1)[:, None]
    return Polytope(vertices=V, halfspaces=(-V, np.full(m, 1.0 / n)))


def regular_simplex_polar(n: int) -> Polytope:
    """Polar of the inscribed regular simplex: the circumscribed simplex -n * simplex."""
    s = regular_simplex(n)
    V = s.vertices
    return Polytope(vertices=-n * V, halfspaces=(V, np.ones(n + 1)))


def cube(n: int, half_width: float = 1.0) -> Polytope:
    """The cube [-h, h]^n with both representations attached."""
    corners = np.array(list(itertools.product(*[(-half_width, half_width)] * n)))
    A = np.vstack([np.eye(n), -np.eye(n)])
    b = np.full(2 * n, half_width)
    return Polytope(vertices=corners, halfspaces=(A, b))


def cross_polytope(n: int, radius: float = 1.0) -> Polytope:
    """conv{+-radius * e_i}."""
    V = radius * np.vstack([np.eye(n), -np.eye(n)])
    return Polytope(vertices=V)


def simplex_volume(n: int) -> float:
    """Volume of the inscribed regular simplex: (1 + 1/n)^(n/2) * sqrt(n+1) / n!."""
    if n < 2:
        raise GeometryError("dimension must be at least 2")
    return (1.0 + 1.0 / n) ** (n / 2.0) * math.sqrt(n + 1.0) / math.factorial(n)


def polar_simplex_volume(n: int) -> float:
    """Volume of the circumscribed regular simplex, n^n times the inscribed one."""
    return float(n) ** n * simplex_volume(n)


# ---------------------------------------------------------------------------
# support / gauge / polarity


def support_function(K, u) -> float:
    """h_K(u) = max over K of <u, x>.

    V-rep polytopes use the vertex maximum; H-rep-only polytopes solve the
    LP and raise UnboundedSupportError when the body is unbounded in
    direction u.
    """
    u = np.asarray(u, dtype=float)
    if isinstance(K, (Ball, Ellipsoid)):
        return float(K.support_many(u[None, :])[0])
    if K.has_vertices:
        return float(np.max(K.vertices @ u))
    A, b = K.halfspaces
    res = linprog(-u, A_ub=A, b_ub=b, bounds=[(None, None)] * K.n, method="highs")
    if res.status == 3:
        raise UnboundedSupportError("support is unbounded in this direction")
    if not res.success:
        raise GeometryError(f"support LP failed: {res.message}")
    return float(-res.fun)


def support_many(K, U: np.ndarray) -> np.ndarray:
    """Vectorised support function over the rows of U."""
    U = np.atleast_2d(U)
    if isinstance(K, (Ball, Ellipsoid)):
        return K.support_many(U)
    if K.has_vertices:
        return np.max(U @ K.vertices.T, axis=1)
    return np.array([support_function(K, u) for u in U])


def _halfspaces_for_gauge(K: Polytope):
    A, b = K.halfspaces
    if np.any(b <= 0):
        raise GaugeUndefinedError("origin is not interior to the body")
    return A, b


def gauge_norm(K, x) -> float:
    """Minkowski gauge min{t >= 0 : x in t K}; requires the origin interior."""
    return float(gauge_many(K, np.asarray(x, dtype=float)[None, :])[0])


def gauge_many(K, X: np.ndarray) -> np.ndarray:
    """Vectorised gauge; equals the support function of the polar body."""
    X = np.atleast_2d(X)
    if isinstance(K, (Ball, Ellipsoid)):
        return K.gauge_many(X)
    A, b = _halfspaces_for_gauge(K)
    return np.maximum(np.max(X @ (A / b[:, None]).T, axis=1), 0.0)


def _extreme_points(V: np.ndarray) -> np.ndarray:
    """Extreme points of conv(V); falls back to deduplication for high n."""
    scale = max(1.0, float(np.abs(V).max()))
    _, idx = np.unique(np.round(V / scale, 9), axis=0, return_index=True)
    V = V[np.sort(idx)]
    if V.shape[0] <= V.shape[1] + 1:
        return V
    try:
        hull = ConvexHull(V)
    except Exception:
        return V
    return V[np.sort(hull.vertices)]


def polar(K):
    """Polar body {y : <x, y> <= 1 for all x in K}; origin must be interior.

    For polytopes, vertices map to halfspaces and halfspaces (with positive
    offsets) map to vertices, so the polar carries both representations and
    the bipolar returns the original body up to representation.  Balls and
    centred ellipsoids invert their radius and shape matrix.
    """
    if isinstance(K, Ball):
        if K.radius <= 0:
            raise GaugeUndefinedError("origin is not interior to the body")
        return Ball(1.0 / K.radius, K.n)
    if isinstance(K, Ellipsoid):
        if np.linalg.norm(K.center) > 1e-12:
            raise GeometryError("polar only implemented for centred ellipsoids")
        return Ellipsoid(K.center, np.linalg.inv(K.shape))
    A, b = K.halfspaces
    if np.any(b <= 0):
        raise GaugeUndefinedError("origin is not interior to the body")
    V = _extreme_points(A / b[:, None])
    H = (K.vertices, np.ones(K.vertices.shape[0])) if K.has_vertices else None
    return Polytope(vertices=V, halfspaces=H, check=False)


def _is_bounded(A: np.ndarray, tol: float = 1e-9) -> bool:
    """True iff {x : A x <= b} is bounded, i.e. the recession cone is trivial."""
    n = A.shape[1]
    bounds = [(-1.0, 1.0)] * n
    for i in range(n):
        for sign in (1.0, -1.0):
            c = np.zeros(n)
            c[i] = -sign
            res = linprog(c, A_ub=A, b_ub=np.zeros(A.shape[0]),
                          bounds=bounds, method="highs")
            if res.success and -res.fun > tol:
                return False
    return True


def vertex_enumeration(A: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Vertices of {x : A x <= b} by enumerating n-subsets of facets (n <= 4)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    m, n = A.shape
    if n > VERTEX_ENUM_MAX_DIM:
        raise RepresentationError(
            f"vertex enumeration supports n <= {VERTEX_ENUM_MAX_DIM}, got n = {n}")
    if math.comb(m, n) > VERTEX_ENUM_MAX_SUBSETS:
        raise RepresentationError("too many facets for subset enumeration")
    if not _is_bounded(A):
        raise RepresentationError("halfspace intersection is unbounded")
    scale = max(1.0, float(np.abs(b).max()))
    verts = []
    seen = set()
    for idx in itertools.combinations(range(m), n):
        As = A[list(idx)]
        if abs(np.linalg.det(As)) < 1e-12:
            continue
        x = np.linalg.solve(As, b[list(idx)])
        if np.all(A @ x <= b + tol * scale):
            key = tuple(np.round(x / scale, 9))
            if key not in seen:
                seen.add(key)
                verts.append(x)
    if not verts:
        raise RepresentationError("no vertices found (empty or unbounded body)")
    return np.array(verts)


# ---------------------------------------------------------------------------
# distances and volumes


def point_polytope_distance(x: np.ndarray, V: np.ndarray,
                            tol: float = 1e-9, max_iter: int = 500):
    """Euclidean distance from x to conv(V) by away-step Frank-Wolfe.

    Returns (distance, projection).  The final iterate is polished by an
    exact projection onto the affine hull of the active vertices, so the
    distance is accurate to ~1e-12 on desk-scale inputs.
    """
    x = np.asarray(x, dtype=float)
    V = np.atleast_2d(V)
    k = V.shape[0]
    lam = np.zeros(k)
    lam[int(np.argmin(np.linalg.norm(V - x, axis=1)))] = 1.0
    p = lam @ V
    scale = max(1.0, np.linalg.norm(x), float(np.abs(V).max()))
    for _ in range(max_iter):
        g = V @ (p - x)                       # gradient of 0.5*|p-x|^2 wrt lambda
        i_fw = int(np.argmin(g))
        active = lam > 1e-14
        g_active = np.where(active, g, -np.inf)
        i_aw = int(np.argmax(g_active))
        gap = lam @ g - g[i_fw]
        if gap <= (tol * scale) ** 2:
            break
        if (g[i_aw] - lam @ g) > (lam @ g - g[i_fw]):
            d = p - V[i_aw]                   # away step
            gamma_max = lam[i_aw] / (1.0 - lam[i_aw]) if lam[i_aw] < 1.0 else 1e18
            e = np.zeros(k); e[i_aw] = 1.0
            dlam = lam - e
        else:
            d = V[i_fw] - p                   # forward step
            gamma_max = 1.0
            e = np.zeros(k); e[i_fw] = 1.0
            dlam = e - lam
        denom = d @ d
        if denom <= 0:
            break
        gamma = np.clip(-((p - x) @ d) / denom, 0.0, gamma_max)
        if gamma <= 0:
            break
        lam = lam + gamma * dlam
        lam = np.maximum(lam, 0.0)
        s = lam.sum()
        if s > 0:
            lam /= s
        p = lam @ V
    # polish: exact least-squares projection onto the active-vertex hull
    active = np.flatnonzero(lam > 1e-12)
    if active.size:
        Va = V[active]
        M = np.vstack([Va.T, np.ones(active.size)])
        rhs = np.concatenate([x, [1.0]])
        sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        if np.all(sol >= -1e-12):
            cand = np.clip(sol, 0.0, None)
            cand /= cand.sum()
            p_cand = cand @ Va
            if np.linalg.norm(p_cand - x) <= np.linalg.norm(p - x) + 1e-15:
                p = p_cand
    return float(np.linalg.norm(p - x)), p


def hausdorff_distance(K, C) -> float:
    """Hausdorff distance between two bounded polytopes (via their V-reps)."""
    VK, VC = K.vertices, C.vertices
    d1 = max(point_polytope_distance(v, VC)[0] for v in VK)
    d2 = max(point_polytope_distance(w, VK)[0] for w in VC)
    return max(d1, d2)


def point_set_hausdorff(X: np.ndarray, Y: np.ndarray) -> float:
    """Hausdorff distance between two finite point sets."""
    X, Y = np.atleast_2d(X), np.atleast_2d(Y)
    D = np.linalg.norm(X[:, None, :] - Y[None, :, :], axis=2)
    return max(D.min(axis=1).max(), D.min(axis=0).max())


def contains_points(K, X: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Boolean membership of the rows of X in the body K."""
    X = np.atleast_2d(X)
    if isinstance(K, (Ball, Ellipsoid)):
        if isinstance(K, Ball):
            return np.linalg.norm(X, axis=1) <= K.radius + tol
        return K.contains_points(X, tol)
    A, b = K.halfspaces
    scale = np.maximum(1.0, np.abs(b))
    return np.all(X @ A.T <= b + tol * scale, axis=1)


def contains(K, C, tol: float = 1e-9) -> bool:
    """True iff C subset of K: every vertex of C satisfies every halfspace of K."""
    return bool(np.all(contains_points(K, C.vertices, tol)))


def containment_margin(K, C) -> float:
    """min over vertices/halfspaces of (b - <a, v>); negative iff C not in K."""
    A, b = K.halfspaces
    return float(np.min(b[None, :] - C.vertices @ A.T))


def polytope_volume(K) -> float:
    """Exact volume of a bounded polytope from its V-rep (Qhull)."""
    return float(ConvexHull(K.vertices).volume)


def intersection(K: Polytope, C: Polytope) -> Polytope:
    """Intersection of two H-rep bodies (V-rep derived on demand, n <= 4)."""
    AK, bK = K.halfspaces
    AC, bC = C.halfspaces
    return Polytope(halfspaces=(np.vstack([AK, AC]), np.concatenate([bK, bC])))


def symdiff_volume(K, C, sampler, n_samples: int):
    """Monte-Carlo volume of the symmetric difference of two bounded bodies.

    Points are sampled uniformly from the common bounding box with the
    supplied random source (an int seed or a Generator), so parallel
    callers can partition the stream space.  Returns (estimate, stderr).
    """
    if n_samples < 1:
        raise GeometryError("need at least one sample")
    rng = as_rng(sampler)
    VK, VC = K.vertices, C.vertices
    lo = np.minimum(VK.min(axis=0), VC.min(axis=0))
    hi = np.maximum(VK.max(axis=0), VC.max(axis=0))
    box_volume = float(np.prod(hi - lo))
    X = rng.uniform(lo, hi, size=(int(n_samples), lo.size))
    inside = contains_points(K, X) ^ contains_points(C, X)
    p_hat = inside.mean()
    estimate = p_hat * box_volume
    stderr = box_volume * math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n_samples)
    return float(estimate), float(stderr)
