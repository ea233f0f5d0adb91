"""Both sides of the geometric product inequalities for truncated Gaussians.

For a lifted measure (atoms u~_i, weights c~_i summing to n+1) and the
unnormalised truncated Gaussian f(t) = 1{t >= 0} exp(-(t-s)^2/2), the two
integrals of interest are

  direct:   int prod_i f(<x, u~_i>)^{c~_i} dx   <=  (int f)^{n+1},
  reverse:  int* sup over {x = sum c~_i theta_i u~_i} prod f(theta_i)^{c~_i} dx
            >= (int f)^{n+1},

with equality when the lifted atoms form an orthonormal basis.  Because the
exponents combine into a single quadratic, the direct integrand is exactly
the unnormalised Gaussian centred at m = s sqrt(n+1) e restricted to the
cone C = {x : <u~_i, x> >= 0 for all i}, and the reverse integrand equals
exp(-q*(x)/2) where q*(x) minimises sum c~_i (theta_i - s)^2 over the
nonnegative decompositions of x.  Importance sampling from N(m, Id) then
gives bounded-weight estimators for both sides.

The same cone picture yields the exact dilate-measure identities: for the
inscribed regular simplex (and its polar on the reversed lifting),

  (2 pi)^{n/2} e^{-(n+1)s^2/2} int_0^inf e^{-r^2/2 + s r sqrt(n+1)}
      gamma_n(r sqrt(n) simplex) dr  =  (int f)^{n+1},

which this module verifies by outer quadrature over r with the dilate
measure estimated from one common Gaussian sample.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls
from scipy.special import ndtr

from .functionals import FunctionalEstimate
from .geometry import gauge_many, regular_simplex
from .isotropic import DiscreteMeasure, LiftedMeasure
from .rng import make_rng
from .transport import gtilde_integral

__all__ = [
    "BLInstance", "bl_bound", "bl_lhs", "rbl_lhs",
    "simplex_identity_check", "smoothing_inequality_check",
    "nonneg_transport_sup", "IdentityReport",
]


@dataclass(frozen=True)
class BLInstance:
    """A lifted isotropic system together with the shift of the truncated Gaussian."""
    lifted: LiftedMeasure
    s: float

    def __post_init__(self):
        resid = np.linalg.norm(self.lifted.moment_matrix() - np.eye(self.lifted.dim), "fro")
        if resid > 1e-8:
            raise ValueError(f"lifted system not isotropic (residual {resid:.3g})")


def bl_bound(inst: BLInstance) -> float:
    """(int f)^(n+1), the common bound of the direct and reverse inequalities."""
    return gtilde_integral(inst.s) ** inst.lifted.dim


def bl_lhs(inst: BLInstance, n_samples: int = 200_000, seed: int = 0) -> FunctionalEstimate:
    """Monte-Carlo value of the direct product integral.

    Equals (2 pi)^{d/2} times the Gaussian measure of the shifted cone, so
    the importance-sampled estimator is a Bernoulli mean.
    """
    L = inst.lifted
    d = L.dim
    rng = make_rng(seed)
    m = inst.s * math.sqrt(d) * L.pole
    Z = rng.standard_normal((int(n_samples), d)) + m
    inside = np.all(Z @ L.points.T >= 0.0, axis=1)
    p = float(inside.mean())
    scale = (2.0 * math.pi) ** (d / 2.0)
    stderr = scale * math.sqrt(max(p * (1.0 - p), 0.0) / n_samples)
    return FunctionalEstimate(scale * p, stderr, "mc-direct", int(n_samples))


class _NonnegTransportSolver:
    """Per-point concave maximisation behind the reverse integrand.

    Minimises q(theta) = sum c~_i (theta_i - s)^2 subject to
    A theta = x (A has columns c~_i u~_i) and theta >= 0.  Because
    A D^{-1} A^T = Id for isotropic systems, the equality-constrained
    minimiser is theta_i = <u~_i, x - m> + s with value |x - m|^2, feasible
    exactly when x lies in the cone; outside, the problem is reduced to a
    least-distance program and solved through nonnegative least squares.
    """

    def __init__(self, lifted: LiftedMeasure, s: float):
        self.L = lifted
        self.s = float(s)
        k, d = lifted.k, lifted.dim
        # the maximised log-integrand is -(1/2) sum c~_i (theta_i - s)^2 on the
        # nonnegative orthant: its Hessian is -diag(c~), negative definite
        if lifted.weights.min() <= 0:
            raise ValueError("log-integrand is not strictly concave")
        A = (lifted.points * lifted.weights[:, None]).T       # d x k
        self.A = A
        # null-space basis of A (k x p), p = k - d
        _, svals, Vt = np.linalg.svd(A)
        rank = int(np.sum(svals > 1e-12 * svals[0]))
        self.N = Vt[rank:].T
        self.p = self.N.shape[1]
        root_c = np.sqrt(lifted.weights)
        E = root_c[:, None] * self.N                           # k x p
        # orthonormalise the transformed null basis: E = Q R
        Q, R = np.linalg.qr(E)
        self.Q = Q
        self.Rinv = np.linalg.inv(R)
        self.G_hat = self.N @ self.Rinv                        # constraint rows
        self.root_c = root_c
        self.m = self.s * math.sqrt(d) * lifted.pole

    def solve(self, x: np.ndarray):
        """Return (q_star, theta) or (None, None) when no decomposition exists."""
        L, s = self.L, self.s
        theta_eq = L.points @ x                                # equality-constrained optimum
        if self.p == 0:
            if theta_eq.min() >= -1e-12:
                theta = np.maximum(theta_eq, 0.0)
                return float(L.weights @ (theta - s) ** 2), theta
            return None, None
        if theta_eq.min() >= 0.0:
            return float(np.dot(x - self.m, x - self.m)), theta_eq
        # least-distance form: minimise |v| s.t. G_hat v >= -theta_eq
        f = -self.root_c * (theta_eq - s)
        h = -(theta_eq + self.G_hat @ (self.Q.T @ f))
        # Lawson-Hanson: NNLS on [G_hat^T; h^T], target e_{p+1}
        stacked = np.vstack([self.G_hat.T, h[None, :]])
        target = np.zeros(self.p + 1)
        target[-1] = 1.0
        u, rnorm = nnls(stacked, target)
        if rnorm <= 1e-12:
            return None, None                                  # incompatible constraints
        rho = stacked @ u - target
        if abs(rho[-1]) < 1e-12:
            return self._solve_by_enumeration(x)
        v = -rho[:-1] / rho[-1]
        w = self.Rinv @ (v + self.Q.T @ f)
        theta_raw = theta_eq + self.N @ w
        theta = np.maximum(theta_raw, 0.0)
        # the NNLS route can terminate early on ill-conditioned inputs;
        # verify feasibility and rescue exactly when it did
        if theta_raw.min() < -1e-9 or np.linalg.norm(self.A @ theta - x) > 1e-9 * max(
                1.0, float(np.linalg.norm(x))):
            return self._solve_by_enumeration(x)
        q = float(L.weights @ (theta - s) ** 2)
        return q, theta

    def _solve_by_enumeration(self, x: np.ndarray):
        """Exact minimiser by scanning the stationarity system of every
        active set (the atom count is small by precondition)."""
        L, s = self.L, self.s
        k = L.k
        x_scale = max(1.0, float(np.linalg.norm(x)))
        best_q, best_theta = None, None
        for mask in range(1, 1 << k):
            free = [i for i in range(k) if mask >> i & 1]
            UF = L.points[free]
            G = (UF * L.weights[free][:, None]).T @ UF
            rhs = x - s * (L.weights[free] @ UF)
            try:
                nu = np.linalg.solve(G, rhs)
            except np.linalg.LinAlgError:
                nu, *_ = np.linalg.lstsq(G, rhs, rcond=None)
            theta_f = s + UF @ nu
            if theta_f.min() < -1e-10:
                continue
            theta = np.zeros(k)
            theta[free] = np.maximum(theta_f, 0.0)
            if np.linalg.norm(self.A @ theta - x) > 1e-8 * x_scale:
                continue
            q = float(L.weights @ (theta - s) ** 2)
            if best_q is None or q < best_q:
                best_q, best_theta = q, theta
        return best_q, best_theta

    def kkt_residual(self, x: np.ndarray, theta: np.ndarray) -> float:
        """Worst KKT violation of a proposed maximiser (feasibility,
        stationarity on the free set, dual feasibility on the active set)."""
        L, s = self.L, self.s
        primal = np.linalg.norm(self.A @ theta - x)
        grad = 2.0 * L.weights * (theta - s)
        free = theta > 1e-10
        if free.any():
            lam, *_ = np.linalg.lstsq(L.points[free] * L.weights[free, None],
                                      grad[free], rcond=None)
        else:
            lam = np.zeros(L.dim)
        mult = grad - (L.points * L.weights[:, None]) @ lam
        stationarity = float(np.abs(mult[free]).max()) if free.any() else 0.0
        dual = float(np.maximum(-mult[~free], 0.0).max()) if (~free).any() else 0.0
        return max(primal, stationarity, dual)


def nonneg_transport_sup(inst: BLInstance, x: np.ndarray):
    """q*(x) and its maximiser for a single point (None when infeasible)."""
    return _NonnegTransportSolver(inst.lifted, inst.s).solve(np.asarray(x, float))


def rbl_lhs(inst: BLInstance, n_samples: int = 50_000, seed: int = 0,
            kkt_checks: int | None = None, kkt_tol: float = 1e-8) -> FunctionalEstimate:
    """Monte-Carlo value of the reverse (sup-decomposition) integral.

    Importance sampling from N(m, Id) makes every weight lie in [0, 1]
    because q*(x) >= |x - m|^2; points inside the cone take weight one and
    skip the optimiser.  Every accepted maximiser is verified against the
    KKT conditions at ``kkt_tol`` (pass ``kkt_checks`` to spot-check an
    evenly spaced subsample instead).
    """
    L = inst.lifted
    d = L.dim
    solver = _NonnegTransportSolver(L, inst.s)
    rng = make_rng(seed)
    m = solver.m
    Z = rng.standard_normal((int(n_samples), d)) + m
    dots = Z @ L.points.T
    inside = dots.min(axis=1) >= 0.0
    weights = np.zeros(int(n_samples))
    weights[inside] = 1.0
    hard_idx = np.flatnonzero(~inside)
    sq_dist = np.einsum("ij,ij->i", Z - m, Z - m)
    if kkt_checks is None:
        check_every = 1
    else:
        check_every = max(1, hard_idx.size // max(kkt_checks, 1))
    worst_kkt = 0.0
    for pos, i in enumerate(hard_idx):
        q, theta = solver.solve(Z[i])
        if q is None:
            continue
        if pos % check_every == 0:
            kkt = solver.kkt_residual(Z[i], theta)
            if kkt > kkt_tol:
                # rare early termination of the least-distance solve: redo
                # this point exactly by active-set enumeration
                q_exact, theta_exact = solver._solve_by_enumeration(Z[i])
                if q_exact is not None:
                    q, theta = q_exact, theta_exact
                    kkt = solver.kkt_residual(Z[i], theta)
            worst_kkt = max(worst_kkt, kkt)
        weights[i] = math.exp(-0.5 * max(q - sq_dist[i], 0.0))
    if worst_kkt > kkt_tol:
        raise RuntimeError(f"inner optimiser KKT residual {worst_kkt:.3g} > {kkt_tol:g}")
    scale = (2.0 * math.pi) ** (d / 2.0)
    value = scale * float(weights.mean())
    stderr = scale * float(np.std(weights, ddof=1) / math.sqrt(n_samples))
    return FunctionalEstimate(value, stderr, "mc-direct", int(n_samples))


@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    rhs: float
    gap: float
    rel_gap: float
    stderr: float
    samples: int


def _kernel_cdf_integral(a: np.ndarray, c: float):
    """int_0^{a_j} e^{-r^2/2 + c r} dr in closed form, elementwise."""
    amp = math.sqrt(2.0 * math.pi) * math.exp(0.5 * c * c)
    return amp * (ndtr(a - c) - ndtr(-c))


def simplex_identity_check(n: int, s: float, n_samples: int = 1_000_000,
                           seed: int = 0, quad_nodes: int = 2000,
                           variant: str = "inscribed") -> IdentityReport:
    """Verify the exact dilate-measure identity for the regular simplex.

    ``inscribed``: gamma_n(r sqrt(n) simplex) under the kernel
    e^{-r^2/2 + s r sqrt(n+1)} integrates to (int f)^{n+1} / ((2 pi)^{n/2}
    e^{-(n+1) s^2 / 2}).  ``polar``: same with gamma_n((r / sqrt(n)) polar).
    The dilate measure comes from one Gaussian sample of size n_samples via
    its empirical gauge distribution; the r-integral uses a trapezoid grid
    of ``quad_nodes`` nodes (the grid tail beyond the largest gauge value
    is integrated exactly).
    """
    if variant not in ("inscribed", "polar"):
        raise ValueError("variant must be 'inscribed' or 'polar'")
    simplex = regular_simplex(n)
    rng = make_rng(seed)
    X = rng.standard_normal((int(n_samples), n))
    if variant == "inscribed":
        # gauge of r sqrt(n) simplex <= 1  <=>  gauge_simplex(X)/sqrt(n) <= r
        a = gauge_many(simplex, X) / math.sqrt(n)
    else:
        # gauge of the polar at X is the support function of the simplex
        a = math.sqrt(n) * np.max(X @ simplex.vertices.T, axis=1)
    c = s * math.sqrt(n + 1.0)
    prefactor = (2.0 * math.pi) ** (n / 2.0) * math.exp(-0.5 * (n + 1.0) * s * s)
    # int_0^inf kernel * gamma_hat(r) dr  =  int_0^inf kernel dr - mean_j int_0^{a_j} kernel
    full = _kernel_cdf_integral(np.array([np.inf]), c)[0]
    r_max = float(a.max())
    grid = np.linspace(0.0, r_max, int(quad_nodes))
    survival = 1.0 - np.searchsorted(np.sort(a), grid, side="right") / n_samples
    kernel = np.exp(-0.5 * grid ** 2 + c * grid)
    tail_part = float(np.trapezoid(kernel * survival, grid))
    lhs = prefactor * (full - tail_part)
    rhs = gtilde_integral(s) ** (n + 1)
    # per-sample closed form of the same functional gives the standard error
    per_sample = prefactor * (full - _kernel_cdf_integral(a, c))
    stderr = float(np.std(per_sample, ddof=1) / math.sqrt(n_samples))
    gap = lhs - rhs
    return IdentityReport(lhs=float(lhs), rhs=float(rhs), gap=float(gap),
                          rel_gap=float(abs(gap) / rhs), stderr=stderr,
                          samples=int(n_samples))


def smoothing_inequality_check(mu: DiscreteMeasure, tau_grid,
                               n_samples: int = 200_000, seed: int = 0) -> dict:
    """Smoothed survival comparison between the simplex and the hull of a measure.

    For each tau, with the kernel e^{-(t-tau)^2/(2n)} the smoothed survival
    of the inscribed simplex dominates that of C = conv(supp mu); for the
    polar bodies, with the kernel e^{-n (t-tau)^2/2}, the comparison is
    reversed.  Estimates share one Gaussian sample (common random numbers)
    and each row reports the margin and its standard error.
    """
    n = mu.n
    simplex = regular_simplex(n)
    C = np.asarray(mu.points)
    rng = make_rng(seed)
    X = rng.standard_normal((int(n_samples), n))
    tau_grid = np.atleast_1d(np.asarray(tau_grid, dtype=float))

    from .geometry import Polytope
    hull = Polytope(vertices=C, check=False)
    g_simplex = gauge_many(simplex, X)
    g_hull = gauge_many(hull, X)
    gp_simplex = np.max(X @ simplex.vertices.T, axis=1)     # gauge of the polar
    gp_hull = np.max(X @ C.T, axis=1)

    def smoothed(gauges, tau, rate):
        # int_0^{gauge} e^{-rate (t - tau)^2 / 2} dt, elementwise closed form
        amp = math.sqrt(2.0 * math.pi / rate)
        root = math.sqrt(rate)
        return amp * (ndtr((gauges - tau) * root) - ndtr(-tau * root))

    rows = []
    for tau in tau_grid:
        direct_s = smoothed(g_simplex, tau, 1.0 / n)
        direct_c = smoothed(g_hull, tau, 1.0 / n)
        diff = direct_s - direct_c
        margin = float(diff.mean())
        stderr = float(np.std(diff, ddof=1) / math.sqrt(n_samples))
        polar_s = smoothed(gp_simplex, tau, float(n))
        polar_c = smoothed(gp_hull, tau, float(n))
        pdiff = polar_c - polar_s
        pmargin = float(pdiff.mean())
        pstderr = float(np.std(pdiff, ddof=1) / math.sqrt(n_samples))
        rows.append({
            "tau": float(tau),
            "direct_margin": margin, "direct_stderr": stderr,
            "direct_ok": margin >= -3.0 * stderr,
            "polar_margin": pmargin, "polar_stderr": pstderr,
            "polar_ok": pmargin >= -3.0 * pstderr,
        })
    return {"rows": rows,
            "ok": all(r["direct_ok"] and r["polar_ok"] for r in rows)}
