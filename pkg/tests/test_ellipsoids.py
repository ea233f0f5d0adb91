import math

import numpy as np
import pytest

from simplexstab import ellipsoids as el
from simplexstab import geometry as g
from simplexstab import isotropic as iso
from simplexstab.rng import make_rng


class TestMvee:
    def test_cross_polytope_gives_unit_ball(self):
        P = np.vstack([np.eye(3), -np.eye(3)])
        E, w = el.mvee(P)
        assert np.abs(E.shape - np.eye(3)).max() < 1e-10
        assert np.linalg.norm(E.center) < 1e-10
        assert np.abs(w - 1.0 / 6.0).max() < 1e-10

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_simplex_vertices_give_unit_ball(self, n):
        V = g.regular_simplex(n).vertices
        E, w = el.mvee(V)
        assert np.abs(E.shape - np.eye(n)).max() < 1e-8
        assert np.linalg.norm(E.center) < 1e-8
        assert np.abs(w - 1.0 / (n + 1)).max() < 1e-8

    def test_interior_points_get_zero_weight(self):
        rng = make_rng(3)
        inner = 0.4 * rng.standard_normal((6, 3))
        inner /= np.maximum(np.linalg.norm(inner, axis=1), 1.0)[:, None]
        pts = np.vstack([g.regular_simplex(3).vertices, 0.5 * inner])
        E, w = el.mvee(pts, eps=1e-7)
        assert w[4:].max() < 1e-6
        assert np.abs(E.shape - np.eye(3)).max() < 1e-8

    def test_certificate_and_containment(self):
        rng = make_rng(8)
        pts = rng.standard_normal((25, 3))
        E, w = el.mvee(pts, eps=1e-7)
        assert el.mvee_support_residual(pts, w) <= 1e-7
        assert np.all(E.contains_points(pts, tol=1e-9))
        assert abs(w.sum() - 1.0) < 1e-9

    def test_degenerate_points_rejected(self):
        flat = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.0]])
        with pytest.raises(g.DegenerateBodyError):
            el.mvee(flat)

    def test_eps_range_validated(self):
        with pytest.raises(g.GeometryError):
            el.mvee(np.eye(3), eps=0.7)


class TestPolarEllipsoid:
    def test_centered_ellipsoid_inverts_shape(self):
        A = np.diag([4.0, 0.25])
        E = g.Ellipsoid(np.zeros(2), A)
        P = el.polar_ellipsoid(E)
        assert np.abs(P.shape - np.linalg.inv(A)).max() < 1e-12

    def test_shifted_ball_polar_contains_origin(self):
        E = g.Ellipsoid(np.array([0.3, 0.0]), np.eye(2))
        P = el.polar_ellipsoid(E)
        # support of the polar equals the gauge of the original on rays
        u = np.array([1.0, 0.0])
        h = float(P.support_many(u[None, :])[0])
        assert abs(h - 1.0 / (1.0 + 0.3)) < 1e-10  # nearest boundary point at 1.3... polar radius 1/1.3

    def test_requires_interior_origin(self):
        E = g.Ellipsoid(np.array([2.0, 0.0]), np.eye(2))
        with pytest.raises(g.GeometryError):
            el.polar_ellipsoid(E)


class TestJohnContactMeasure:
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_simplex_contact_weights(self, n):
        decomp = el.john_contact_measure(g.regular_simplex(n))
        assert decomp.contacts.k == n + 1
        assert np.abs(decomp.contacts.weights - n / (n + 1.0)).max() < 1e-6
        assert decomp.ok(1e-6)

    def test_scaled_cube_contacts(self):
        c = g.cube(2, half_width=1.0 / math.sqrt(2.0))
        decomp = el.john_contact_measure(c)
        rep = decomp.contacts.validate()
        assert rep.max_residual < 1e-6
        assert abs(decomp.contacts.mass() - 2.0) < 1e-6

    @pytest.mark.parametrize("n", [2, 3])
    def test_random_polytopes_validate(self, n):
        for trial in range(25):
            rng = make_rng(1000 + 31 * n + trial)
            pts = rng.standard_normal((20, n))
            decomp = el.john_contact_measure(g.Polytope(vertices=pts))
            assert decomp.contacts.validate().max_residual < 1e-6
            assert decomp.boundary_residual < 1e-6
            assert decomp.contacts.k <= iso.support_bound(n)

    @pytest.mark.parametrize("n", [2, 3])
    def test_contact_weights_at_most_one(self, n):
        for trial in range(20):
            mu = el.random_isotropic_measure(n, 18, seed=77 * n + trial)
            assert mu.weights.max() <= 1.0 + 1e-6

    def test_contacts_on_body_boundary(self):
        decomp = el.john_contact_measure(g.regular_simplex(3))
        # contact points are vertices of the normalised body on the sphere
        V = decomp.body.vertices
        D = np.linalg.norm(decomp.contacts.points[:, None, :] - V[None, :, :], axis=2)
        assert D.min(axis=1).max() < 1e-6


class TestJohnEllipsoidOfPolar:
    @pytest.mark.parametrize("n", [2, 3])
    def test_polar_simplex_john_ball(self, n):
        E = el.john_ellipsoid_of_polar(g.regular_simplex_polar(n))
        assert np.abs(E.shape - np.eye(n)).max() < 1e-8
        assert np.linalg.norm(E.center) < 1e-8

    def test_scaling_equivariance(self):
        big = g.Polytope(vertices=2.0 * g.regular_simplex_polar(3).vertices)
        E = el.john_ellipsoid_of_polar(big)
        assert np.abs(E.shape - np.eye(3) / 4.0).max() < 1e-8

    def test_ball_from_tangent_halfspaces(self):
        rng = make_rng(5)
        U = rng.standard_normal((100, 2))
        U /= np.linalg.norm(U, axis=1)[:, None]
        body = g.Polytope(halfspaces=(U, np.ones(100)))
        body = g.Polytope(vertices=body.vertices)
        E = el.john_ellipsoid_of_polar(body)
        assert np.abs(E.shape - np.eye(2)).max() < 0.02


class TestRandomIsotropicMeasure:
    def test_generic_triangle_measure(self):
        mu = el.random_isotropic_measure(2, 3, seed=4)
        assert mu.k == 3
        assert mu.validate().max_residual < 1e-6

    def test_determinism(self):
        a = el.random_isotropic_measure(3, 25, seed=11)
        b = el.random_isotropic_measure(3, 25, seed=11)
        assert np.array_equal(a.points, b.points)
        assert np.array_equal(a.weights, b.weights)

    def test_support_bound_after_reduction(self):
        mu = el.random_isotropic_measure(2, 50, seed=9)
        assert mu.k <= iso.support_bound(2) == 6

    def test_requires_enough_points(self):
        with pytest.raises(g.GeometryError):
            el.random_isotropic_measure(3, 3, seed=0)
