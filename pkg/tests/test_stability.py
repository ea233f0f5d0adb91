import math

import numpy as np
import pytest

from simplexstab import ellipsoids as el
from simplexstab import functionals as fn
from simplexstab import geometry as g
from simplexstab import stability as st
from simplexstab.rng import make_rng


class TestMakeFamily:
    def test_vertex_added_shapes(self):
        fam = st.make_family("vertex-added", 2, [0.01, 0.05])
        assert fam.side == "lowner"
        for K in fam.bodies:
            assert K.vertices.shape == (4, 2)
            assert g.contains(K, g.regular_simplex(2))
            assert np.linalg.norm(K.vertices, axis=1).max() <= 1.0 + 1e-12

    def test_vertex_added_continuity(self):
        fam = st.make_family("vertex-added", 2, [1e-4])
        d = g.hausdorff_distance(fam.bodies[0], g.regular_simplex(2))
        assert d < 5e-4

    def test_corner_cut_overcut_rejected(self):
        with pytest.raises(st.FamilyError):
            # cut edge reaching half the full edge: cuts collide
            st.make_family("corner-cut", 2, [0.09], cut_scale=6.0)
        st.make_family("corner-cut", 2, [0.05])  # fine at the default scale

    def test_eps_range_enforced(self):
        with pytest.raises(st.FamilyError):
            st.make_family("vertex-added", 2, [0.2])
        with pytest.raises(st.FamilyError):
            st.make_family("vertex-added", 2, [0.0, 0.01])

    def test_unknown_kind(self):
        with pytest.raises(st.FamilyError):
            st.make_family("bogus", 2, [0.01])

    def test_polar_vertex_added_contains_ball(self):
        fam = st.make_family("polar-vertex-added", 2, [0.02])
        K = fam.bodies[0]
        assert fam.side == "john"
        assert g.contains(K, g.Polytope(vertices=0.999 * g.cross_polytope(2).vertices))

    def test_stretched_vertex_bumps(self):
        fam = st.make_family("stretched-vertex", 3, [0.03])
        K = fam.bodies[0]
        assert K.vertices.shape == (8, 3)
        assert g.contains(K, g.regular_simplex(3), tol=1e-9)


class TestAlignment:
    @pytest.mark.parametrize("n", [2, 3])
    def test_rotated_member_recovered(self, n):
        Q, _ = np.linalg.qr(make_rng(n).standard_normal((n, n)))
        K = g.Polytope(vertices=g.regular_simplex(n).vertices @ Q.T)
        res = st.align_to_simplex(K, g.regular_simplex(n), seed=1)
        assert res.delta_H < 1e-8

    def test_reflection_recovered(self):
        V = g.regular_simplex(2).vertices * np.array([-1.0, 1.0])
        res = st.align_to_simplex(g.Polytope(vertices=V), g.regular_simplex(2), seed=1)
        assert res.delta_H < 1e-8

    def test_family_alignment_is_stable(self):
        K = st.make_family("vertex-added", 2, [0.01]).bodies[0]
        a = st.align_to_simplex(K, g.regular_simplex(2), seed=5)
        b = st.align_to_simplex(K, g.regular_simplex(2), seed=5)
        assert a.delta_H == b.delta_H
        assert 0.0 < a.delta_H < 0.2

    def test_point_alignment_exact_on_simplex(self):
        V = g.regular_simplex(3).vertices
        _, d = st.align_points_to_simplex_vertices(V, 3, seed=2)
        assert d < 1e-10


class TestMeasureDeficit:
    def test_simplex_deficit_vanishes(self):
        d, se = st.measure_deficit(g.regular_simplex(2), "lowner",
                                   n_samples=100_000, seed=3)
        assert abs(d) <= max(3.0 * se, 1e-12)

    def test_polar_simplex_deficit_vanishes(self):
        d, se = st.measure_deficit(g.regular_simplex_polar(3), "john",
                                   n_samples=100_000, seed=3)
        assert abs(d) <= max(3.0 * se, 1e-12)

    def test_ball_deficit_closed_form(self):
        # 1 - ell(ball)/ell(simplex) in the plane: 1 - sqrt(pi/2)/(2 * oracle)
        expect = 1.0 - fn.ell_ball(2) / (2.0 * fn.simplex_ell_oracle(2))
        assert abs(expect - 0.3954) < 5e-4
        d, se = st.measure_deficit(g.Ball(1.0, 2), "lowner",
                                   n_samples=400_000, seed=4)
        assert abs(d - expect) <= 3.0 * se

    def test_deficit_decreases_to_zero_along_family(self):
        fam = st.make_family("vertex-added", 2, np.geomspace(1e-3, 0.09, 6))
        deficits = [st.measure_deficit(K, "lowner", n_samples=100_000, seed=5)[0]
                    for K in fam.bodies]
        assert all(np.diff(deficits) > 0)
        assert deficits[0] < 1e-3

    def test_normalisation_guard(self):
        K = g.Polytope(vertices=0.5 * g.regular_simplex(2).vertices)
        with pytest.raises(st.NormalizationError):
            st.measure_deficit(K, "lowner", n_samples=1000, seed=6)


class TestFitExponent:
    def test_vertex_added_slope_near_one(self):
        fam = st.make_family("vertex-added", 2, np.geomspace(2e-3, 0.09, 8))
        rep = st.fit_exponent(fam, n_samples=200_000, seed=11)
        assert rep.distance_used == "delta_vol"
        assert 0.8 <= rep.slope <= 1.2
        assert rep.r_squared > 0.98
        assert all(r.bound_margin_log10 > 0 for r in rep.rows)

    def test_corner_cut_slope_near_half(self):
        fam = st.make_family("corner-cut", 2, np.geomspace(1e-3, 0.09, 8))
        rep = st.fit_exponent(fam, n_samples=200_000, seed=12)
        assert rep.distance_used == "delta_H"
        assert 0.35 <= rep.slope <= 0.65

    def test_stretched_vertex_width_slope_near_half(self):
        # the facet bumps keep the width deficit ~ h^n while the Hausdorff
        # distance tracks h, so the fitted exponent is 1/n
        fam = st.make_family("stretched-vertex", 2, np.geomspace(1e-4, 0.095, 8))
        rep = st.fit_exponent(fam, n_samples=200_000, seed=22)
        assert rep.distance_used == "delta_H"
        assert 0.4 <= rep.slope <= 0.6

    def test_insufficient_span_raises(self):
        fam = st.make_family("vertex-added", 2, np.geomspace(0.04, 0.06, 6))
        with pytest.raises(st.InsufficientSignalError):
            st.fit_exponent(fam, n_samples=50_000, seed=13)


def _perturbed_contacts(n, angle, seed):
    rng = make_rng(seed)
    out = []
    for v in g.regular_simplex(n).vertices:
        t = rng.standard_normal(n)
        t -= (t @ v) * v
        t /= np.linalg.norm(t)
        out.append(math.cos(angle) * v + math.sin(angle) * t)
    return np.array(out)


class TestSandwich:
    def test_exact_contacts_give_equality(self):
        rep = st.sandwich_check(g.regular_simplex(2).vertices, 0.0)
        assert rep["ok"]
        assert abs(rep["inner_margin"]) < 1e-9
        assert abs(rep["outer_margin"]) < 1e-9

    @pytest.mark.parametrize("n", [2, 3])
    def test_perturbed_contacts(self, n):
        contacts = _perturbed_contacts(n, 1e-3, seed=7)
        rep = st.sandwich_check(contacts, 1e-3)
        assert rep["hypothesis_ok"]
        assert rep["ok"]

    def test_far_atom_violates_hypothesis(self):
        far = np.array([math.cos(0.5), math.sin(0.5)])
        far = np.vstack([g.regular_simplex(2).vertices, far / np.linalg.norm(far)])
        rep = st.sandwich_check(far, 1e-2)
        assert not rep["hypothesis_ok"]
        assert not rep["ok"]


class TestCentroidBound:
    def test_exact_circumscribed_simplex(self):
        S1 = g.regular_simplex_polar(3)
        rep = st.centroid_bound_check(S1, 0.0)
        assert rep["ok"]
        assert rep["centroid_gauge"] < 1e-9

    def test_perturbed_facets(self):
        U = _perturbed_contacts(2, 1e-2, seed=8)
        S1 = g.Polytope(halfspaces=(U, np.ones(3)))
        rep = st.centroid_bound_check(S1, 1e-2)
        assert rep["ok"]

    def test_consumed_fraction_shrinks_with_eta(self):
        # coherent tilt toward a fixed direction: the used fraction of the
        # bound decreases as the tilt grows
        n = 2
        z = np.array([1.0, 0.3])
        z /= np.linalg.norm(z)
        fractions = []
        for eta in (0.002, 0.005, 0.01, 0.02, 0.05):
            U = []
            for w in g.regular_simplex(n).vertices:
                t = z - (z @ w) * w
                t /= np.linalg.norm(t)
                U.append(math.cos(eta) * w + math.sin(eta) * t)
            S1 = g.Polytope(halfspaces=(np.array(U), np.ones(n + 1)))
            rep = st.centroid_bound_check(S1, eta)
            assert rep["ok"]
            fractions.append(rep["centroid_gauge"] / rep["bound"])
        assert all(np.diff(fractions) < 0)

    def test_requires_tangent_facets(self):
        S1 = g.Polytope(halfspaces=(g.regular_simplex(2).vertices, np.full(3, 2.0)))
        with pytest.raises(g.GeometryError):
            st.centroid_bound_check(S1, 0.1)


class TestExtremality:
    def test_simplex_support_has_zero_deficits(self):
        rep = st.extremality_check(g.regular_simplex(2).vertices,
                                   n_samples=50_000, seed=9)
        assert abs(rep["lowner_deficit"]) < 1e-12
        assert abs(rep["john_deficit"]) < 1e-12
        assert rep["support_distance"] < 1e-8

    @pytest.mark.parametrize("n", [2, 3])
    def test_random_supports_are_dominated(self, n):
        for trial in range(10):
            mu = el.random_isotropic_measure(n, 20, seed=40 + 7 * trial)
            rep = st.extremality_check(mu.points, n_samples=100_000, seed=10)
            assert rep["lowner_deficit"] >= -3.0 * rep["lowner_stderr"]
            assert rep["john_deficit"] >= -3.0 * rep["john_stderr"]

    def test_support_distance_bound_is_vacuous(self):
        # the distance bound with constant n^(28 n) is astronomically slack
        mu = el.random_isotropic_measure(2, 12, seed=44)
        rep = st.extremality_check(mu.points, n_samples=100_000, seed=11)
        eps = max(rep["lowner_deficit"], 1e-12)
        assert math.log10(rep["support_distance"]) <= 28 * 2 * math.log10(2) + 0.25 * math.log10(eps)


class TestBoundMargins:
    def test_margin_formula(self):
        # n = 2, eps = 1e-4, delta = 0.1: log10 margin = 52 log10(2) - 1 - (-1)
        got = st.stability_bound_log10(2, 1e-4, 0.1)
        want = 52.0 * math.log10(2.0) + 0.25 * math.log10(1e-4) - math.log10(0.1)
        assert abs(got - want) < 1e-12
        assert st.stability_bound_log10(2, 0.0, 0.1) == math.inf
