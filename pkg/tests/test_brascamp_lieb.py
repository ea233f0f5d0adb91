import itertools

import numpy as np
import pytest

from simplexstab import brascamp_lieb as bl
from simplexstab import ellipsoids as el
from simplexstab import isotropic as iso
from simplexstab.rng import make_rng


def lifted_instance(n, k_points, seed, s):
    mu = el.random_isotropic_measure(n, k_points, seed)
    return bl.BLInstance(iso.lift(mu, +1), s)


class TestBounds:
    def test_bound_is_truncated_mass_power(self):
        inst = bl.BLInstance(iso.lift(iso.simplex_measure(2), +1), 0.1)
        from simplexstab.transport import gtilde_integral
        assert abs(bl.bl_bound(inst) - gtilde_integral(0.1) ** 3) < 1e-12

    def test_instance_requires_isotropic_lift(self):
        L = iso.lift(iso.simplex_measure(2), +1)
        L.weights = L.weights * 1.05  # break isotropy deliberately
        with pytest.raises(ValueError):
            bl.BLInstance(L, 0.0)


class TestDirectIntegral:
    @pytest.mark.parametrize("s", [0.0, 0.1, 0.15])
    def test_orthonormal_equality(self, s):
        inst = bl.BLInstance(iso.lift(iso.simplex_measure(2), +1), s)
        est = bl.bl_lhs(inst, n_samples=300_000, seed=21)
        assert abs(est.value - bl.bl_bound(inst)) <= 3.0 * est.stderr

    def test_strict_inequality_for_many_atoms(self):
        inst = lifted_instance(2, 12, seed=5, s=0.1)
        assert inst.lifted.k >= 4
        est = bl.bl_lhs(inst, n_samples=300_000, seed=22)
        assert est.value < bl.bl_bound(inst) - 3.0 * est.stderr

    def test_large_positive_shift_removes_truncation(self):
        # as the shift grows the truncated factor becomes a full Gaussian,
        # which is the equality case of the product inequality
        inst = lifted_instance(2, 12, seed=5, s=5.0)
        est = bl.bl_lhs(inst, n_samples=200_000, seed=23)
        ratio = est.value / bl.bl_bound(inst)
        assert abs(ratio - 1.0) <= 3.0 * est.stderr / bl.bl_bound(inst) + 1e-4


class TestReverseIntegral:
    @pytest.mark.parametrize("s", [0.0, 0.1])
    def test_orthonormal_equality(self, s):
        inst = bl.BLInstance(iso.lift(iso.simplex_measure(2), +1), s)
        est = bl.rbl_lhs(inst, n_samples=40_000, seed=24)
        assert abs(est.value - bl.bl_bound(inst)) <= 3.0 * est.stderr

    def test_strict_inequality_for_many_atoms(self):
        inst = lifted_instance(2, 12, seed=5, s=0.1)
        est = bl.rbl_lhs(inst, n_samples=40_000, seed=25)
        assert est.value > bl.bl_bound(inst) + 3.0 * est.stderr

    def test_infeasible_away_from_the_pole(self):
        inst = lifted_instance(2, 10, seed=6, s=0.1)
        q, theta = bl.nonneg_transport_sup(inst, -5.0 * inst.lifted.pole)
        assert q is None and theta is None

    def test_objective_hessian_is_negative_definite(self):
        inst = lifted_instance(2, 10, seed=6, s=0.1)
        hessian = -2.0 * np.diag(inst.lifted.weights)
        assert np.linalg.eigvalsh(hessian).max() < 0

    def test_enumeration_rescue_for_hard_samples(self):
        # this instance/seed pair contains samples on which the
        # least-distance solve terminates early; the enumeration rescue
        # must keep every accepted maximiser KKT-clean
        inst = lifted_instance(3, 9, seed=7101, s=0.1)
        est = bl.rbl_lhs(inst, n_samples=25_000, seed=7301)
        assert est.value >= bl.bl_bound(inst) - 3.0 * est.stderr

    def test_inner_solver_against_active_set_enumeration(self):
        inst = lifted_instance(2, 9, seed=7, s=0.1)
        L = inst.lifted
        A = (L.points * L.weights[:, None]).T
        rng = make_rng(8)
        solver_checked = 0
        for _ in range(60):
            x = rng.standard_normal(3) + 1.5 * L.pole
            got_q, got_theta = bl.nonneg_transport_sup(inst, x)
            best = None
            for r in range(L.k):
                for zero in itertools.combinations(range(L.k), r):
                    free = [i for i in range(L.k) if i not in zero]
                    UF = L.points[free]
                    G = (UF * L.weights[free][:, None]).T @ UF
                    if abs(np.linalg.det(G)) < 1e-12:
                        continue
                    nu = np.linalg.solve(G, x - inst.s * A[:, free] @ np.ones(len(free)))
                    theta_f = inst.s + UF @ nu
                    if theta_f.min() < -1e-10:
                        continue
                    theta = np.zeros(L.k)
                    theta[free] = theta_f
                    if np.linalg.norm(A @ theta - x) > 1e-8:
                        continue
                    q = float(L.weights @ (theta - inst.s) ** 2)
                    if best is None or q < best:
                        best = q
            assert (got_q is None) == (best is None)
            if best is not None:
                assert abs(got_q - best) < 1e-8 * max(1.0, best)
                solver_checked += 1
        assert solver_checked >= 30


class TestDilateIdentities:
    @pytest.mark.parametrize("s", [0.0, 0.1, 0.15])
    def test_planar_inscribed(self, s):
        rep = bl.simplex_identity_check(2, s, n_samples=1_000_000, seed=31)
        assert rep.rel_gap < 5e-3

    def test_planar_polar(self):
        rep = bl.simplex_identity_check(2, 0.1, n_samples=1_000_000, seed=32,
                                        variant="polar")
        assert rep.rel_gap < 5e-3

    @pytest.mark.parametrize("variant", ["inscribed", "polar"])
    def test_spatial_both_variants(self, variant):
        rep = bl.simplex_identity_check(3, 0.15, n_samples=1_000_000, seed=33,
                                        variant=variant)
        assert rep.rel_gap < 1e-2

    def test_gap_is_balanced_by_stderr(self):
        rep = bl.simplex_identity_check(2, 0.0, n_samples=400_000, seed=34)
        assert abs(rep.gap) <= 5.0 * rep.stderr + 5e-4 * rep.rhs


class TestSmoothedComparison:
    def test_simplex_measure_gives_equality(self):
        rep = bl.smoothing_inequality_check(iso.simplex_measure(2), [0.3],
                                            n_samples=100_000, seed=35)
        row = rep["rows"][0]
        assert abs(row["direct_margin"]) <= 3.0 * max(row["direct_stderr"], 1e-12)
        assert abs(row["polar_margin"]) <= 3.0 * max(row["polar_stderr"], 1e-12)

    def test_random_measure_margins(self):
        mu = el.random_isotropic_measure(2, 10, seed=36)
        rep = bl.smoothing_inequality_check(mu, [0.0, 0.5, 1.0],
                                            n_samples=400_000, seed=37)
        assert rep["ok"]

    def test_three_dimensional_measure(self):
        mu = el.random_isotropic_measure(3, 12, seed=38)
        rep = bl.smoothing_inequality_check(mu, [0.0, 1.0],
                                            n_samples=300_000, seed=39)
        assert rep["ok"]
