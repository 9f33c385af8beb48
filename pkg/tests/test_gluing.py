"""Global construction: admissible range, height quadrature, reflected
profile, phases, junction smoothness, and the glued immersions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biconsurf import diffgeo, gluing, spherical
from biconsurf.numerics import OutOfDomain
from conftest import refined_singular_integral


@pytest.fixture(scope="module")
def at():
    return gluing.atlas(1.0, 1.0)


class TestCstarRange:
    def test_reference_value(self):
        rng = gluing.cstar_range(1.0)
        assert rng.upper == pytest.approx(2.0842397718205974, rel=1e-14)
        assert rng.lower == 0.0

    def test_open_interval(self):
        rng = gluing.cstar_range(1.0)
        assert not rng.contains(rng.upper)
        assert not rng.contains(0.0)
        assert rng.contains(0.5 * rng.upper)

    def test_blows_up_at_threshold(self):
        assert gluing.cstar_range(spherical.C_MIN + 1e-10).upper > 1e4

    def test_invalid_c(self):
        with pytest.raises(gluing.InvalidC):
            gluing.cstar_range(0.5)

    def test_atlas_rejects_inadmissible(self):
        with pytest.raises(gluing.InvalidC):
            gluing.build_atlas(1.0, 3.0)


class TestHeightFunction:
    def test_base_point(self, at):
        assert at.h0(at.roots.xi00) == 0.0

    def test_limits_vs_midpoint_oracle(self, at):
        r = at.roots

        def g(t):
            tv = float(spherical.T(1.0, t))
            return math.sqrt((3 * t * t - tv) / (t ** 4 * tv))

        left, le = refined_singular_integral(g, r.xi01, r.xi00, True, False)
        right, re_ = refined_singular_integral(g, r.xi00, r.xi02, False, True)
        m1, p1 = at.h_limits
        assert m1 == pytest.approx(-left, abs=1e-8 + 10 * le)
        assert p1 == pytest.approx(right, abs=1e-8 + 10 * re_)
        # frozen oracle values
        assert m1 == pytest.approx(-1.359894422590082, abs=1e-7)
        assert p1 == pytest.approx(0.38162416784530295, abs=1e-7)

    def test_strictly_increasing(self, at):
        r = at.roots
        xs = np.linspace(r.xi01 + 1e-9, r.xi02 - 1e-9, 50)
        hs = [at.h0(float(x)) for x in xs]
        assert np.all(np.diff(hs) > 0.0)

    def test_derivative_blows_up_at_ends(self, at):
        r = at.roots
        interior = at.h0_deriv(r.xi00)
        for d in (1e-4, 1e-8, 1e-12):
            assert at.h0_deriv(r.xi01 + d) > at.h0_deriv(r.xi01 + 100 * d)
            assert at.h0_deriv(r.xi02 - d) > interior
        assert at.h0_deriv(r.xi01 + 1e-12) > 1e5

    def test_inverse_round_trip(self, at):
        m1, p1 = at.h_limits
        for y in np.linspace(m1 + 1e-4, p1 - 1e-4, 23):
            xi = at.h0_inverse(float(y))
            assert at.h0(xi) == pytest.approx(float(y), abs=1e-11)

    def test_inverse_near_limits(self, at):
        m1, p1 = at.h_limits
        assert at.h0_inverse(p1 - 1e-3) == pytest.approx(at.roots.xi02, abs=2e-2)
        assert at.h0_inverse(m1) == at.roots.xi01
        assert at.h0_inverse(p1) == at.roots.xi02

    def test_inverse_out_of_range(self, at):
        with pytest.raises(OutOfDomain):
            at.h0_inverse(at.h_limits[1] + 0.1)

    def test_generic_monotone_inverse_on_height(self, at):
        # the generic kernel inverter agrees with the atlas machinery
        from biconsurf.numerics import monotone_inverse
        r = at.roots
        xi_base = monotone_inverse(at.h0, r.xi01, r.xi02, 0.0, tol=1e-12)
        assert xi_base == pytest.approx(r.xi00, abs=1e-9)
        y = at.h_limits[1] - 1e-3
        xi_near_top = monotone_inverse(at.h0, r.xi01, r.xi02, y, tol=1e-12)
        assert r.xi02 - xi_near_top < 2e-2    # hugs the upper root
        assert at.h0(xi_near_top) == pytest.approx(y, abs=1e-10)


class TestGridAndPhases:
    def test_grid_closed_form(self, at):
        m1, p1 = at.h_limits
        for k in range(1, at.k_max + 1):
            assert at.grid[k] == pytest.approx(k * p1 - (k - 1) * m1, abs=1e-12)
        for k in range(-at.k_max, 0):
            assert at.grid[k] == pytest.approx(-k * m1 + (k + 1) * p1, abs=1e-12)

    def test_uniform_spacing(self, at):
        delta = at.h_limits[1] - at.h_limits[0]
        for k in range(1, at.k_max):
            assert at.grid[k + 1] - at.grid[k] == pytest.approx(delta, abs=1e-12)

    def test_phase_base(self, at):
        assert at.phase(0) == pytest.approx(at.c0, abs=1e-15)

    def test_phase_first_step(self, at):
        zm, zp = at.zeta_limits
        assert gluing.phase_distance(at.phase(1), -2.0 * zp - at.c0) < 1e-12

    def test_recursion_matches_closed_form(self, at):
        for k in range(-25, 26):
            assert gluing.phase_distance(at.phase(k), at.phase_by_recursion(k)) < 1e-12

    def test_nonzero_c0_consistency(self):
        a2 = gluing.build_atlas(1.0, 1.0, c0=0.7, k_max=5)
        for k in range(-12, 13):
            assert gluing.phase_distance(a2.phase(k), a2.phase_by_recursion(k)) < 1e-12


class TestReflectedProfile:
    def test_junction_values(self, at):
        m1, p1 = at.h_limits
        assert at.F(p1) == at.roots.xi02
        assert at.F(m1) == at.roots.xi01
        assert at.F(at.grid[2]) == at.roots.xi01
        assert at.F(at.grid[3]) == at.roots.xi02
        assert at.F(at.grid[-2]) == at.roots.xi02
        assert at.F(at.grid[-3]) == at.roots.xi01

    def test_base_point(self, at):
        assert at.F(0.0) == pytest.approx(at.roots.xi00, abs=1e-12)

    @given(h=st.floats(-3.0, 3.0))
    @settings(max_examples=40, deadline=None)
    def test_periodicity(self, h):
        a = gluing.atlas(1.0, 1.0)
        assert a.F(h + a.period) == pytest.approx(a.F(h), abs=1e-12)

    def test_mirror_symmetry_across_junctions(self, at):
        for k in (1, -1, 2):
            hj = at.grid[k]
            for s in (1e-3, 0.05, 0.3):
                assert at.F(hj + s) == pytest.approx(at.F(hj - s), abs=1e-12)

    def test_range_confinement(self, at):
        rng = np.random.default_rng(3)
        for h in rng.uniform(-5.0, 5.0, 100):
            xi = at.F(float(h))
            assert at.roots.xi01 <= xi <= at.roots.xi02


class TestJunctionSmoothness:
    def test_orders_match(self, at):
        for k in (1, -1):
            rep = at.junction_smoothness(k)
            for fn, orders in rep.items():
                for o, d in orders.items():
                    assert d["relative_mismatch"] < 1e-3, (fn, o, d)

    def test_profile_first_derivative_vanishes(self, at):
        rep = at.junction_smoothness(1, orders=(1,), functions=("F",))
        d = rep["F"][1]
        assert abs(d["left"]) < 1e-8
        assert abs(d["right"]) < 1e-8

    def test_rejected_phase_branch_breaks_c1(self):
        bad = gluing.build_atlas(1.0, 1.0, k_max=3, rejected_phases=True)
        rep = bad.junction_smoothness(1, orders=(1,), functions=("phi1",))
        assert rep["phi1"][1]["relative_mismatch"] > 1e-2
        good = gluing.build_atlas(1.0, 1.0, k_max=3)
        rep2 = good.junction_smoothness(1, orders=(1,), functions=("phi1",))
        assert rep2["phi1"][1]["relative_mismatch"] < 1e-3

    def test_out_of_atlas(self, at):
        with pytest.raises(ValueError):
            at.junction_smoothness(0)
        with pytest.raises(ValueError):
            at.junction_smoothness(99)


class TestRevolutionSurface:
    def test_radius_range(self, at):
        rng = np.random.default_rng(5)
        lo = at.Cstar / at.roots.xi02
        hi = at.Cstar / at.roots.xi01
        for h in rng.uniform(-4.0, 4.0, 64):
            assert lo - 1e-12 <= at.radius(float(h)) <= hi + 1e-12

    def test_pullback_metric(self, at):
        patch = at.psi_patch((at.h_limits[0] - 1.0, at.grid[2]))
        for h in (-1.2, -0.3, 0.1, 0.5, 1.0):
            E, F, G = diffgeo.fundamental_forms(patch, h, 0.7)
            Ec, Gc = at.psi_metric(h)
            assert E == pytest.approx(Ec, rel=1e-6)
            assert G == pytest.approx(Gc, rel=1e-6)
            assert abs(F) < 1e-10

    def test_one_minus_K_positive(self, at):
        patch = at.psi_patch((at.h_limits[0] - 1.0, at.grid[2]))
        for h in (-1.0, 0.2, 0.9):
            d = diffgeo.shape_operator(patch, h, 0.4)
            assert 1.0 - d.K > 0.0
            assert d.K == pytest.approx(
                spherical.gauss_curvature_DC(at.F(h)), abs=1e-6)

    def test_mean_curvature_closed_form(self, at):
        patch = at.psi_patch((at.h_limits[0] - 1.0, at.grid[2]))
        for frac in np.linspace(0.1, 0.9, 16):
            xi = at.roots.xi01 + frac * (at.roots.xi02 - at.roots.xi01)
            h = at.h0(float(xi))
            d = diffgeo.shape_operator(patch, h, 0.4)
            assert d.f == pytest.approx(at.mean_curvature_psi(float(xi)), abs=1e-5)

    def test_mean_curvature_sign_flip_for_large_cstar(self):
        # near the admissibility threshold the closed form changes sign
        # along the profile; the oracle (oriented for f >= 0) matches |f|
        C = spherical.C_MIN + 0.02
        Cs = 0.5 * gluing.cstar_range(C).upper
        a2 = gluing.build_atlas(C, Cs, k_max=2)
        xi_hi = a2.roots.xi01 + 0.92 * (a2.roots.xi02 - a2.roots.xi01)
        assert a2.mean_curvature_psi(xi_hi) < 0.0
        patch = a2.psi_patch((a2.h_limits[0], a2.grid[2]))
        d = diffgeo.shape_operator(patch, a2.h0(xi_hi), 0.4)
        assert d.f == pytest.approx(abs(a2.mean_curvature_psi(xi_hi)), abs=1e-5)

    def test_mean_curvature_depends_on_cstar(self):
        a1 = gluing.atlas(1.0, 1.0)
        a2 = gluing.build_atlas(1.0, 0.5)
        xi = 3.0
        assert abs(a1.mean_curvature_psi(xi) - a2.mean_curvature_psi(xi)) > 1e-3

    def test_denominator_positive_on_strip(self, at):
        for frac in np.linspace(0.001, 0.999, 33):
            xi = at.roots.xi01 + frac * (at.roots.xi02 - at.roots.xi01)
            rad = 9 * xi * xi - 3 * at.Cstar ** 2 * float(spherical.T(1.0, xi))
            assert rad > 0.0

    def test_not_biconservative(self, at):
        # the revolution surface satisfies the closed-form mean curvature,
        # not the eigenvector identity: its residual stays O(1)
        patch = at.psi_patch((at.h_limits[0], at.h_limits[1]))
        for h in (-0.5, 0.1, 0.3):
            assert diffgeo.biconservativity_residual(patch, h, 0.4) > 1e-2


class TestGluedImmersion:
    def test_unit_norm_random(self, at):
        rng = np.random.default_rng(11)
        for _ in range(200):
            h = rng.uniform(-4.0, 4.0)
            th = rng.uniform(0.0, 2 * math.pi)
            assert abs(np.linalg.norm(at.immersion_phi(h, th)) - 1.0) < 1e-10

    def test_junction_continuity(self, at):
        # offsets this close to a junction sit at the sqrt(eps)
        # representation limit of the profile inverse (~1e-8)
        eps = 1e-10
        for k in (1, -1, 2, -2):
            hj = at.grid[k]
            a = at.immersion_phi(hj - eps, 0.4)
            b = at.immersion_phi(hj + eps, 0.4)
            c = at.immersion_phi(hj, 0.4)
            assert np.max(np.abs(a - b)) < 1e-7
            assert np.max(np.abs(a - c)) < 1e-7

    def test_base_strip_matches_local_immersion(self, at):
        # on the base strip with c0 = 0 the glued map is the strip immersion
        fam = spherical.family(1.0)
        h, th = 0.15, 0.6
        xi = at.F(h)
        assert at.immersion_phi(h, th) == pytest.approx(fam.immersion(xi, th), abs=1e-11)

    def test_base_point_components(self, at):
        p1, p2, p3 = at.profile_components(0.0)
        xi00 = at.roots.xi00
        assert p1 == pytest.approx(math.sqrt(1.0 - 1.0 / xi00 ** 2), rel=1e-12)
        assert p2 == pytest.approx(0.0, abs=1e-12)
        assert p3 == pytest.approx(1.0 / xi00, rel=1e-12)

    def test_rotational_components_are_periodic(self, at):
        for h in (-0.9, 0.2, 1.1):
            a = at.profile_components(h)
            b = at.profile_components(h + at.period)
            assert a[2] == pytest.approx(b[2], abs=1e-12)

    def test_pullback_metric_multi_strip(self, at):
        patch = at.phi_patch((at.h_limits[0] - 1.0, at.grid[2]), (0.0, 1.0))
        for h in (-1.3, -0.4, 0.2, 0.55, 1.2, 1.9):
            E, F, G = diffgeo.fundamental_forms(patch, h, 0.4)
            Ec, Gc = at.psi_metric(h)
            assert E == pytest.approx(Ec, rel=1e-6)
            assert G == pytest.approx(Gc, rel=1e-6)

    def test_biconservative_across_strips(self, at):
        patch = at.phi_patch((at.h_limits[0] - 1.0, at.grid[2]), (0.0, 1.0))
        for h in (-0.6, 0.2, 0.9, 1.4):
            assert diffgeo.biconservativity_residual(patch, h, 0.3) < 1e-4

    def test_partials_validate(self, at):
        patch = at.phi_patch((0.05, 0.3), (0.0, 1.0))
        rep = diffgeo.validate_patch(patch)
        assert rep["ok"]


class TestPeriodicityProbe:
    def test_reports_phase_defect(self, at):
        rep = at.periodicity_probe()
        # 2(zeta_{0,1} - zeta_{0,-1}) = 4.2375241939... at C = C* = 1;
        # its circle distance to a full turn is 2pi - that
        assert rep["phase_defect"] == pytest.approx(2.0 * math.pi - 4.2375241939, abs=1e-6)
        assert not rep["periodic_within_tol"]
        assert rep["max_mismatch_rotational_components"] < 1e-10

    def test_component_mismatch_consistent_with_defect(self, at):
        rep = at.periodicity_probe()
        # a nonzero angle defect forces visible first-component mismatch
        assert rep["max_component_mismatch"] > 0.1
