import math

import numpy as np
import pytest

from reebfol import _poly, orbits, surgery
from reebfol.profile import Profile, lambda0
from reebfol.surgery import (
    ConstructionError,
    CoreConstraints,
    MatrixError,
    NormalizationError,
    SurgeryMatrix,
    SurgeryPlan,
)

TWO_PI = 2.0 * math.pi


def g_zero_radii(prof, hi):
    floor = prof.axis_floor
    out = []
    for seg in prof.segments:
        a, b = max(seg.lo, floor), min(seg.hi, hi)
        if b - a <= 1e-14 or _poly.is_zero_poly(seg.g):
            continue
        out.extend(r for r in _poly.real_roots(seg.g, a, b) if r > 2 * floor)
    return sorted(out)


class TestLutzTwist:
    def test_half_single_g_zero(self, half_lutz):
        # oracle: root isolation on g per segment
        zeros = g_zero_radii(half_lutz, 1.2)
        assert len(zeros) == 1

    def test_full_winding_and_axis_sign(self, full_lutz):
        assert full_lutz.f(0.0) > 0
        w = surgery.trajectory_winding(full_lutz, 0.0, 1.2)
        assert w == pytest.approx(TWO_PI + math.atan(1.2**2), abs=0.05)

    def test_half_winding_and_axis_sign(self, half_lutz):
        assert half_lutz.f(0.0) < 0
        w = surgery.trajectory_winding(half_lutz, 0.0, 1.2)
        assert w == pytest.approx(math.pi + math.atan(1.2**2), abs=0.05)

    def test_output_revalidates(self, half_lutz, full_lutz):
        assert half_lutz.validate_contact().valid
        assert full_lutz.validate_contact().valid

    def test_promised_radii(self, half_lutz):
        rho0, rho1 = surgery.lutz_radii(half_lutz, 1.2)
        assert rho0 is not None and rho1 is not None
        assert 0 < rho1 < rho0 < 1.2
        assert abs(half_lutz.g(rho0)) < 1e-9
        assert abs(half_lutz.g(rho1, 1)) < 1e-8
        assert half_lutz.f(rho1, 1) > 0

    def test_unchanged_outside_delta(self, half_lutz, lam0_wide):
        rho = np.linspace(1.2, 2.0, 100)
        np.testing.assert_allclose(half_lutz.f(rho), lam0_wide.f(rho),
                                   rtol=0, atol=1e-12)
        np.testing.assert_allclose(half_lutz.g(rho), lam0_wide.g(rho),
                                   rtol=0, atol=1e-12)

    def test_requires_normalization(self, half_lutz):
        with pytest.raises(NormalizationError):
            surgery.lutz_twist(half_lutz, "half", 0.3)  # already twisted inside

    def test_bad_kind(self, lam0):
        with pytest.raises(ValueError):
            surgery.lutz_twist(lam0, "quarter", 0.5)


class TestSurgeryPullback:
    def test_identity_is_identity_bitwise(self, half_lutz):
        out = surgery.surgery_pullback(half_lutz, SurgeryMatrix.identity(),
                                       (0.3, 2.0))
        ref = half_lutz.restrict(0.3, 2.0)
        for s1, s2 in zip(out.segments, ref.segments):
            assert np.array_equal(s1.f, s2.f)
            assert np.array_equal(s1.g, s2.g)

    def test_formula_on_lambda0(self, lam0):
        out = surgery.surgery_pullback(lam0, SurgeryMatrix(1, 0, 1, 1),
                                       (0.2, 1.0))
        seg = out.segments[0]
        np.testing.assert_allclose(seg.f, [1.0, 0.0, TWO_PI], atol=1e-15)
        np.testing.assert_allclose(seg.g, [0.0, 0.0, 1.0], atol=1e-15)

    def test_wronskian_invariance_random_sl2z(self, lam0, half_lutz):
        rng = np.random.default_rng(11)
        rho = np.linspace(0.25, 0.95, 40)
        D0 = lam0.wronskian(rho)
        for _ in range(20):
            m = random_sl2z(rng)
            out = surgery.surgery_pullback(lam0, m, (0.2, 1.0))
            np.testing.assert_allclose(out.wronskian(rho), D0,
                                       rtol=0, atol=1e-12)
        # on the twist profile the coefficient scale (and hence roundoff)
        # grows with the matrix entries; the identity stays exact up to that
        rho2 = np.linspace(0.35, 1.95, 40)
        D1 = half_lutz.wronskian(rho2)
        for _ in range(10):
            m = random_sl2z(rng)
            out = surgery.surgery_pullback(half_lutz, m, (0.3, 2.0))
            scale = max(abs(m.n), abs(m.q), abs(m.m), abs(m.p)) ** 2
            np.testing.assert_allclose(out.wronskian(rho2), D1,
                                       rtol=0, atol=1e-11 * scale)

    def test_det_enforced(self):
        with pytest.raises(MatrixError):
            SurgeryMatrix(1, 1, 1, 1)


def random_sl2z(rng):
    # random word in the standard generators keeps entries modest
    mats = [np.array([[1, 1], [0, 1]]), np.array([[1, 0], [1, 1]]),
            np.array([[1, -1], [0, 1]]), np.array([[1, 0], [-1, 1]])]
    m = np.eye(2, dtype=int)
    for _ in range(int(rng.integers(1, 5))):
        m = m @ mats[rng.integers(len(mats))]
    return SurgeryMatrix(int(m[0, 0]), int(m[0, 1]), int(m[1, 0]), int(m[1, 1]))


class TestExtendCore:
    def test_trivial_extension_recovers_flat(self, lam0):
        outer = lam0.restrict(0.3, 1.0)
        full, rep = surgery.extend_core(outer, CoreConstraints(p=1, q=0))
        seg = full.segments[0]
        np.testing.assert_allclose(seg.f[:3], [1.0, 0.0, 0.0], atol=1e-10)
        np.testing.assert_allclose(seg.g[:3], [0.0, 0.0, 1.0], atol=1e-10)
        assert rep.extension_path == "direct"
        assert rep.contact_valid and rep.no_new_roots

    def test_half_lutz_identity_condition3(self, half_lutz):
        outer = surgery.surgery_pullback(half_lutz, SurgeryMatrix.identity(),
                                         (0.25, 2.0))
        full, rep = surgery.extend_core(outer, CoreConstraints(p=1, q=0))
        assert rep.contact_valid and rep.no_new_roots
        assert rep.condition3 is not None and rep.condition3["holds"]

    def test_condition4_gap_certificate(self, cond4):
        prof, plan, rep = cond4
        assert rep.condition4["holds"]
        assert 0.0 < rep.condition4["value"] <= plan.gap * (1 + 1e-9)
        slope_axis = prof.f(0.0, 2) / prof.g(0.0, 2)
        r = rep.condition4["r"]
        slope_r = prof.f(r, 1) / prof.g(r, 1)
        assert slope_r - slope_axis == pytest.approx(rep.condition4["value"])

    def test_zero_gap_infeasible(self, half_lutz):
        outer = surgery.surgery_pullback(half_lutz, SurgeryMatrix(1, 1, 0, 1),
                                         (0.3, 2.0))
        with pytest.raises(ConstructionError):
            surgery.extend_core(outer, CoreConstraints(p=1, q=1, gap=0.0))

    def test_requires_partial_profile(self, lam0):
        with pytest.raises(ValueError):
            surgery.extend_core(lam0, CoreConstraints(p=1, q=0))


class TestRunPlan:
    def test_condition4_pipeline(self, cond4):
        prof, plan, rep = cond4
        assert rep.contact_valid
        assert rep.integral_surgery
        assert rep.overtwisted_marker
        assert rep.no_new_roots
        assert rep.condition3["holds"]

    def test_delta_above_twist_radius_rejected(self, lam0_wide):
        with pytest.raises(ValueError, match="rho1"):
            surgery.run_plan(SurgeryPlan(
                base=lam0_wide, matrix=SurgeryMatrix(1, 1, 0, 1),
                delta=1.0, epsilon=1.2, twist="half"))

    def test_twist_none_needs_normalized_base(self, half_lutz):
        # rescaled base breaks the (1, rho^2) form near epsilon
        with pytest.raises(NormalizationError):
            SurgeryPlan(base=half_lutz.scale(2.0),
                        matrix=SurgeryMatrix.identity(),
                        delta=0.1, epsilon=1.5, twist="none")


class TestCoverLift:
    def test_single_knot(self):
        arith = surgery.cover_lift([3])
        assert arith.n == 3
        assert arith.components == ((3, 1),)

    def test_trivial_cover(self):
        arith = surgery.cover_lift([1, 1])
        assert arith.n == 1
        assert arith.components == ((1, 1), (1, 1))

    def test_two_and_three(self):
        # oracle: brute-force orbit count of the Z/6 action on strand labels
        arith = surgery.cover_lift([2, 3])
        assert arith.n == 6
        for lk, (count, lk_each) in zip((2, 3), arith.components):
            orbits_ = strand_orbits(arith.n, lk)
            assert count == len(orbits_)
            assert lk_each == lk // len(orbits_) == 1

    def test_conservation_random(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            lks = [int(x) for x in rng.integers(1, 13, size=rng.integers(1, 5))]
            arith = surgery.cover_lift(lks)
            for lk, (count, lk_each) in zip(lks, arith.components):
                assert count * lk_each == lk
                assert arith.n % lk == 0

    def test_positive_required(self):
        with pytest.raises(ValueError):
            surgery.cover_lift([2, 0])
        with pytest.raises(ValueError):
            surgery.cover_lift([])


def strand_orbits(n, lk):
    """Orbits of i -> i + lk on Z/n: the components of the lifted braid."""
    seen, orbits_ = set(), []
    for start in range(n):
        if start in seen:
            continue
        orbit, i = [], start
        while i not in orbit:
            orbit.append(i)
            i = (i + lk) % n
            if i == start:
                break
        orbits_.append(orbit)
        seen.update(orbit)
    return orbits_


class TestHomology:
    def test_identity_keeps_negative_meridian(self):
        assert surgery.orbit_homology_class(SurgeryMatrix.identity(),
                                            (-1, 0)) == (0, -1)

    def test_general_matrix_formula(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            m = random_sl2z(rng)
            lam, mu = surgery.orbit_homology_class(m, (-1, 0))
            assert (lam, mu) == (m.q, -m.n)

    def test_composition(self):
        # oracle: 2x2 integer matrix multiplication
        rng = np.random.default_rng(9)
        for _ in range(50):
            m1, m2 = random_sl2z(rng), random_sl2z(rng)
            cls = (int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
            via_product = surgery.orbit_homology_class(m1 @ m2, cls)
            lam1, mu1 = surgery.orbit_homology_class(m1, cls)
            # class maps compose contravariantly: apply m1's map, then m2's
            step = surgery.orbit_homology_class(m2, (mu1, lam1))
            assert via_product == step

    def test_annotation(self, half_lutz):
        tori = orbits.scan_tori(half_lutz, 1, 0)
        noted = surgery.annotate_homology(tori, SurgeryMatrix(1, 1, 0, 1))
        # meridian class (-p, q) = (-1, 0) maps to (q, -n) = (1, -1)
        assert noted[0].homology_note == (1, -1)
