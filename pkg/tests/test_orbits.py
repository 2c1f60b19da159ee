import math

import numpy as np
import pytest

from reebfol import orbits
from reebfol.profile import lambda0
from reebfol.surgery import lutz_radii

TWO_PI = 2.0 * math.pi


def bisect(fn, lo, hi, iters=200):
    flo = fn(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if flo * fn(mid) <= 0:
            hi = mid
        else:
            lo, flo = mid, fn(mid)
    return 0.5 * (lo + hi)


class TestScanTori:
    def test_lambda0_meridian_class_empty(self, lam0):
        assert orbits.scan_tori(lam0, 1, 0) == []

    def test_lambda0_longitude_class_continuum(self, lam0):
        with pytest.raises(orbits.ContinuumError):
            orbits.scan_tori(lam0, 0, 1)

    def test_half_lutz_meridian_torus(self, half_lutz):
        tori = orbits.scan_tori(half_lutz, 1, 0)
        assert len(tori) == 1
        t = tori[0]
        # oracle: independent bisection on g'
        rho1 = bisect(lambda r: half_lutz.g(r, 1), 0.2, 0.7)
        assert t.r == pytest.approx(rho1, abs=1e-9)
        # negatively oriented meridian: theta frozen, phi decreasing
        assert (t.p, t.q) == (1, 0)
        xt, xp = half_lutz.reeb_field(t.r)
        assert abs(xt) < 1e-10 and xp < 0
        assert t.morse_bott

    def test_full_lutz_two_tori(self, full_lutz):
        tori = orbits.scan_tori(full_lutz, 1, 0)
        assert len(tori) == 2
        assert all(t.morse_bott for t in tori)
        assert {(t.p, t.q) for t in tori} == {(1, 0), (-1, 0)}

    def test_interval_filter(self, half_lutz):
        t = orbits.scan_tori(half_lutz, 1, 0)[0]
        inside = orbits.scan_tori(half_lutz, 1, 0, (t.r - 0.05, t.r + 0.05))
        outside = orbits.scan_tori(half_lutz, 1, 0, (t.r + 0.05, 2.0))
        assert len(inside) == 1 and outside == []

    def test_roots_satisfy_defining_equation(self, cond4):
        prof, _, _ = cond4
        for t in orbits.scan_tori(prof, 1, 1):
            val = t.q * prof.f(t.r, 1) - TWO_PI * t.p * prof.g(t.r, 1)
            assert abs(val) < 1e-10
            assert t.period > 0

    def test_coprimality_normalized(self, half_lutz):
        t1 = orbits.scan_tori(half_lutz, 1, 0)
        t2 = orbits.scan_tori(half_lutz, 3, 0)
        assert t1[0].r == pytest.approx(t2[0].r, abs=1e-12)
        assert (t2[0].p, t2[0].q) == (t1[0].p, t1[0].q)


class TestTorusPeriod:
    def test_scaled_flat_profile(self):
        c = 3.0
        prof = lambda0(c=c)
        assert orbits.torus_period(prof, 0.5, 0, 1) == pytest.approx(c, rel=1e-14)

    def test_sign_flip_same_period(self, half_lutz):
        t = orbits.scan_tori(half_lutz, 1, 0)[0]
        T1 = orbits.torus_period(half_lutz, t.r, t.p, t.q)
        T2 = orbits.torus_period(half_lutz, t.r, -t.p, -t.q)
        assert T1 == pytest.approx(T2, rel=1e-14)

    def test_both_expressions_agree(self, cond4):
        prof, _, _ = cond4
        t = orbits.scan_tori(prof, 1, 1)[0]
        D = prof.wronskian(t.r)
        T_g = t.q * D / prof.g(t.r, 1)
        T_f = TWO_PI * t.p * D / prof.f(t.r, 1)
        assert abs(T_g - T_f) <= 1e-10 * max(1.0, abs(T_g))

    def test_flow_oracle_agreement(self, half_lutz):
        t = orbits.scan_tori(half_lutz, 1, 0)[0]
        T = orbits.torus_period(half_lutz, t.r, t.p, t.q)
        T_flow = orbits.reeb_return_time(half_lutz, t.r, t.p, t.q)
        assert abs(T - T_flow) <= 1e-6 * T


class TestMorseBott:
    def test_lambda0_never(self, lam0):
        for r in (0.2, 0.5, 0.9):
            assert not orbits.is_morse_bott(lam0, r)

    def test_direct_substitution(self, half_lutz):
        t = orbits.scan_tori(half_lutz, 1, 0)[0]
        val = (half_lutz.f(t.r, 2) * half_lutz.g(t.r, 1)
               - half_lutz.f(t.r, 1) * half_lutz.g(t.r, 2))
        assert orbits.is_morse_bott(half_lutz, t.r) == (abs(val) > 1e-9)
        assert orbits.is_morse_bott(half_lutz, t.r)

    def test_open_book_interior(self, open_book):
        # exact polynomial arithmetic oracle on a sampled radius
        r = 0.2
        sign = (open_book.f(r, 2) * open_book.g(r, 1)
                - open_book.f(r, 1) * open_book.g(r, 2))
        assert orbits.is_morse_bott(open_book, r) == (abs(sign) > 1e-9)


class TestCentralCZ:
    def test_lambda0_degenerate(self, lam0):
        assert orbits.central_cz(lam0, 1).degenerate

    def test_ratio_minus_pi(self):
        # f''(0)/g''(0) = -pi gives -f''(0)/(2 pi g''(0)) = 1/2, index 1
        from reebfol.profile import Profile, Segment
        prof = Profile([Segment(0.0, 1.0, np.array([1.0, 0.0, -np.pi / 2]),
                                np.array([0.0, 0.0, 0.5]), np.array([1.0]))])
        assert prof.validate_contact().valid
        c = orbits.central_cz(prof, 1)
        assert not c.degenerate and c.mu_cz == 1

    def test_open_book_family_matches_oracle(self, open_book):
        for k in range(1, 6):
            cz = orbits.central_cz(open_book, k)
            w = orbits.winding_oracle(open_book, k)
            assert not cz.degenerate
            assert cz.mu_cz == w

    def test_parity_and_monotonicity(self, seeded_profiles):
        for prof in seeded_profiles:
            mus = []
            for k in range(1, 6):
                c = orbits.central_cz(prof, k)
                if c.degenerate:
                    mus.append(None)
                    continue
                assert c.mu_cz % 2 == 1
                mus.append(c.mu_cz)
            ratio = prof.f(0.0, 2) / (TWO_PI * prof.g(0.0, 2))
            if ratio > 0:
                seq = [m for m in mus if m is not None]
                assert all(a >= b for a, b in zip(seq, seq[1:]))

    def test_frame_winding_offset(self, open_book):
        base = orbits.central_cz(open_book, 1).mu_cz
        shifted = orbits.central_cz(open_book, 1, frame_winding=2).mu_cz
        assert shifted == base + 4

    def test_zero_f_at_axis_rejected(self):
        from reebfol.profile import Profile, Segment
        prof = Profile([Segment(0.0, 1.0, np.array([0.0, 0.0, 1.0]),
                                np.array([0.0, 0.0, 1.0]), np.array([1.0]))],
                       check=False)
        with pytest.raises(Exception):
            orbits.central_cz(prof, 1)


class TestWindingOracle:
    def test_lambda0_degenerate(self, lam0):
        assert orbits.winding_oracle(lam0, 1) is None

    def test_degenerate_covers_stay_degenerate(self, seeded_profiles):
        # if the k-cover is degenerate (integer winding), so is the 2k-cover
        for prof in seeded_profiles[:5]:
            for k in (1, 2):
                if orbits.winding_oracle(prof, k) is None:
                    assert orbits.winding_oracle(prof, 2 * k) is None

    def test_agreement_across_seeds(self, seeded_profiles):
        for prof in seeded_profiles:
            for k in range(1, 6):
                cz = orbits.central_cz(prof, k)
                w = orbits.winding_oracle(prof, k)
                if cz.degenerate:
                    assert w is None
                else:
                    assert w == cz.mu_cz


class TestReturnTime:
    def test_flat_profile_longitude(self):
        prof = lambda0(c=3.0)
        t = orbits.reeb_return_time(prof, 0.5, 0, 1)
        assert t == pytest.approx(3.0, abs=1e-8)

    def test_non_closing_off_torus(self, half_lutz):
        with pytest.raises(orbits.NonClosingError):
            orbits.reeb_return_time(half_lutz, 1.0, 1, 0, max_factor=50)

    def test_half_lutz_meridian(self, half_lutz):
        t = orbits.scan_tori(half_lutz, 1, 0)[0]
        T = orbits.reeb_return_time(half_lutz, t.r, t.p, t.q)
        assert T == pytest.approx(t.period, rel=1e-6)
