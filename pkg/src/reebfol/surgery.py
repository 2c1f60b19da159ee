"""Profile transformations: Lutz twists, rational twist surgery, core extension.

A Lutz twist replaces the core of a normalized profile so the plane trajectory
``rho -> (f, g)`` winds an extra half or full turn around the origin.  Twist
surgery pulls a profile back through an SL(2, Z) regluing of the solid torus,
acting on (f, g) by an explicit linear formula that preserves the Wronskian
pointwise.  ``extend_core`` closes a pulled-back profile over the axis while
certifying the inward-acceleration condition and the axis-slope relation that
force the innermost foliation cylinders to have index two.  Branched-cover
bookkeeping for links with general linking numbers is pure integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _poly, _taylor
from .orbits import combination_roots, normalize_pq
from .profile import Profile, ProfileError, Segment

TWO_PI = 2.0 * math.pi


class NormalizationError(ValueError):
    """Input profile is not (1, rho^2) where the operation requires it."""


class ConstructionError(RuntimeError):
    """A constructed profile failed its own certificates."""


class MatrixError(ValueError):
    """Surgery matrix is not in SL(2, Z)."""


# ---------------------------------------------------------------------------
# SL(2, Z) framing data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurgeryMatrix:
    """Gluing matrix (n q; m p) acting on (theta', eta'); det must be one."""

    n: int
    q: int
    m: int
    p: int

    def __post_init__(self):
        if self.n * self.p - self.q * self.m != 1:
            raise MatrixError(
                f"det (n p - q m) = {self.n * self.p - self.q * self.m}, expected 1"
            )

    @classmethod
    def identity(cls) -> "SurgeryMatrix":
        return cls(1, 0, 0, 1)

    def is_identity(self) -> bool:
        return (self.n, self.q, self.m, self.p) == (1, 0, 0, 1)

    def __matmul__(self, other: "SurgeryMatrix") -> "SurgeryMatrix":
        return SurgeryMatrix(
            n=self.n * other.n + self.q * other.m,
            q=self.n * other.q + self.q * other.p,
            m=self.m * other.n + self.p * other.m,
            p=self.m * other.q + self.p * other.p,
        )

    def framing(self) -> str:
        return f"{self.p}/{self.q}"


def orbit_homology_class(matrix: SurgeryMatrix,
                         torus_class: tuple[int, int]) -> tuple[int, int]:
    """Express a torus orbit class upstairs after regluing.

    ``torus_class = (a, b)`` counts meridians and longitudes on the boundary
    of the removed neighborhood.  The returned pair are the coefficients of
    (lambda', mu') on the glued-in torus; a negatively oriented meridian
    (-1, 0) maps to (q, -n).
    """
    a, b = int(torus_class[0]), int(torus_class[1])
    lam = matrix.p * b - matrix.q * a
    mu = matrix.n * a - matrix.m * b
    return lam, mu


def annotate_homology(tori, matrix: SurgeryMatrix):
    """Return orbit tori with homology_note filled in from their (p, q) class."""
    out = []
    for t in tori:
        note = orbit_homology_class(matrix, (-t.p, t.q))
        out.append(
            type(t)(r=t.r, p=t.p, q=t.q, period=t.period,
                    morse_bott=t.morse_bott, homology_note=note)
        )
    return out


# ---------------------------------------------------------------------------
# Branched-cover linking arithmetic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LiftArithmetic:
    """Component count of a link preimage in the cyclic branched cover."""

    linking_numbers: tuple[int, ...]
    n: int
    components: tuple[tuple[int, int], ...]  # (count, lk_each) per input knot

    def to_dict(self) -> dict:
        return {
            "linking_numbers": list(self.linking_numbers),
            "n": self.n,
            "components": [list(c) for c in self.components],
        }


def cover_lift(linking_numbers) -> LiftArithmetic:
    """Cover degree and per-knot component data for the cyclic cover.

    The degree is the lcm of all linking numbers with the binding orbit; a
    knot of linking number l lifts to gcd(n, l) components, each of linking
    number l / gcd(n, l) — hence all ones when n is the lcm.
    """
    lks = [int(l) for l in linking_numbers]
    if not lks:
        raise ValueError("need at least one linking number")
    if any(l <= 0 for l in lks):
        raise ValueError("linking numbers with the binding orbit must be positive")
    n = math.lcm(*lks)
    comps = tuple((math.gcd(n, l), l // math.gcd(n, l)) for l in lks)
    return LiftArithmetic(tuple(lks), n, comps)


# ---------------------------------------------------------------------------
# Twist surgery pullback
# ---------------------------------------------------------------------------


def surgery_pullback(profile: Profile, matrix: SurgeryMatrix,
                     interval: tuple[float, float] | None = None) -> Profile:
    """Pull (f, g) back through the regluing on the given radial interval.

    The new pair is (n f + 2 pi m g, q f / 2 pi + p g); beta rides along
    unchanged.  Because the matrix has determinant one the Wronskian is
    preserved pointwise, so contact positivity transfers exactly.  The result
    has ``rho_min = interval[0]`` and generally needs a core extension.
    """
    if interval is None:
        lo, hi = profile.rho_min, profile.rho_max
    else:
        lo, hi = float(interval[0]), float(interval[1])
    part = profile.restrict(lo, hi)
    if matrix.is_identity():
        return part
    segs = []
    for s in part.segments:
        f_new = _poly.poly_sum(
            _poly.poly_scale(s.f, matrix.n), _poly.poly_scale(s.g, TWO_PI * matrix.m)
        )
        g_new = _poly.poly_sum(
            _poly.poly_scale(s.f, matrix.q / TWO_PI), _poly.poly_scale(s.g, matrix.p)
        )
        segs.append(Segment(s.lo, s.hi, f_new, g_new, s.beta.copy()))
    return Profile(segs, rho_min=lo, check=False)


# ---------------------------------------------------------------------------
# Lutz twists
# ---------------------------------------------------------------------------


def _check_normalized(profile: Profile, lo: float, hi: float, tol: float = 1e-9):
    part = profile.restrict(lo, hi)
    for s in part.segments:
        f = np.zeros(max(3, len(s.f)))
        g = np.zeros(max(3, len(s.g)))
        f[: len(s.f)] += s.f
        g[: len(s.g)] += s.g
        f[0] -= 1.0
        g[2] -= 1.0
        if np.max(np.abs(f)) > tol or np.max(np.abs(g)) > tol:
            raise NormalizationError(
                f"profile is not (1, rho^2) on [{s.lo}, {s.hi}] "
                f"(required on [{lo}, {hi}])"
            )


def _twist_reference_jets(x0: float, delta: float, alpha0: float):
    """Order-3 jets of the reference trajectory at radius x0.

    The reference keeps the standard modulus sqrt(1 + rho^4) and adds winding
    W = alpha0 (1 - (rho/delta)^2)^4 to the standard angle arctan(rho^2); W is
    even in rho, vanishes to third order at delta, and is monotone, so the
    curve spirals counterclockwise from the x-axis out to the standard arc.
    """
    j = _taylor.Jet.variable(x0)
    r2 = j * j
    u = j * (1.0 / delta)
    w = (1.0 - u * u).power(4) * alpha0
    angle = _taylor.arctan(r2) + w
    amp = _taylor.sqrt(r2 * r2 + 1.0)
    f = amp * _taylor.cos(angle)
    g = amp * _taylor.sin(angle)
    return f.derivatives(), g.derivatives()


def lutz_twist(profile: Profile, kind: str, delta: float,
               n_knots: int | None = None) -> Profile:
    """Half or full Lutz twist of a profile normalized to (1, rho^2) near delta.

    The core [0, delta] is rebuilt so the trajectory winds an extra pi (half)
    or 2 pi (full) around the origin: jets of a closed-form spiral are sampled
    at interior knots, joined by degree-7 two-point fits, and capped with an
    even axis segment.  beta is carried over from the innermost original
    segment.  The output agrees with the input on [delta, rho_max] exactly and
    is re-validated; failure to produce a positive contact form is a
    construction bug, not a user error.
    """
    if kind not in ("half", "full"):
        raise ValueError("kind must be 'half' or 'full'")
    if not 0.0 < delta < profile.rho_max:
        raise ValueError("delta must lie strictly inside the profile")
    if profile.rho_min != 0.0:
        raise ValueError("twist needs a full profile containing the axis")
    _check_normalized(profile, delta, profile.rho_max)

    alpha0 = -math.pi if kind == "half" else -TWO_PI
    if n_knots is None:
        n_knots = 10 if kind == "half" else 16
    # equidistribute knots in the extra winding (1 - u^2)^4: segments narrow
    # where the spiral turns fastest and widen near delta where it is flat
    v = np.linspace(1.0, 0.0, n_knots)
    knot_rho = np.sqrt(1.0 - v[1:] ** 0.25) * delta
    n_knots = len(knot_rho)

    jets = [_twist_reference_jets(x, delta, alpha0) for x in knot_rho]
    # exact standard jets at the outer knot (the reference matches them to
    # third order anyway)
    jets[-1] = (
        np.array([1.0, 0.0, 0.0, 0.0]),
        np.array([delta**2, 2 * delta, 2.0, 0.0]),
    )

    beta_core = profile.segments[0].beta.copy()
    segs = []
    f_ax = _poly.even_axis_segment(knot_rho[0], jets[0][0], pinned={2: 0.0})
    g_ax = _poly.even_axis_segment(knot_rho[0], jets[0][1], powers=(2, 4, 6, 8))
    segs.append(Segment(0.0, knot_rho[0], f_ax, g_ax, beta_core))
    for i in range(n_knots - 1):
        a, b = knot_rho[i], knot_rho[i + 1]
        f_c = _poly.hermite_segment(a, b, jets[i][0], jets[i + 1][0])
        g_c = _poly.hermite_segment(a, b, jets[i][1], jets[i + 1][1])
        segs.append(Segment(a, b, f_c, g_c, beta_core))
    outer = profile.restrict(delta, profile.rho_max)
    segs.extend(outer.segments)

    out = Profile(segs)
    report = out.validate_contact()
    if not report.valid:
        raise ConstructionError(
            "internal twist construction failed the contact certificate: "
            + "; ".join(f"{v.condition} at {v.where}" for v in report.violations)
        )
    # structural promises of a twist
    rho0, rho1 = lutz_radii(out, delta)
    if rho0 is None or rho1 is None:
        raise ConstructionError("twist did not create the promised g and g' zeros")
    return out


def lutz_radii(profile: Profile, delta: float | None = None):
    """(rho0, rho1): the largest zero of g in (0, delta) and the largest zero
    of g' below it with f' > 0 there; None when absent."""
    hi = delta if delta is not None else profile.rho_max
    floor = profile.axis_floor
    g_roots: list[float] = []
    gp_roots: list[float] = []
    for seg in profile.segments:
        a, b = max(seg.lo, floor), min(seg.hi, hi)
        if b - a <= 1e-14:
            continue
        if not _poly.is_zero_poly(seg.g):
            g_roots.extend(_poly.real_roots(seg.g, a, b))
        gp = _poly.derivative(seg.g)
        if not _poly.is_zero_poly(gp):
            gp_roots.extend(_poly.real_roots(gp, a, b))
    g_roots = [r for r in g_roots if r > floor * 2]
    rho0 = max(g_roots) if g_roots else None
    rho1 = None
    if rho0 is not None:
        below = [
            r for r in gp_roots
            if floor * 2 < r < rho0 - 1e-12 and profile.f(r, 1) > 0.0
        ]
        rho1 = max(below) if below else None
    return rho0, rho1


def trajectory_winding(profile: Profile, lo: float = 0.0, hi: float | None = None,
                       n: int = 4096) -> float:
    """Total angle swept by rho -> (f, g) around the origin on [lo, hi]."""
    hi = profile.rho_max if hi is None else hi
    rho = np.linspace(lo, hi, n)
    ang = np.unwrap(np.arctan2(profile.g(rho), profile.f(rho)))
    return float(ang[-1] - ang[0])


# ---------------------------------------------------------------------------
# Core extension with certified conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoreConstraints:
    """Targets for extend_core.

    (p, q) is the signed cylinder class of the innermost outer region, i.e.
    q f' - 2 pi p g' > 0 just above the extension radius.  ``gap`` bounds the
    axis slope relation f'(r)/g'(r) - f''(0)/g''(0) from above (and zero from
    below) when q != 0, which pins the innermost cylinder index at two.
    """

    p: int
    q: int
    gap: float = 1e-2
    require_condition3: bool = True


@dataclass
class ConditionsReport:
    contact_valid: bool
    integral_surgery: bool | None = None
    overtwisted_marker: bool | None = None
    condition3: dict | None = None
    condition4: dict | None = None
    no_new_roots: bool | None = None
    extension_path: str | None = None
    core_rate: float | None = None
    rate_ok: bool | None = None

    def to_dict(self) -> dict:
        return {
            "contact_valid": self.contact_valid,
            "integral_surgery": self.integral_surgery,
            "overtwisted_marker": self.overtwisted_marker,
            "condition3": self.condition3,
            "condition4": self.condition4,
            "no_new_roots": self.no_new_roots,
            "extension_path": self.extension_path,
            "core_rate": self.core_rate,
            "rate_ok": self.rate_ok,
        }


def _curvature_coeffs(seg: Segment) -> np.ndarray:
    """Coefficients of f' g'' - f'' g' on a segment (trajectory turning)."""
    df, ddf = _poly.derivative(seg.f), _poly.derivative(seg.f, 2)
    dg, ddg = _poly.derivative(seg.g), _poly.derivative(seg.g, 2)
    return _poly.poly_sum(_poly.poly_product(df, ddg),
                          -_poly.poly_product(ddf, dg))


def certify_condition3(profile: Profile, rho1: float) -> tuple[bool, float | None]:
    """Certify f' g'' - f'' g' > 0 on (0, rho1] by per-segment root isolation.

    The expression vanishes to third order on the axis, so near zero the sign
    is taken from the rho^3 coefficient with an explicit sliver bound, exactly
    like the Wronskian certificate.
    """
    for i, seg in enumerate(profile.segments):
        if seg.lo >= rho1 - 1e-14:
            break
        hi = min(seg.hi, rho1)
        w2 = _curvature_coeffs(seg)
        lo = seg.lo
        if i == 0 and profile.rho_min == 0.0:
            if len(w2) < 4 or w2[3] <= 0.0:
                return False, 0.0
            tail = float(np.sum(np.abs(w2[4:]))) if len(w2) > 4 else 0.0
            lo = min(1e-8, 0.1 * w2[3] / tail) if tail > 0 else 1e-8
        xs = np.linspace(max(lo, seg.lo + 1e-14), hi, 65)
        vals = np.polynomial.polynomial.polyval(xs, w2)
        j = int(np.argmin(vals))
        if vals[j] <= 0.0:
            return False, float(xs[j])
        if _poly.is_zero_poly(w2):
            return False, float(seg.lo)
        roots = [r for r in _poly.real_roots(w2, max(lo, seg.lo), hi)
                 if r > lo + 1e-12 and r < rho1 - 1e-12]
        if roots:
            return False, float(roots[0])
    return True, None


def _no_new_roots(profile: Profile, p: int, q: int, delta: float) -> bool:
    floor = profile.axis_floor
    try:
        roots = combination_roots(profile, p, q, floor, delta - 1e-9)
    except Exception:
        return False
    return not [r for r in roots if r > 2 * floor]


def _axis_slope(profile: Profile) -> float:
    return profile.f(0.0, 2) / profile.g(0.0, 2)


def _beta_axis_even(outer: Profile, delta: float) -> np.ndarray:
    jets = np.array([outer.beta(delta, k) for k in range(4)])
    beta = _poly.even_axis_segment(delta, jets, powers=(0, 2, 4, 6))
    if beta[0] <= 0.0:
        raise ConstructionError("core extension produced beta(0) <= 0")
    return beta


def _assemble(outer: Profile, core_segments) -> Profile:
    return Profile(list(core_segments) + list(outer.segments))


def _jets_at(outer: Profile, delta: float, which: str) -> np.ndarray:
    return np.array([outer.eval(delta, which, k) for k in range(4)])


def _direct_core(outer: Profile, delta: float, cons: CoreConstraints,
                 slope_target: float | None):
    fj = _jets_at(outer, delta, "f")
    gj = _jets_at(outer, delta, "g")
    g_ax = _poly.even_axis_segment(delta, gj, powers=(2, 4, 6, 8))
    if cons.q != 0 and slope_target is not None:
        f2 = slope_target * g_ax[2]
        f_ax = _poly.even_axis_segment(delta, fj, pinned={2: f2})
    else:
        f_ax = _poly.even_axis_segment(delta, fj, pinned={2: 0.0})
    beta = _beta_axis_even(outer, delta)
    return [Segment(0.0, delta, f_ax, g_ax, beta)]


def _designed_core(outer: Profile, delta: float, cons: CoreConstraints):
    """Shaped core in the coordinates (u, g), u = q f - 2 pi p g.

    u is built monotone increasing from a negative axis value (so the class
    combination q f' - 2 pi p g' stays positive with the prescribed small axis
    value fixed by the gap), g descends from zero at the prescribed quadratic
    rate; a degree-7 bridge joins the designed axis piece to the outer jets.
    Certification happens in the caller; here we only try candidate shapes.
    """
    p, q = cons.p, cons.q
    if q == 0:
        return _designed_core_q0(outer, delta, cons)
    fj = _jets_at(outer, delta, "f")
    gj = _jets_at(outer, delta, "g")
    uj = q * fj - TWO_PI * p * gj
    sq = 1 if q > 0 else -1
    beta = _beta_axis_even(outer, delta)

    # the leaf equations depend on (f, g) only through u = q f - 2 pi p g, so
    # the transverse dynamics (and every residual certificate downstream) are
    # governed by the tameness of u alone.  Design u through its derivative:
    # a quintic joining the axis rates to the outer jet of u', plus a bump
    # vanishing to second order at both ends whose closed-form weight pins
    # u(0) at the required negative value; the antiderivative is the bridge.
    for u0_scale in (0.05, 0.15, 0.3, 0.8):
        for rm_frac in (0.25, 0.4, 0.55):
            for b2_scale in (0.35, 0.7, 0.15):
                b2 = -sq * max(1.0, b2_scale * abs(gj[1]) / delta)
                a2 = abs(q) * abs(b2) * cons.gap
                a4 = max(1.0, abs(b2))
                u0_target = -max(0.25, u0_scale * abs(uj[0]))
                rho_m = rm_frac * delta
                w = delta - rho_m
                u_ax = np.array([u0_target, 0.0, a2, 0.0, a4])
                g_ax = np.array([0.0, 0.0, b2])
                du_ax = _poly.derivative(u_ax)
                m = _poly.hermite5_segment(
                    rho_m, delta,
                    _poly.jet_of_poly(du_ax, rho_m)[:3], uj[1:])
                bump = _poly.poly_product(
                    np.polynomial.polynomial.polypow(
                        np.array([-rho_m, 1.0]), 3),
                    np.polynomial.polynomial.polypow(
                        np.array([delta, -1.0]), 3),
                ) / (w / 2.0) ** 6
                u_plain = _poly.poly_antiderivative(
                    m, delta, uj[0])
                bump_int = _poly.poly_antiderivative(bump, delta, 0.0)
                gap_val = (float(np.polynomial.polynomial.polyval(rho_m, u_plain))
                           - (u0_target + a2 * rho_m**2 + a4 * rho_m**4))
                denom = float(np.polynomial.polynomial.polyval(rho_m, bump_int))
                kappa = gap_val / -denom if denom != 0.0 else 0.0
                u_br = _poly.poly_sum(u_plain, _poly.poly_scale(bump_int, kappa))
                g_br = _poly.hermite_segment(
                    rho_m, delta, _poly.jet_of_poly(g_ax, rho_m), gj)
                f_ax = (u_ax + TWO_PI * p * _pad(g_ax, len(u_ax))) / q
                f_br = _poly.poly_sum(
                    u_br, _poly.poly_scale(g_br, TWO_PI * p)) / q
                yield [
                    Segment(0.0, rho_m, f_ax, _pad(g_ax, 3), beta),
                    Segment(rho_m, delta, f_br, g_br, beta),
                ]


def _designed_core_q0(outer: Profile, delta: float, cons: CoreConstraints):
    p = cons.p
    fj = _jets_at(outer, delta, "f")
    gj = _jets_at(outer, delta, "g")
    sp = 1 if p > 0 else -1
    beta = _beta_axis_even(outer, delta)
    for b2_scale in (0.35, 0.7, 0.15):
        for f0_scale in (0.25, 0.6, 0.1):
            for rm_frac in (0.5, 0.65, 0.35):
                b2 = -sp * max(1.0, b2_scale * abs(gj[1]) / delta)
                f0 = math.copysign(max(0.25, f0_scale * abs(fj[0])), b2)
                f_ax = np.array([f0, 0.0, b2, 0.0, -b2])
                g_ax = np.array([0.0, 0.0, b2])
                rho_m = rm_frac * delta
                f_br = _poly.hermite_segment(rho_m, delta,
                                             _poly.jet_of_poly(f_ax, rho_m), fj)
                g_br = _poly.hermite_segment(rho_m, delta,
                                             _poly.jet_of_poly(g_ax, rho_m), gj)
                yield [
                    Segment(0.0, rho_m, f_ax, g_ax, beta),
                    Segment(rho_m, delta, f_br, g_br, beta),
                ]


def _pad(c: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(max(n, len(c)))
    out[: len(c)] = c
    return out


def _taylor_jets_poly(jets: np.ndarray, x0: float) -> np.ndarray:
    """Cubic polynomial (monomial basis) with the given order-3 jet at x0."""
    t = np.array([jets[0], jets[1], jets[2] / 2.0, jets[3] / 6.0])
    return _poly._compose_affine(t, x0, 1.0)


def _class_rate_max(profile: Profile, p: int, q: int, lo: float, hi: float) -> float:
    """Max of |d/drho (q f' - 2 pi p g')| / beta on [lo, hi] (leaf stiffness)."""
    rr = np.linspace(max(lo, 1e-6), hi, 4096)
    u2 = q * profile.f(rr, 2) - TWO_PI * p * profile.g(rr, 2)
    return float(np.max(np.abs(u2 / profile.beta(rr))))


def _certify_core(full: Profile, delta: float, cons: CoreConstraints,
                  rho1: float | None, r_inner: float | None,
                  rate_cap: float | None = None) -> ConditionsReport:
    rep = ConditionsReport(contact_valid=full.validate_contact().valid)
    rep.no_new_roots = _no_new_roots(full, cons.p, cons.q, delta)
    if rate_cap is not None:
        rep.core_rate = _class_rate_max(full, cons.p, cons.q, 0.0, delta)
        rep.rate_ok = rep.core_rate <= rate_cap
    if rho1 is not None and cons.require_condition3:
        ok, witness = certify_condition3(full, rho1)
        rep.condition3 = {"holds": ok, "rho1": rho1, "witness": witness}
    if cons.q != 0 and r_inner is not None:
        slope = full.f(r_inner, 1) / full.g(r_inner, 1)
        val = slope - _axis_slope(full)
        rep.condition4 = {
            "value": val,
            "gap": cons.gap,
            "holds": bool(0.0 < val <= cons.gap * (1.0 + 1e-9)),
            "r": r_inner,
        }
    return rep


def _core_ok(rep: ConditionsReport, cons: CoreConstraints) -> bool:
    if not (rep.contact_valid and rep.no_new_roots):
        return False
    if rep.rate_ok is False:
        return False
    if rep.condition3 is not None and cons.require_condition3 \
            and not rep.condition3["holds"]:
        return False
    if rep.condition4 is not None and not rep.condition4["holds"]:
        return False
    return True


def extend_core(outer: Profile, constraints: CoreConstraints
                ) -> tuple[Profile, ConditionsReport]:
    """Close a pulled-back profile over the axis, certifying the conditions.

    Tries the plain even C^3 continuation first (which reproduces polynomial
    data such as (1, rho^2) exactly); when its certificates fail, falls back
    to a family of shaped cores designed around the class combination
    q f - 2 pi p g.  Raises ConstructionError when no candidate passes.
    """
    if outer.rho_min <= 0.0:
        raise ValueError("outer data must start at a positive radius")
    delta = outer.rho_min
    p, q = normalize_pq(constraints.p, constraints.q)
    cons = CoreConstraints(p=p, q=q, gap=constraints.gap,
                           require_condition3=constraints.require_condition3)
    if cons.gap <= 0.0:
        raise ConstructionError("slope gap must be positive (gap = 0 is infeasible)")

    outer_roots = combination_roots(outer, p, q, delta, outer.rho_max)
    rho1 = max(outer_roots) if outer_roots else None
    r_inner = min(outer_roots) if outer_roots else None
    slope_target = None
    if q != 0:
        if r_inner is None:
            raise ConstructionError(
                "no torus of the requested class in the outer region; "
                "the axis slope relation has no reference"
            )
        slope_target = TWO_PI * p / q - cons.gap

    # the stiffness of the outer data bounds what any extension must carry;
    # cores stiffer than a few times that would degrade every leaf residual
    hi_ref = r_inner if r_inner is not None else min(2 * delta, outer.rho_max)
    rate_cap = max(300.0, 3.0 * _class_rate_max(outer, p, q, delta, hi_ref))

    attempts = [("direct", _direct_core(outer, delta, cons, slope_target))]
    best_fail: ConditionsReport | None = None
    for label, core in attempts:
        try:
            full = _assemble(outer, core)
        except ProfileError:
            continue
        rep = _certify_core(full, delta, cons, rho1, r_inner, rate_cap)
        rep.extension_path = label
        if _core_ok(rep, cons):
            return full, rep
        best_fail = rep
    for core in _designed_core(outer, delta, cons):
        try:
            full = _assemble(outer, core)
        except ProfileError:
            continue
        rep = _certify_core(full, delta, cons, rho1, r_inner, rate_cap)
        rep.extension_path = "designed"
        if _core_ok(rep, cons):
            return full, rep
        best_fail = rep
    detail = best_fail.to_dict() if best_fail is not None else {}
    raise ConstructionError(
        f"no core extension satisfied the certificates; last attempt: {detail}"
    )


# ---------------------------------------------------------------------------
# Full surgery plans
# ---------------------------------------------------------------------------


@dataclass
class SurgeryPlan:
    """A twist surgery: optional Lutz twist, regluing matrix, core rebuild.

    The twist (when requested) rebuilds [0, epsilon], the matrix pulls the
    result back on [delta, rho_max], and the core is re-extended over
    [0, delta].  delta must end up below the twist's outermost g'-zero.
    """

    base: Profile
    matrix: SurgeryMatrix
    delta: float
    epsilon: float
    twist: str = "half"  # 'half' | 'full' | 'none'
    gap: float = 1e-2

    def __post_init__(self):
        if not 0.0 < self.delta < self.epsilon <= self.base.rho_max + 1e-12:
            raise ValueError("need 0 < delta < epsilon <= rho_max")
        if self.twist not in ("half", "full", "none"):
            raise ValueError("twist must be 'half', 'full' or 'none'")
        if self.twist == "none":
            _check_normalized(self.base, 0.95 * self.epsilon, self.epsilon)


def run_plan(plan: SurgeryPlan) -> tuple[Profile, ConditionsReport]:
    """Execute a surgery plan and certify the resulting profile."""
    if plan.twist == "none":
        twisted = plan.base
    else:
        twisted = lutz_twist(plan.base, plan.twist, plan.epsilon)
    _, rho1 = lutz_radii(twisted, plan.epsilon)
    if rho1 is not None and plan.delta >= rho1:
        raise ValueError(
            f"delta = {plan.delta} must lie below the twist radius rho1 = {rho1}"
        )
    outer = surgery_pullback(twisted, plan.matrix, (plan.delta, twisted.rho_max))
    cons = CoreConstraints(p=plan.matrix.n, q=plan.matrix.q, gap=plan.gap)
    full, rep = extend_core(outer, cons)
    rep.integral_surgery = abs(plan.matrix.q) <= 1
    rep.overtwisted_marker = _has_g_zero(full, plan.epsilon)
    return full, rep


def _has_g_zero(profile: Profile, hi: float) -> bool:
    floor = profile.axis_floor
    for seg in profile.segments:
        a, b = max(seg.lo, floor), min(seg.hi, hi)
        if b - a <= 1e-14 or _poly.is_zero_poly(seg.g):
            continue
        if [r for r in _poly.real_roots(seg.g, a, b) if r > 2 * floor]:
            return True
    return False
