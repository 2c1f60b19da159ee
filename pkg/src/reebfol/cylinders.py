"""Finite-energy foliation leaves of the symmetric ansatz.

With angular behaviour (theta, phi) = (theta0 + q t, phi0 - 2 pi p t), the
Cauchy-Riemann system for a leaf reduces to two autonomous ODEs in the
conformal coordinate s:

    d rho / ds = (q f'(rho) - 2 pi p g'(rho)) / beta(rho)
    d a   / ds =  q f(rho)  - 2 pi p g(rho)

Signs of (p, q) are fixed so the rho equation is positive on the region being
foliated, making rho(s) strictly increasing between consecutive orbit tori
(or from the axis).  The module integrates leaves, classifies their ends
(torus puncture, central-orbit puncture, removable axis fill for q = 0, or a
finite-s exit through the chart boundary), evaluates a finite-difference
residual of the full first-order system, and computes puncture signs,
Conley-Zehnder contributions, Fredholm indices and the Stokes-exact
d(lambda)-energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import _poly
from .orbits import central_cz, combination_roots, is_morse_bott, normalize_pq
from .profile import ContactError, Profile

TWO_PI = 2.0 * math.pi


class SignConventionError(ValueError):
    """(p, q) signs violate the positivity convention for the region."""


class NotMorseBottError(ValueError):
    """Puncture sign undefined: the torus is not Morse-Bott."""


class SlowConvergenceError(RuntimeError):
    """Leaf end unresolved: s_max reached before the asymptote."""


class IntervalError(ValueError):
    """The radial interval is not elementary for the requested class."""


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Puncture:
    """Asymptotic end of a leaf: which orbit, with what sign and cover."""

    end: int                 # +1 for s -> +infinity, -1 for s -> -infinity
    sign: int                # sigma = +-1
    target_kind: str         # 'torus' | 'central'
    target_r: float          # torus radius, 0.0 for the central orbit
    cover: int               # 1 for tori, |q| for the central orbit

    def to_dict(self) -> dict:
        return {
            "end": self.end,
            "sign": self.sign,
            "target_kind": self.target_kind,
            "target_r": self.target_r,
            "cover": self.cover,
        }


@dataclass(frozen=True)
class CurveTopology:
    """Topology bookkeeping of a leaf: chi = 2 - 2 genus - punctures - boundary."""

    genus: int
    punctures: int
    boundary: int
    euler: int

    def __post_init__(self):
        if self.euler != 2 - 2 * self.genus - self.punctures - self.boundary:
            raise ValueError("Euler characteristic inconsistent with the data")

    @classmethod
    def plane(cls) -> "CurveTopology":
        return cls(0, 1, 0, 1)

    @classmethod
    def cylinder(cls) -> "CurveTopology":
        return cls(0, 2, 0, 0)

    def to_dict(self) -> dict:
        return {"genus": self.genus, "punctures": self.punctures,
                "boundary": self.boundary, "euler": self.euler}


@dataclass
class EndState:
    """How one end of an integrated leaf terminated.

    kind 'puncture' carries the asymptotic-orbit record; 'removable' is the
    bounded q = 0 axis fill (stored as a flag, not extra samples); 'boundary'
    means the leaf left the chart through rho = rho_max in finite s;
    'unresolved' means s_max was hit first (slow convergence).
    """

    kind: str
    rho: float
    s: float
    puncture: Puncture | None = None
    gap: float = 0.0
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "rho": self.rho,
            "s": self.s,
            "puncture": self.puncture.to_dict() if self.puncture else None,
            "gap": self.gap,
            "note": self.note,
        }


@dataclass
class CylinderLeaf:
    """Sampled leaf (s, a(s), rho(s)) with its classification data."""

    p: int
    q: int
    theta0: float
    phi0: float
    s: np.ndarray
    a: np.ndarray
    rho: np.ndarray
    neg_end: EndState
    pos_end: EndState
    energy_dlambda: float
    boundary_term: float
    index: int | None
    topology: CurveTopology
    warnings: list[str] = field(default_factory=list)
    region: int | None = None

    @property
    def punctures(self) -> tuple[Puncture | None, Puncture | None]:
        return (self.neg_end.puncture, self.pos_end.puncture)

    def summary(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "theta0": self.theta0,
            "phi0": self.phi0,
            "rho_range": [float(self.rho[0]), float(self.rho[-1])],
            "s_range": [float(self.s[0]), float(self.s[-1])],
            "n_samples": int(len(self.s)),
            "neg_end": self.neg_end.to_dict(),
            "pos_end": self.pos_end.to_dict(),
            "energy_dlambda": self.energy_dlambda,
            "boundary_term": self.boundary_term,
            "index": self.index,
            "topology": self.topology.to_dict(),
            "warnings": list(self.warnings),
            "region": self.region,
        }


@dataclass(frozen=True)
class IntegrateOptions:
    asymptote_tol: float = 1e-6
    s_max: float = 1e3
    rtol: float = 3e-14
    atol: float = 1e-15
    target_rho_step: float = 8e-4
    max_s_step: float = 2e-2
    max_samples: int = 2_000_000


# ---------------------------------------------------------------------------
# Sign and index formulas
# ---------------------------------------------------------------------------


def sign_convention(profile: Profile, interval: tuple[float, float],
                    p: int, q: int) -> tuple[int, int]:
    """Orient (p, q) so q f' - 2 pi p g' > 0 on the open interval.

    The interval must be elementary: the combination may not vanish inside.
    """
    p, q = normalize_pq(p, q)
    lo, hi = float(interval[0]), float(interval[1])
    pad = 1e-9 * max(1.0, hi - lo)
    roots = combination_roots(profile, p, q, lo + pad, hi - pad)
    roots = [r for r in roots if lo + 2 * pad < r < hi - 2 * pad]
    if roots:
        raise IntervalError(
            f"interval ({lo}, {hi}) is not elementary: q f' - 2 pi p g' "
            f"vanishes at rho={roots[0]}"
        )
    mid = 0.5 * (lo + hi)
    val = q * profile.f(mid, 1) - TWO_PI * p * profile.g(mid, 1)
    if val == 0.0:
        raise IntervalError("combination vanishes at the midpoint")
    return (p, q) if val > 0 else (-p, -q)


def puncture_sign(profile: Profile, r: float, tol: float = 1e-9) -> int:
    """Sign of a puncture limiting on the torus at r: sgn(f' g'' - f'' g').

    Positive exactly when the counterclockwise trajectory accelerates inward
    at r.  Raises NotMorseBottError when the value is within ``tol`` of zero.
    """
    val = profile.f(r, 1) * profile.g(r, 2) - profile.f(r, 2) * profile.g(r, 1)
    if abs(val) < tol:
        raise NotMorseBottError(
            f"f' g'' - f'' g' = {val} at rho={r}: torus is not Morse-Bott"
        )
    return 1 if val > 0 else -1


def central_puncture_sign(profile: Profile, p: int, q: int,
                          rho_plus: float) -> int:
    """Sign of the central-orbit puncture of a q != 0 core cylinder.

    Computed as sgn(f'(rho+)/g'(rho+) - f''(0)/g''(0)) and cross-checked
    against the equivalent closed form -sgn(q) sgn(f(0)); a mismatch means the
    inputs violate the sign convention.  Requires the |q|-cover of the central
    orbit to be nondegenerate.
    """
    if q == 0:
        raise ValueError("central puncture sign needs q != 0")
    cover = central_cz(profile, abs(q))
    if cover.degenerate:
        raise ContactError(
            f"|q| = {abs(q)} cover of the central orbit is degenerate; "
            "see central_cz"
        )
    gp = profile.g(rho_plus, 1)
    if gp == 0.0:
        raise ValueError("g'(rho+) = 0: not a torus of a finite-slope class")
    val = profile.f(rho_plus, 1) / gp - profile.f(0.0, 2) / profile.g(0.0, 2)
    sigma = 1 if val > 0 else -1
    f0 = profile.f(0.0)
    cross = -int(math.copysign(1, q)) * int(math.copysign(1, f0))
    if sigma != cross:
        raise SignConventionError(
            f"slope form gives {sigma} but -sgn(q) sgn(f(0)) = {cross}: "
            "(p, q) are not oriented by the positivity convention"
        )
    return sigma


def cz_torus_puncture(profile: Profile, p: int, sigma_plus: int) -> int:
    """CZ index contribution of the torus puncture in the coordinate frame:
    sigma+ (1 - 2 sgn(f(0)) p)."""
    f0 = profile.f(0.0)
    if f0 == 0.0:
        raise ContactError("f(0) = 0: invalid contact profile")
    return sigma_plus * (1 - 2 * int(math.copysign(1, f0)) * p)


def cylinder_index(profile: Profile, p: int, q: int, sigma_minus: int) -> int:
    """Fredholm index of a core cylinder (q != 0) from the axis data.

    With w = (q f''(0) - 2 pi p g''(0)) / (2 pi |g''(0)|), which the sign
    convention makes positive: 2 + 2 floor(w) for sigma- = +1, else
    2 ceil(w).  Either way the index is at least two.
    """
    if q == 0:
        raise ValueError("core cylinders need q != 0")
    gpp = profile.g(0.0, 2)
    w = (q * profile.f(0.0, 2) - TWO_PI * p * gpp) / (TWO_PI * abs(gpp))
    if w <= 0.0:
        raise SignConventionError(
            f"q f''(0) - 2 pi p g''(0) must be positive (w = {w}); "
            "orient (p, q) by the positivity convention first"
        )
    if sigma_minus == 1:
        return 2 + 2 * math.floor(w)
    return 2 * math.ceil(w)


def fredholm_index(mu: int, topology: CurveTopology) -> int:
    """ind = mu - chi + (number of boundary components)."""
    return mu - topology.euler + topology.boundary


# ---------------------------------------------------------------------------
# Leaf integration
# ---------------------------------------------------------------------------


def _combination_value(profile, p, q, rho, order=0):
    return q * profile.f(rho, order + 1) - TWO_PI * p * profile.g(rho, order + 1)


def _a_rate(profile, p, q, rho):
    return q * profile.f(rho) - TWO_PI * p * profile.g(rho)


def _integrate_samples(s: np.ndarray, vals: np.ndarray) -> float:
    """Composite Simpson within each uniformly spaced run (trapezoid joints)."""
    from scipy.integrate import simpson

    total = 0.0
    for i0, i1 in _uniform_runs(s):
        if i1 - i0 >= 3:
            total += float(simpson(vals[i0:i1], x=s[i0:i1]))
        elif i1 - i0 == 2:
            total += float(np.trapezoid(vals[i0:i1], s[i0:i1]))
    return total


def _check_beta_positive(profile: Profile, lo: float, hi: float):
    for seg in profile.segments:
        a, b = max(seg.lo, lo), min(seg.hi, hi)
        if b - a <= 1e-14:
            continue
        ok, witness = _poly.certify_positive(seg.beta, a, b)
        if not ok or profile.beta(a) <= 0.0:
            raise ContactError(
                f"beta is not positive near rho={witness if witness is not None else a}"
            )


def integrate_cylinder(profile: Profile, p: int, q: int, rho_start: float,
                       a_start: float = 0.0, theta0: float = 0.0,
                       phi0: float = 0.0,
                       opts: IntegrateOptions | None = None) -> CylinderLeaf:
    """Integrate one leaf through ``rho_start`` with the signed class (p, q).

    The (p, q) signs must already satisfy the positivity convention at
    ``rho_start``.  Integration runs forward and backward in s until the
    radius is within ``opts.asymptote_tol`` of the bracketing torus radius
    (or the axis), or exits through rho_max, or |s| exceeds ``opts.s_max``
    (recorded as a slow-convergence warning).  Samples are stored on a
    uniform s-grid fine enough that consecutive rho steps stay below
    ``opts.target_rho_step`` and high-order finite differences of the samples
    reproduce the first-order system to the residual tolerance.
    """
    opts = opts or IntegrateOptions()
    profile.require_contact()
    lo_dom = max(profile.rho_min, 0.0)
    if not lo_dom < rho_start < profile.rho_max:
        raise ValueError("rho_start must lie strictly inside the profile")
    val0 = _combination_value(profile, p, q, rho_start)
    if val0 <= 0.0:
        raise SignConventionError(
            f"q f' - 2 pi p g' = {val0} at rho_start: apply sign_convention first"
        )

    floor = profile.axis_floor if profile.rho_min == 0.0 else profile.rho_min
    roots = combination_roots(profile, p, q, floor, profile.rho_max)
    roots = [r for r in roots if r > 2 * floor]
    above = [r for r in roots if r > rho_start + 1e-12]
    below = [r for r in roots if r < rho_start - 1e-12]
    rho_plus = min(above) if above else None     # None: exits through rho_max
    rho_minus = max(below) if below else None    # None: descends to the axis
    if rho_minus is None and profile.rho_min > 0.0:
        raise ValueError("leaf would leave the partial profile through rho_min")

    _check_beta_positive(profile, rho_minus or 0.0, rho_plus or profile.rho_max)

    def rhs(s, y):
        # clamp: integrator trial steps may poke past the chart boundary
        r = min(max(y[0], lo_dom), profile.rho_max)
        return (
            _combination_value(profile, p, q, r) / profile.beta(r),
            _a_rate(profile, p, q, r),
        )

    warnings: list[str] = []

    def run(direction: int):
        if direction > 0:
            if rho_plus is not None:
                target = rho_plus - opts.asymptote_tol
                kind = "asymptote"
            else:
                target = profile.rho_max
                kind = "boundary"
        else:
            if rho_minus is not None:
                target = rho_minus + opts.asymptote_tol
                kind = "asymptote"
            else:
                target = max(opts.asymptote_tol, 2 * floor)
                kind = "axis"

        def event(s, y):
            return y[0] - target
        event.terminal = True
        event.direction = float(direction)

        sol = solve_ivp(
            rhs, (0.0, direction * opts.s_max), [rho_start, 0.0],
            method="DOP853", rtol=opts.rtol, atol=opts.atol,
            events=event, dense_output=True,
        )
        if not sol.success:
            raise RuntimeError(f"leaf integration failed: {sol.message}")
        hit = bool(sol.t_events[0].size)
        s_end = float(sol.t_events[0][0]) if hit else float(sol.t[-1])
        return sol, s_end, hit, kind

    sol_f, s_pos, hit_f, kind_f = run(+1)
    sol_b, s_neg, hit_b, kind_b = run(-1)

    # sample grid per side: locally uniform steps, dyadically refined from
    # max_s_step wherever the rho motion would exceed target_rho_step, so
    # high-order finite differences apply within runs while exponential tails
    # stay cheap
    def rate_f(r):
        # |dF/d rho|: the step must resolve the local variation of the field,
        # including derivative wiggles much narrower than the rho resolution
        c = _combination_value(profile, p, q, r)
        c1 = _combination_value(profile, p, q, r, order=1)
        b = profile.beta(r)
        b1 = profile.beta(r, 1)
        return np.abs((c1 * b - c * b1) / b**2)

    def side_grid(sol, s_end):
        if s_end == 0.0:
            return np.array([0.0])
        rho_end = float(sol.sol(s_end)[0])
        pts = [0.0]
        s_cur = 0.0
        rho_cur = rho_start
        direction = 1.0 if s_end > 0 else -1.0
        span = abs(s_end)
        margin = 2.0 * opts.target_rho_step
        while abs(s_cur) < span - 1e-15:
            f_loc = abs(float(_combination_value(profile, p, q, rho_cur)
                              / profile.beta(rho_cur)))
            h_need = min(opts.max_s_step,
                         0.8 * opts.target_rho_step / max(f_loc, 1e-12))
            for _ in range(60):
                lo = max(lo_dom, rho_cur - (margin if direction < 0 else 0.0)
                         - f_loc * h_need * (direction < 0))
                hi = min(profile.rho_max,
                         rho_cur + (margin if direction > 0 else 0.0)
                         + f_loc * h_need * (direction > 0))
                window = np.linspace(min(lo, hi), max(lo, hi), 9)
                lam = float(np.max(rate_f(window)))
                h_new = min(h_need, 0.02 / max(lam, 1e-12))
                if h_new >= 0.999 * h_need:
                    break
                h_need = h_new
            k = max(0, math.ceil(math.log2(opts.max_s_step / h_need)))
            h = opts.max_s_step / (2.0 ** k)
            h = min(h, span - abs(s_cur))
            s_cur += direction * h
            pts.append(s_cur)
            # advance the rho estimate (midpoint rule; placement only)
            k1 = float(_combination_value(profile, p, q, rho_cur)
                       / profile.beta(rho_cur))
            r_mid = rho_cur + 0.5 * direction * h * k1
            r_mid = min(max(r_mid, lo_dom), profile.rho_max)
            k2 = float(_combination_value(profile, p, q, r_mid)
                       / profile.beta(r_mid))
            rho_cur += direction * h * k2
            rho_cur = min(max(rho_cur, min(rho_start, rho_end)),
                          max(rho_start, rho_end))
            if len(pts) > opts.max_samples:
                raise RuntimeError(
                    "leaf needs too many samples at the required resolution"
                )
        return np.asarray(pts)

    grid_f = side_grid(sol_f, s_pos)
    grid_b = side_grid(sol_b, s_neg)

    # second pass: re-integrate onto the grids with the step capped by the
    # decay rate, so the interpolation behind t_eval stays at solution grade
    # (long adaptive steps leave visible derivative error otherwise)
    def resample(grid, s_end):
        if grid.size <= 1 or s_end == 0.0:
            return np.array([[rho_start], [0.0]])[:, : grid.size]
        # at these tolerances the error-controlled steps are short relative
        # to the local dynamics, so the interpolation behind t_eval delivers
        # solution-grade samples without a step cap
        sol = solve_ivp(
            rhs, (0.0, s_end), [rho_start, 0.0], method="DOP853",
            rtol=opts.rtol, atol=opts.atol,
            t_eval=grid, dense_output=False,
        )
        if not sol.success:
            raise RuntimeError(f"leaf resampling failed: {sol.message}")
        return sol.y

    y_f = resample(grid_f, s_pos)
    y_b = resample(grid_b, s_neg)
    s = np.concatenate([grid_b[:0:-1], grid_f])
    y = np.concatenate([y_b[:, :0:-1], y_f], axis=1)
    rho, a = y[0], y[1] + a_start  # the a equation is translation invariant
    if not np.all(np.diff(rho) > 0.0):
        raise RuntimeError("rho(s) failed strict monotonicity; integration bug")

    def classify(direction, s_end, hit, kind) -> EndState:
        rho_end = float(rho[-1] if direction > 0 else rho[0])
        if not hit:
            tgt = rho_plus if direction > 0 else (rho_minus or 0.0)
            gap = abs(rho_end - tgt) if tgt is not None else 0.0
            warnings.append(
                f"slow convergence at s = {s_end}: gap {gap} to the asymptote"
            )
            return EndState("unresolved", rho_end, s_end, gap=gap)
        if kind == "boundary":
            return EndState("boundary", rho_end, s_end,
                            note="leaf exits the chart through rho_max")
        if kind == "axis":
            if q == 0:
                return EndState("removable", rho_end, s_end,
                                gap=rho_end,
                                note="bounded a(s); removable axis fill")
            sigma, note = _central_sign_or_note(profile, p, q, rho_plus)
            punc = None
            if sigma is not None:
                punc = Puncture(end=direction, sign=sigma,
                                target_kind="central", target_r=0.0,
                                cover=abs(q))
            return EndState("puncture", rho_end, s_end, puncture=punc,
                            gap=rho_end, note=note)
        r_t = rho_plus if direction > 0 else rho_minus
        try:
            sigma = puncture_sign(profile, r_t)
            note = ""
        except NotMorseBottError as exc:
            return EndState("puncture", rho_end, s_end, puncture=None,
                            gap=abs(rho_end - r_t),
                            note=f"non-certifiable: {exc}")
        punc = Puncture(end=direction, sign=sigma, target_kind="torus",
                        target_r=r_t, cover=1)
        return EndState("puncture", rho_end, s_end, puncture=punc,
                        gap=abs(rho_end - r_t))

    pos_end = classify(+1, s_pos, hit_f, kind_f)
    neg_end = classify(-1, s_neg, hit_b, kind_b)

    # Stokes-exact energy of the sampled cylinder: the integrand of u* d
    # lambda under the ansatz is (q f' - 2 pi p g')^2 / beta >= 0, and its
    # s-integral telescopes to the boundary term of q f - 2 pi p g
    dens = _combination_value(profile, p, q, rho) ** 2 / profile.beta(rho)
    energy = _integrate_samples(s, dens)
    boundary_term = float(_a_rate(profile, p, q, rho[-1])
                          - _a_rate(profile, p, q, rho[0]))

    index, topo = _leaf_index(profile, p, q, neg_end, pos_end)
    leaf = CylinderLeaf(
        p=p, q=q, theta0=float(theta0), phi0=float(phi0),
        s=s, a=a, rho=rho, neg_end=neg_end, pos_end=pos_end,
        energy_dlambda=energy, boundary_term=boundary_term,
        index=index, topology=topo, warnings=warnings,
    )
    return leaf


def _central_sign_or_note(profile, p, q, rho_plus):
    try:
        if rho_plus is not None:
            return central_puncture_sign(profile, p, q, rho_plus), ""
        f0 = profile.f(0.0)
        return -int(math.copysign(1, q)) * int(math.copysign(1, f0)), \
            "sign from -sgn(q) sgn(f(0)); no bounding torus in chart"
    except (ContactError, SignConventionError, ValueError) as exc:
        return None, f"non-certifiable: {exc}"


def _leaf_index(profile, p, q, neg_end: EndState, pos_end: EndState):
    """Index bookkeeping per leaf kind.

    Cylinders between Morse-Bott tori carry index two (each puncture
    contributes one in the torus frame); a chart-boundary end is treated the
    same way, since the leaf continues across the boundary torus, which is
    transverse to the foliation.  Core cylinders use the axis floor/ceiling
    formula and planes use the torus CZ contribution minus chi(C).
    """
    ends = (neg_end, pos_end)
    if any(e.kind == "unresolved" for e in ends):
        return None, CurveTopology.cylinder()
    if neg_end.kind == "removable":
        topo = CurveTopology.plane()
        if pos_end.kind == "puncture" and pos_end.puncture is not None:
            mu = cz_torus_puncture(profile, p, pos_end.puncture.sign)
            return fredholm_index(mu, topo), topo
        return None, topo
    topo = CurveTopology.cylinder()
    if neg_end.kind == "puncture" and neg_end.puncture is not None \
            and neg_end.puncture.target_kind == "central":
        try:
            return cylinder_index(profile, p, q, neg_end.puncture.sign), topo
        except (SignConventionError, ValueError):
            return None, topo
    certified = []
    for e in ends:
        if e.kind == "puncture":
            certified.append(e.puncture is not None)
        elif e.kind == "boundary":
            certified.append(True)
        else:
            certified.append(False)
    if all(certified) and any(e.kind == "puncture" for e in ends):
        return 2, topo
    return None, topo


# ---------------------------------------------------------------------------
# Residual check
# ---------------------------------------------------------------------------

def _uniform_runs(s: np.ndarray, cuts: set[int] | None = None) -> list[tuple[int, int]]:
    """Maximal index ranges with constant spacing, cut at s = 0 and ``cuts``.

    The two integration directions meet at s = 0, and the solution is only
    C^3 where rho(s) crosses a profile segment breakpoint; a high-order
    finite-difference stencil must not straddle either, so runs stop there
    (and at any spacing change).
    """
    d = np.diff(s)
    cuts = cuts or set()
    runs = []
    start = 0
    for i in range(1, len(d)):
        cut = not math.isclose(d[i], d[i - 1], rel_tol=1e-9, abs_tol=0.0)
        if s[i] == 0.0 or i in cuts:
            cut = True
        if cut:
            runs.append((start, i + 1))
            start = i
    runs.append((start, len(s)))
    return runs


def _breakpoint_cuts(rho: np.ndarray, profile: Profile) -> set[int]:
    cuts: set[int] = set()
    for seg in profile.segments:
        for b in (seg.lo, seg.hi):
            if rho[0] < b < rho[-1]:
                cuts.add(int(np.searchsorted(rho, b)))
    return cuts


def _fd6_residual(s, a, rho, p, q, profile, stride: int) -> float | None:
    """Max sixth-order FD residual on the strided subsample, or None."""
    ss, aa, rr = s[::stride], a[::stride], rho[::stride]
    if len(ss) < 13:
        return None
    h = float(ss[1] - ss[0])
    da = (
        -aa[:-6] + 9 * aa[1:-5] - 45 * aa[2:-4]
        + 45 * aa[4:-2] - 9 * aa[5:-1] + aa[6:]
    ) / (60.0 * h)
    dr = (
        -rr[:-6] + 9 * rr[1:-5] - 45 * rr[2:-4]
        + 45 * rr[4:-2] - 9 * rr[5:-1] + rr[6:]
    ) / (60.0 * h)
    r = rr[3:-3]
    res_a = da - (q * profile.f(r) - TWO_PI * p * profile.g(r))
    res_rho = dr - (
        (q * profile.f(r, 1) - TWO_PI * p * profile.g(r, 1)) / profile.beta(r)
    )
    return float(max(np.max(np.abs(res_a)), np.max(np.abs(res_rho))))


def cr_residual(leaf: CylinderLeaf, profile: Profile) -> float:
    """Max residual of the first-order system over the leaf samples.

    Derivatives of (a, rho) in s come from sixth-order central differences of
    the stored samples within each uniformly spaced run; per run the stride
    of the stencil is chosen (among a few powers of four) to balance sample
    noise against truncation, which is just the usual step-size trade-off of
    differentiating discrete data.  Genuinely inconsistent samples fail at
    every stride.  The two remaining equations of the system are identities
    under the ansatz (theta_s = phi_s = 0) and contribute zero.  Falls back
    to second-order differences for nonuniform hand-made sample lists.
    """
    s, a, rho = leaf.s, leaf.a, leaf.rho
    if len(s) < 9:
        raise ValueError("leaf too short for a residual check")
    worst = 0.0
    covered = 0
    cuts = _breakpoint_cuts(rho, profile)
    for i0, i1 in _uniform_runs(s, cuts):
        m = i1 - i0
        # short transition slivers between step-size changes cannot trade
        # noise against truncation via the stride; skip them (they cover a
        # negligible fraction of the leaf)
        if m < 40:
            continue
        best = None
        for stride in (1, 2, 3, 4, 6, 8, 12, 16, 32, 64):
            val = _fd6_residual(s[i0:i1], a[i0:i1], rho[i0:i1],
                                leaf.p, leaf.q, profile, stride)
            if val is not None:
                best = val if best is None else min(best, val)
        if best is not None:
            worst = max(worst, best)
            covered += m - 6
    if covered == 0:
        # nonuniform hand-made samples: second-order fallback
        da = np.gradient(a, s)
        dr = np.gradient(rho, s)
        r = rho[1:-1]
        res_a = da[1:-1] - (leaf.q * profile.f(r) - TWO_PI * leaf.p * profile.g(r))
        res_rho = dr[1:-1] - (
            (leaf.q * profile.f(r, 1) - TWO_PI * leaf.p * profile.g(r, 1))
            / profile.beta(r)
        )
        worst = max(float(np.max(np.abs(res_a))), float(np.max(np.abs(res_rho))))
    return worst


def dlambda_energy(leaf: CylinderLeaf, profile: Profile) -> tuple[float, float]:
    """(numeric, boundary) d(lambda)-energy of the sampled leaf.

    numeric integrates the pullback two-form (trapezoidal in s, exact in t);
    boundary evaluates q f - 2 pi p g at the two sampled end radii, which the
    integral telescopes to by Stokes.  Refuses leaves with an unresolved end.
    """
    for e in (leaf.neg_end, leaf.pos_end):
        if e.kind == "unresolved":
            raise SlowConvergenceError(
                f"end at s = {e.s} unresolved (gap {e.gap}); "
                "cannot certify the energy"
            )
    dens = (leaf.q * profile.f(leaf.rho, 1)
            - TWO_PI * leaf.p * profile.g(leaf.rho, 1)) ** 2 / profile.beta(leaf.rho)
    numeric = _integrate_samples(leaf.s, dens)
    boundary = float(
        (leaf.q * profile.f(leaf.rho[-1]) - TWO_PI * leaf.p * profile.g(leaf.rho[-1]))
        - (leaf.q * profile.f(leaf.rho[0]) - TWO_PI * leaf.p * profile.g(leaf.rho[0]))
    )
    return numeric, boundary
