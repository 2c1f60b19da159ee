"""Periodic Reeb orbits of a rotationally symmetric contact profile.

Closed orbits organize into tori at radii where the trajectory slope
``f'(r) / 2 pi g'(r)`` is a fixed rational ``p/q``, i.e. at roots of
``q f' - 2 pi p g'``, plus the central orbit at the axis with its covers.
Each detected object carries the data needed downstream: minimal period,
Morse-Bott flag, and for the central covers the Conley-Zehnder index in the
coordinate trivialization, with an independent flow-integration oracle for
every formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _poly
from .profile import ContactError, Profile

TWO_PI = 2.0 * math.pi


class ContinuumError(ValueError):
    """q f' - 2 pi p g' vanishes identically on a subinterval."""


class DegenerateSlopeError(ValueError):
    """Both period expressions are undefined (f' = g' = 0)."""


class NonClosingError(RuntimeError):
    """The Reeb flow does not close up at the requested class."""


@dataclass(frozen=True)
class OrbitTorus:
    """Torus of closed orbits at radius r with slope class (p, q).

    Signs of (p, q) are oriented so the minimal period T is positive.
    ``homology_note`` optionally records the class a*lambda' + b*mu' on the
    glued-in torus after surgery.
    """

    r: float
    p: int
    q: int
    period: float
    morse_bott: bool
    homology_note: tuple[int, int] | None = None

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "p": self.p,
            "q": self.q,
            "period": self.period,
            "morse_bott": self.morse_bott,
            "homology_note": list(self.homology_note)
            if self.homology_note is not None
            else None,
        }


@dataclass(frozen=True)
class CentralOrbit:
    """The axis orbit (cover k) with period |f(0)| and its CZ status."""

    period: float
    k: int
    degenerate: bool
    mu_cz: int | None
    borderline: bool = False
    frame_winding: int = 0

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "k": self.k,
            "degenerate": self.degenerate,
            "mu_cz": self.mu_cz,
            "borderline": self.borderline,
            "frame_winding": self.frame_winding,
        }


def normalize_pq(p: int, q: int) -> tuple[int, int]:
    p, q = int(p), int(q)
    if p == 0 and q == 0:
        raise ValueError("(p, q) = (0, 0) is not a slope class")
    d = math.gcd(abs(p), abs(q))
    return p // d, q // d


def combination_coeffs(profile: Profile, seg, p: int, q: int) -> np.ndarray:
    """Coefficients of q f' - 2 pi p g' on one segment."""
    return _poly.poly_sum(
        _poly.poly_scale(_poly.derivative(seg.f), q),
        _poly.poly_scale(_poly.derivative(seg.g), -TWO_PI * p),
    )


def combination_roots(profile: Profile, p: int, q: int,
                      lo: float, hi: float,
                      refine_tol: float = 1e-12) -> list[float]:
    """Roots of q f' - 2 pi p g' in [lo, hi], isolated per segment.

    Raises ContinuumError if the combination vanishes identically on any
    overlapping segment (a continuum of orbit tori).
    """
    roots: list[float] = []
    for seg in profile.segments:
        a, b = max(seg.lo, lo), min(seg.hi, hi)
        if b - a <= 1e-14:
            continue
        h = combination_coeffs(profile, seg, p, q)
        scale = max(
            abs(q) * float(np.max(np.abs(seg.f))),
            TWO_PI * abs(p) * float(np.max(np.abs(seg.g))),
            1.0,
        )
        if _poly.is_zero_poly(h, scale=scale):
            raise ContinuumError(
                f"continuum of tori: q f' - 2 pi p g' vanishes identically on "
                f"[{seg.lo}, {seg.hi}] for (p, q) = ({p}, {q})"
            )
        roots.extend(_poly.real_roots(h, a, b, refine_tol=refine_tol))
    roots.sort()
    out: list[float] = []
    for r in roots:
        if not out or abs(r - out[-1]) > 1e-10:
            out.append(r)
    return out


def scan_tori(profile: Profile, p: int, q: int,
              interval: tuple[float, float] | None = None,
              refine_tol: float = 1e-12) -> list[OrbitTorus]:
    """All orbit tori with slope class (p, q) in the interval.

    Roots of q f' - 2 pi p g' are isolated per polynomial segment and refined
    to ``refine_tol``.  Each torus stores (p, q) oriented so its period is
    positive, the period itself, and the Morse-Bott flag.
    """
    profile.require_contact()
    p, q = normalize_pq(p, q)
    if interval is None:
        lo, hi = max(profile.rho_min, 1e-7 * profile.rho_max), profile.rho_max
    else:
        lo, hi = float(interval[0]), float(interval[1])
        if not (0.0 < lo < hi <= profile.rho_max + 1e-12):
            raise ValueError("interval must satisfy 0 < lo < hi <= rho_max")
    # the combination always vanishes on the axis itself; roots pinned to the
    # lower search edge are the central orbit, not a torus
    edge_pad = max(2.0 * refine_tol, 1e-7 * profile.rho_max)
    tori = []
    for r in combination_roots(profile, p, q, lo, hi, refine_tol=refine_tol):
        if r <= lo + edge_pad:
            continue
        pp, qq = p, q
        T = _signed_period(profile, r, pp, qq)
        if T is None:
            raise DegenerateSlopeError(
                f"f' and g' both vanish at rho={r}; slope class undefined"
            )
        if T < 0:
            pp, qq, T = -pp, -qq, -T
        tori.append(
            OrbitTorus(r=r, p=pp, q=qq, period=T,
                       morse_bott=is_morse_bott(profile, r))
        )
    return tori


def _signed_period(profile: Profile, r: float, p: int, q: int,
                   consistency_tol: float = 1e-10) -> float | None:
    fp = profile.f(r, 1)
    gp = profile.g(r, 1)
    D = profile.wronskian(r)
    scale = max(abs(fp), abs(gp), 1.0)
    t_g = q * D / gp if abs(gp) > 1e-12 * scale else None
    t_f = TWO_PI * p * D / fp if abs(fp) > 1e-12 * scale else None
    if t_g is not None and t_f is not None:
        if abs(t_g - t_f) > consistency_tol * max(1.0, abs(t_g)):
            raise ValueError(
                f"period expressions disagree at rho={r}: {t_g} vs {t_f} "
                "(is r actually a torus radius for this class?)"
            )
    if t_g is not None:
        return t_g
    return t_f


def torus_period(profile: Profile, r: float, p: int, q: int) -> float:
    """Minimal period T = q D/g' = 2 pi p D/f' (whichever is defined).

    Returns the positive period; the sign of the defining expression only
    encodes the orientation of (p, q).
    """
    T = _signed_period(profile, r, p, q)
    if T is None:
        raise DegenerateSlopeError(
            f"f'(r) = g'(r) = 0 at rho={r}: no well-defined slope"
        )
    return abs(T)


def is_morse_bott(profile: Profile, r: float, tol: float = 1e-9) -> bool:
    """True when the slope f'/g' (or its reciprocal) has nonzero derivative,
    i.e. |f'' g' - f' g''| > tol at r."""
    val = profile.f(r, 2) * profile.g(r, 1) - profile.f(r, 1) * profile.g(r, 2)
    return abs(val) > tol


def central_cz(profile: Profile, k: int, frame_winding: int = 0,
               int_tol: float = 1e-9, borderline_tol: float = 1e-6) -> CentralOrbit:
    """Conley-Zehnder data of the k-fold cover of the central orbit.

    In the coordinate trivialization the cover is degenerate exactly when
    k f''(0) / (2 pi g''(0)) is an integer, and otherwise has index
    2 floor(-k f''(0) / (2 pi g''(0))) + 1.  ``frame_winding`` shifts to a
    different trivialization of the contact structure along the orbit (adds
    2 k w to the index); the transformation behaviour of the coordinate frame
    under global trivializations is exposed rather than assumed.
    """
    if k < 1:
        raise ValueError("cover multiplicity k must be >= 1")
    profile.require_contact()
    f0 = profile.f(0.0)
    if f0 == 0.0:
        raise ContactError("f(0) = 0: not a contact profile at the axis")
    ratio = k * profile.f(0.0, 2) / (TWO_PI * profile.g(0.0, 2))
    dist = abs(ratio - round(ratio))
    period = abs(f0)
    if dist < int_tol:
        return CentralOrbit(period=period, k=k, degenerate=True, mu_cz=None,
                            frame_winding=frame_winding)
    mu = 2 * math.floor(-ratio) + 1 + 2 * k * frame_winding
    return CentralOrbit(
        period=period, k=k, degenerate=False, mu_cz=mu,
        borderline=dist < borderline_tol, frame_winding=frame_winding,
    )


def winding_oracle(profile: Profile, k: int, tol: float = 1e-6,
                   n_steps: int = 4096) -> int | None:
    """CZ index of the central cover from the linearized transverse flow.

    Rebuilds the rotation rate of the transverse plane from the Reeb field
    itself (Richardson-extrapolated off-axis samples), integrates the 2x2
    variational equation over the cover with a fixed-step RK4, unwinds the
    angle, and orients by the sign of the transverse symplectic form.
    Returns 2 floor(w) + 1 for total winding w, or None when w is within
    ``tol`` of an integer (degenerate within tolerance).
    """
    if k < 1:
        raise ValueError("cover multiplicity k must be >= 1")
    profile.require_contact()
    f0 = profile.f(0.0)
    if f0 == 0.0:
        raise ContactError("f(0) = 0: not a contact profile at the axis")

    def omega(r):
        return -profile.f(r, 1) / profile.wronskian(r)

    h = 1e-3 * max(profile.rho_max, 1e-2)
    om = (4.0 * omega(h / 2) - omega(h)) / 3.0  # O(h^4) limit at the axis

    T = k * abs(f0)
    A = np.array([[0.0, -om], [om, 0.0]])
    v = np.array([1.0, 0.0])
    dt = T / n_steps
    theta_prev = math.atan2(v[1], v[0])
    total = 0.0
    for _ in range(n_steps):
        k1 = A @ v
        k2 = A @ (v + 0.5 * dt * k1)
        k3 = A @ (v + 0.5 * dt * k2)
        k4 = A @ (v + dt * k3)
        v = v + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        theta = math.atan2(v[1], v[0])
        d = theta - theta_prev
        while d > math.pi:
            d -= TWO_PI
        while d < -math.pi:
            d += TWO_PI
        total += d
        theta_prev = theta
    orientation = 1.0 if profile.g(0.0, 2) > 0 else -1.0
    w = orientation * total / TWO_PI
    if abs(w - round(w)) < tol:
        return None
    return 2 * math.floor(w) + 1


def reeb_return_time(profile: Profile, r: float, p: int, q: int,
                     tol: float = 1e-8, max_factor: float = 1e3) -> float:
    """Flow-integration oracle for the period formula.

    Integrates (theta_dot, phi_dot) = (g'/D, -f'/D) at fixed radius from
    (0, 0) until (Delta theta, Delta phi) = (q, -2 pi p) within ``tol`` in
    each coordinate, and returns the elapsed time.  If no closure happens
    within ``max_factor`` times the expected period the radius is not a torus
    radius for this class and NonClosingError is raised.
    """
    profile.require_contact()
    theta_rate, phi_rate = profile.reeb_field(r)
    target = np.array([float(q), -TWO_PI * p])
    rates = np.array([theta_rate, phi_rate])

    # time scale: expected period if the formula applies, else a rate-based guess
    try:
        t_scale = torus_period(profile, r, p, q)
    except (DegenerateSlopeError, ValueError):
        t_scale = None
    if t_scale is None or not np.isfinite(t_scale) or t_scale <= 0:
        cands = [abs(target[i] / rates[i]) for i in range(2) if rates[i] != 0.0]
        t_scale = max(cands) if cands else 1.0
    t_max = max_factor * t_scale

    # primary coordinate: the one with a nonzero target; fall back on rates
    if q != 0:
        primary = 0
    elif p != 0:
        primary = 1
    else:
        raise ValueError("(p, q) = (0, 0)")
    if rates[primary] == 0.0:
        raise NonClosingError(
            f"flow has zero rate in the target coordinate at rho={r}"
        )

    state = np.zeros(2)
    dt = t_scale / 2048.0
    t = 0.0
    while t < t_max:
        prev = state.copy()
        # RK4 step (rates are autonomous in the angles)
        state = state + dt * rates
        t += dt
        a, b = prev[primary], state[primary]
        tgt = target[primary]
        if (a - tgt) * (b - tgt) <= 0.0 and a != b:
            frac = (tgt - a) / (b - a)
            t_star = t - dt + frac * dt
            at_star = prev + (state - prev) * frac
            if np.all(np.abs(at_star - target) <= tol):
                return float(t_star)
            # the other coordinate missed: this radius does not close here
    raise NonClosingError(
        f"no closure of class (p, q) = ({p}, {q}) within {max_factor} periods "
        f"at rho={r}"
    )
