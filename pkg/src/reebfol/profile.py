"""Rotationally symmetric contact data on a solid torus.

A 1-form ``lambda = f(rho) dtheta + g(rho) dphi`` on ``S^1 x B^2(rho_max)``
together with the complex multiplication ``J v1 = beta(rho) v2`` is described
by three radial functions stored as piecewise polynomials of degree <= 9.
Angle conventions: ``theta`` lives in R/Z, ``phi`` in R/(2 pi Z).

The form is a positive contact form exactly when the Wronskian
``D = f g' - f' g`` is positive for all ``rho > 0`` and ``f(0) g''(0) > 0``;
``validate_contact`` certifies both, using per-segment root isolation rather
than sampling alone.  The Reeb vector field is ``(g'/D) d_theta - (f'/D)
d_phi``.

Profiles are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _poly

MAX_DEGREE = 9
_BREAK_TOL = 1e-12
_MATCH_TOL = 1e-9
_EVEN_TOL = 1e-12

ANGLES_HEADER = {"theta": "R/Z", "phi": "R/2piZ"}


class ProfileError(ValueError):
    """Structural problem with a profile (type invariant violated)."""


class ContactError(ValueError):
    """Operation requires a valid contact profile."""


@dataclass(frozen=True)
class Segment:
    """One polynomial piece of (f, g, beta) on [lo, hi]."""

    lo: float
    hi: float
    f: np.ndarray
    g: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        for name in ("f", "g", "beta"):
            c = _poly.as_coeffs(getattr(self, name))
            if len(c) > MAX_DEGREE + 1:
                raise ProfileError(
                    f"segment [{self.lo}, {self.hi}]: {name} has degree "
                    f"{len(c) - 1} > {MAX_DEGREE}"
                )
            object.__setattr__(self, name, c)
        if not self.hi > self.lo:
            raise ProfileError(f"segment interval [{self.lo}, {self.hi}] is empty")


@dataclass(frozen=True)
class Violation:
    where: float | str  # radius, or "axis"
    condition: str
    value: float


@dataclass(frozen=True)
class ContactReport:
    valid: bool
    violations: tuple[Violation, ...]
    d_prime_at_zero: float | None

    def __post_init__(self):
        if self.valid != (len(self.violations) == 0):
            raise ValueError("valid flag inconsistent with violations list")

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "d_prime_at_zero": self.d_prime_at_zero,
            "violations": [
                {"where": v.where, "condition": v.condition, "value": v.value}
                for v in self.violations
            ],
        }


class Profile:
    """Immutable piecewise-polynomial triple (f, g, beta) on [rho_min, rho_max].

    ``rho_min`` is zero for a full solid-torus profile; transformation
    pipelines use ``rho_min > 0`` for data that still lacks a core extension.
    Axis smoothness (for ``rho_min == 0``) requires f and beta even in rho,
    g even with vanishing constant term, and beta(0) > 0, so that f, g/rho^2
    and J extend over the axis.
    """

    def __init__(self, segments, rho_min: float = 0.0, check: bool = True):
        segs = sorted(segments, key=lambda s: s.lo)
        if not segs:
            raise ProfileError("profile needs at least one segment")
        self._segments = tuple(segs)
        self.rho_min = float(rho_min)
        self.rho_max = float(segs[-1].hi)
        self._breaks = np.array([s.lo for s in segs] + [self.rho_max])
        self._derivs = tuple(
            {
                name: [_poly.derivative(getattr(s, name), k) for k in range(4)]
                for name in ("f", "g", "beta")
            }
            for s in segs
        )
        self._contact_report: ContactReport | None = None
        if check:
            self._check_structure()

    # -- structure ---------------------------------------------------------

    @property
    def segments(self) -> tuple[Segment, ...]:
        return self._segments

    def _check_structure(self):
        segs = self._segments
        if abs(segs[0].lo - self.rho_min) > _BREAK_TOL:
            raise ProfileError(
                f"segments start at {segs[0].lo}, expected rho_min={self.rho_min}"
            )
        for left, right in zip(segs, segs[1:]):
            if abs(left.hi - right.lo) > _BREAK_TOL:
                raise ProfileError(
                    f"gap or overlap between segments at {left.hi} vs {right.lo}"
                )
            x = left.hi
            for name in ("f", "g", "beta"):
                for k in range(4):
                    lv = float(_poly.eval_poly(getattr(left, name), x, order=k))
                    rv = float(_poly.eval_poly(getattr(right, name), x, order=k))
                    # tolerance scales with the local magnitude of the
                    # derivative: high-order derivatives of tightly wound
                    # segments are large, and their global monomial
                    # representation carries roundoff of that scale
                    lm = float(_poly.eval_poly(getattr(left, name),
                                               0.5 * (left.lo + left.hi), order=k))
                    rm = float(_poly.eval_poly(getattr(right, name),
                                               0.5 * (right.lo + right.hi), order=k))
                    tol = _MATCH_TOL * max(1.0, abs(lv), abs(rv), abs(lm), abs(rm))
                    if abs(lv - rv) > tol:
                        raise ProfileError(
                            f"{name} not C^3 at rho={x}: order-{k} values "
                            f"{lv} vs {rv}"
                        )
        if self.rho_min == 0.0:
            self._check_axis(segs[0])

    def _check_axis(self, seg: Segment):
        def odd_part_small(c, label):
            c = _poly.as_coeffs(c)
            scale = max(1.0, float(np.max(np.abs(c))))
            bad = [i for i in range(1, len(c), 2) if abs(c[i]) > _EVEN_TOL * scale]
            if bad:
                raise ProfileError(
                    f"axis segment: {label} must be even in rho "
                    f"(odd coefficients {bad} nonzero)"
                )

        odd_part_small(seg.f, "f")
        odd_part_small(seg.g, "g")
        odd_part_small(seg.beta, "beta")
        g = _poly.as_coeffs(seg.g)
        scale = max(1.0, float(np.max(np.abs(g))))
        if abs(g[0]) > _EVEN_TOL * scale:
            raise ProfileError("axis segment: g(0) must vanish (g ~ rho^2)")
        if float(seg.beta[0]) <= 0.0:
            raise ProfileError("axis segment: beta(0) must be positive")

    # -- evaluation --------------------------------------------------------

    def _segment_index(self, rho):
        idx = np.searchsorted(self._breaks, rho, side="right") - 1
        return np.clip(idx, 0, len(self._segments) - 1)

    def eval(self, rho, which: str = "f", order: int = 0):
        """Derivative of order 0..3 of f, g or beta at ``rho`` (scalar or array)."""
        if which not in ("f", "g", "beta"):
            raise ValueError("which must be one of 'f', 'g', 'beta'")
        if not 0 <= order <= 3:
            raise ValueError("derivatives available up to order 3")
        rho_arr = np.asarray(rho, dtype=float)
        lo_ok = rho_arr >= self.rho_min - 1e-12
        hi_ok = rho_arr <= self.rho_max + 1e-12
        if not (np.all(lo_ok) and np.all(hi_ok)):
            raise ValueError(
                f"rho out of range [{self.rho_min}, {self.rho_max}]"
            )
        idx = self._segment_index(rho_arr)
        if rho_arr.ndim == 0:
            c = self._derivs[int(idx)][which][order]
            return float(np.polynomial.polynomial.polyval(float(rho_arr), c))
        out = np.empty_like(rho_arr)
        for i in np.unique(idx):
            m = idx == i
            c = self._derivs[int(i)][which][order]
            out[m] = np.polynomial.polynomial.polyval(rho_arr[m], c)
        return out

    def f(self, rho, order: int = 0):
        return self.eval(rho, "f", order)

    def g(self, rho, order: int = 0):
        return self.eval(rho, "g", order)

    def beta(self, rho, order: int = 0):
        return self.eval(rho, "beta", order)

    def wronskian(self, rho):
        """D(rho) = f g' - f' g."""
        return self.f(rho) * self.g(rho, 1) - self.f(rho, 1) * self.g(rho)

    def wronskian_coeffs(self, seg: Segment) -> np.ndarray:
        return _poly.poly_sum(
            _poly.poly_product(seg.f, _poly.derivative(seg.g)),
            -_poly.poly_product(_poly.derivative(seg.f), seg.g),
        )

    @property
    def d_prime_at_zero(self) -> float:
        """D'(0) = f(0) g''(0), the axis contact quantity."""
        if self.rho_min != 0.0:
            raise ProfileError("profile does not contain the axis")
        return self.f(0.0) * self.g(0.0, 2)

    # -- contact validation -------------------------------------------------

    def validate_contact(self) -> ContactReport:
        """Certify D > 0 on (0, rho_max] and f(0) g''(0) > 0.

        Positivity of D is checked on a sample grid and then certified between
        samples by isolating the real roots of the exact per-segment Wronskian
        polynomial.  Near the axis, where D vanishes linearly, positivity
        follows from D'(0) > 0 on an explicitly bounded sliver.
        """
        if self._contact_report is not None:
            return self._contact_report
        violations: list[Violation] = []
        d0 = None
        axis_floor = self.rho_min
        if self.rho_min == 0.0:
            d0 = self.d_prime_at_zero
            if not d0 > 0.0:
                violations.append(Violation("axis", "f(0)*g''(0) > 0", d0))

        for i, seg in enumerate(self._segments):
            dcoef = self.wronskian_coeffs(seg)
            scale = max(
                float(np.max(np.abs(seg.f))), float(np.max(np.abs(seg.g))), 1.0
            )
            if _poly.is_zero_poly(dcoef, scale=scale**2):
                violations.append(
                    Violation(seg.lo, "D not identically zero", 0.0)
                )
                continue
            lo = seg.lo
            if i == 0 and self.rho_min == 0.0:
                if d0 is not None and d0 > 0.0:
                    tail = float(np.sum(np.abs(dcoef[2:]))) if len(dcoef) > 2 else 0.0
                    lo = min(1e-8, 0.1 * d0 / tail) if tail > 0 else 1e-8
                    axis_floor = lo
                else:
                    lo = 1e-8
                    axis_floor = lo
            xs = np.linspace(max(lo, seg.lo), seg.hi, 257)
            vals = np.polynomial.polynomial.polyval(xs, dcoef)
            j = int(np.argmin(vals))
            if vals[j] <= 0.0:
                violations.append(Violation(float(xs[j]), "D > 0", float(vals[j])))
            roots = _poly.real_roots(dcoef, max(lo, seg.lo), seg.hi)
            for r in roots:
                if r > lo + 1e-12:
                    violations.append(
                        Violation(float(r), "D > 0 (root isolated)", 0.0)
                    )
        report = ContactReport(
            valid=not violations,
            violations=tuple(violations),
            d_prime_at_zero=d0,
        )
        self._contact_report = report
        self._axis_floor = axis_floor
        return report

    @property
    def axis_floor(self) -> float:
        """Radius below which D > 0 is certified analytically from D'(0)."""
        self.validate_contact()
        return self._axis_floor

    def require_contact(self):
        report = self.validate_contact()
        if not report.valid:
            raise ContactError(
                "profile is not a positive contact form: "
                + "; ".join(f"{v.condition} at {v.where}" for v in report.violations)
            )

    # -- Reeb field ----------------------------------------------------------

    def reeb_field(self, rho):
        """Components (X_theta, X_phi) = (g'/D, -f'/D) of the Reeb field.

        At the axis the limit is (1/f(0), -f''(0)/(f(0) g''(0))).
        """
        self.require_contact()
        rho_arr = np.asarray(rho, dtype=float)
        scalar = rho_arr.ndim == 0
        rho_arr = np.atleast_1d(rho_arr)
        out_t = np.empty_like(rho_arr)
        out_p = np.empty_like(rho_arr)
        on_axis = rho_arr == 0.0
        if np.any(on_axis):
            if self.rho_min != 0.0:
                raise ValueError("rho=0 outside this profile")
            f0 = self.f(0.0)
            out_t[on_axis] = 1.0 / f0
            out_p[on_axis] = -self.f(0.0, 2) / (f0 * self.g(0.0, 2))
        off = ~on_axis
        if np.any(off):
            r = rho_arr[off]
            D = self.wronskian(r)
            out_t[off] = self.g(r, 1) / D
            out_p[off] = -self.f(r, 1) / D
        if scalar:
            return float(out_t[0]), float(out_p[0])
        return out_t, out_p

    # -- transformations ------------------------------------------------------

    def scale(self, c: float) -> "Profile":
        """(f, g) -> (c f, c g) with beta unchanged; c > 0 preserves contact."""
        if c <= 0:
            raise ValueError("scale factor must be positive")
        segs = [
            Segment(s.lo, s.hi, c * s.f, c * s.g, s.beta.copy())
            for s in self._segments
        ]
        return Profile(segs, rho_min=self.rho_min)

    def restrict(self, lo: float, hi: float | None = None) -> "Profile":
        """Restriction to [lo, hi] (splitting straddling segments exactly)."""
        hi = self.rho_max if hi is None else float(hi)
        if not (self.rho_min - 1e-12 <= lo < hi <= self.rho_max + 1e-12):
            raise ValueError("restriction interval outside the profile domain")
        segs = []
        for s in self._segments:
            a, b = max(s.lo, lo), min(s.hi, hi)
            if b - a > _BREAK_TOL:
                segs.append(Segment(a, b, s.f.copy(), s.g.copy(), s.beta.copy()))
        return Profile(segs, rho_min=lo, check=False)

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "angles": dict(ANGLES_HEADER),
            "rho_max": self.rho_max,
            **({"rho_min": self.rho_min} if self.rho_min != 0.0 else {}),
            "segments": [
                {
                    "interval": [s.lo, s.hi],
                    "f": list(map(float, s.f)),
                    "g": list(map(float, s.g)),
                    "beta": list(map(float, s.beta)),
                }
                for s in self._segments
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Profile":
        try:
            segs = [
                Segment(
                    float(sd["interval"][0]),
                    float(sd["interval"][1]),
                    np.asarray(sd["f"], dtype=float),
                    np.asarray(sd["g"], dtype=float),
                    np.asarray(sd["beta"], dtype=float),
                )
                for sd in d["segments"]
            ]
        except (KeyError, TypeError, IndexError) as exc:
            raise ProfileError(f"malformed profile data: {exc}") from exc
        rho_min = float(d.get("rho_min", 0.0))
        prof = cls(segs, rho_min=rho_min)
        declared = float(d["rho_max"])
        if abs(declared - prof.rho_max) > 1e-9 * max(1.0, declared):
            raise ProfileError(
                f"declared rho_max {declared} disagrees with segments "
                f"({prof.rho_max})"
            )
        return prof

    def save(self, path):
        Path(path).write_text(dumps_profile(self))

    @classmethod
    def load(cls, path) -> "Profile":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ProfileError(f"invalid profile JSON: {exc}") from exc
        return cls.from_dict(data)


def _canon_float(x: float) -> float:
    # 17 significant digits round-trips IEEE doubles
    return float(format(float(x), ".17g"))


def _canonicalize(obj):
    if isinstance(obj, float):
        return _canon_float(obj)
    if isinstance(obj, dict):
        return {k: _canonicalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonicalize(v) for v in obj]
    return obj


def dumps_profile(profile: Profile) -> str:
    return json.dumps(_canonicalize(profile.to_dict()), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Built-in profile families
# ---------------------------------------------------------------------------


def lambda0(rho_max: float = 1.0, c: float = 1.0, beta0: float = 1.0) -> Profile:
    """The standard tight contact form c (dtheta + rho^2 dphi), beta constant."""
    seg = Segment(0.0, rho_max, np.array([c]), np.array([0.0, 0.0, c]), np.array([beta0]))
    return Profile([seg])


def open_book_profile(h2: float = 0.01, delta: float = 0.25,
                      rho_max: float = 0.35) -> Profile:
    """Binding-orbit chart of the standard open book, stabilized near the axis.

    Models f = pi h(rho), g = pi rho^2 h(rho) with h == 1 for rho >= delta and
    h''(0) = h2; beta is the even polynomial expansion of 2 pi / (1 - 2 pi
    rho^2).  The chart radius must stay below 1/sqrt(2 pi) where those
    coordinates degenerate.  A small positive h2 makes every cover of the
    central orbit nondegenerate.
    """
    if not 0 < delta < rho_max < 1.0 / math.sqrt(2 * math.pi):
        raise ValueError("need 0 < delta < rho_max < 1/sqrt(2 pi)")
    pi = math.pi
    # beta expansion: 2 pi (1 + x + x^2 + x^3 + x^4), x = 2 pi rho^2
    beta = np.zeros(9)
    for k in range(5):
        beta[2 * k] = 2 * pi * (2 * pi) ** k
    rho_m = delta / 2.0
    # inner even segment: h = h0 + (h2/2) rho^2 with h(rho_m) = 1
    h0 = 1.0 - 0.5 * h2 * rho_m**2
    f_in = pi * np.array([h0, 0.0, 0.5 * h2])
    g_in = pi * np.array([0.0, 0.0, h0, 0.0, 0.5 * h2])
    # bridge [rho_m, delta] joins the inner jets to h == 1
    f_jets_m = _poly.jet_of_poly(f_in, rho_m)
    g_jets_m = _poly.jet_of_poly(g_in, rho_m)
    f_out = np.array([pi])
    g_out = np.array([0.0, 0.0, pi])
    f_bridge = _poly.hermite_segment(rho_m, delta, f_jets_m,
                                     _poly.jet_of_poly(f_out, delta))
    g_bridge = _poly.hermite_segment(rho_m, delta, g_jets_m,
                                     _poly.jet_of_poly(g_out, delta))
    segs = [
        Segment(0.0, rho_m, f_in, g_in, beta),
        Segment(rho_m, delta, f_bridge, g_bridge, beta),
        Segment(delta, rho_max, f_out, g_out, beta),
    ]
    prof = Profile(segs)
    prof.require_contact()
    return prof
