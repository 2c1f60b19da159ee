"""Region decomposition, leaf population, and stability certification.

The radii where q f' - 2 pi p g' vanishes split (0, rho_max] into elementary
regions: annuli between consecutive orbit tori (the outermost one ends at the
chart boundary) and a core around the axis.  Each region is foliated by
cylinders of one signed class; the core carries planes when the signed q is
zero and cylinders to the |q|-cover of the central orbit otherwise.  The
stability certificate is the checkable part of the analytic statement: every
asymptotic orbit in use nondegenerate or Morse-Bott, and every leaf of index
two (orbit cylinders aside).  The full regularity of the evaluation-map
linearization has no finite-dimensional formula and is not certified; the
report documents exactly what was checked.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import cylinders as cyl
from .orbits import CentralOrbit, OrbitTorus, central_cz, normalize_pq, scan_tori
from .profile import Profile

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Region:
    """Elementary radial region with its signed cylinder class."""

    kind: str                 # 'annulus' | 'core'
    lo: float
    hi: float
    pq: tuple[int, int]
    boundary_tori: tuple[OrbitTorus, ...]
    outer_is_chart_boundary: bool = False

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "interval": [self.lo, self.hi],
            "pq": list(self.pq),
            "boundary_tori": [t.to_dict() for t in self.boundary_tori],
            "outer_is_chart_boundary": self.outer_is_chart_boundary,
        }


@dataclass
class FoliationReport:
    profile: Profile
    pq_requested: tuple[int, int]
    regions: list[Region]
    leaves: list[cyl.CylinderLeaf]
    orbit_census: dict
    stability: str            # 'stable' | 'unstable'
    reasons: list[str]
    seed: int
    schema: str = "reebfol.foliation/1"

    def to_dict(self, include_profile: bool = True) -> dict:
        d = {
            "schema": self.schema,
            "pq_requested": list(self.pq_requested),
            "regions": [r.to_dict() for r in self.regions],
            "leaves": [leaf.summary() for leaf in self.leaves],
            "orbit_census": {
                "tori": [t.to_dict() for t in self.orbit_census["tori"]],
                "central": [c.to_dict() for c in self.orbit_census["central"]],
            },
            "stability": self.stability,
            "reasons": list(self.reasons),
            "seed": self.seed,
        }
        if include_profile:
            d["profile"] = self.profile.to_dict()
        return d


def decompose_regions(profile: Profile, p: int, q: int) -> list[Region]:
    """Ordered regions from rho_max inward: annuli between consecutive roots
    of q f' - 2 pi p g', then one core region around the axis."""
    profile.require_contact()
    p, q = normalize_pq(p, q)
    tori = scan_tori(profile, p, q)
    radii = sorted((t.r for t in tori), reverse=True)
    by_r = {t.r: t for t in tori}
    regions: list[Region] = []
    hi = profile.rho_max
    outer_chart = True
    for r in radii:
        pq = cyl.sign_convention(profile, (r, hi), p, q)
        regions.append(Region(
            kind="annulus", lo=r, hi=hi, pq=pq,
            boundary_tori=tuple(
                t for t in (by_r.get(r), by_r.get(hi)) if t is not None
            ),
            outer_is_chart_boundary=outer_chart,
        ))
        hi = r
        outer_chart = False
    floor = profile.axis_floor
    pq = cyl.sign_convention(profile, (floor * 10, hi), p, q)
    regions.append(Region(
        kind="core", lo=0.0, hi=hi, pq=pq,
        boundary_tori=tuple(t for t in (by_r.get(hi),) if t is not None),
        outer_is_chart_boundary=outer_chart,
    ))
    return regions


def build_foliation(profile: Profile, p: int, q: int, density: int = 8,
                    opts: cyl.IntegrateOptions | None = None,
                    seed: int = 0) -> FoliationReport:
    """Populate each region with ``density`` representative leaves.

    Leaves sit at evenly spaced starting radii; half keep zero angles and the
    rest get deterministic angle offsets so the disjointness check exercises
    the angular separation too.  The stability verdict summarizes the
    certificates: a reason string per failed check, stable only when none
    fail and at least one asymptotic orbit anchors the foliation.
    """
    p, q = normalize_pq(p, q)
    regions = decompose_regions(profile, p, q)
    tori = scan_tori(profile, p, q)
    central: list[CentralOrbit] = [central_cz(profile, 1)]
    reasons: list[str] = []

    leaves: list[cyl.CylinderLeaf] = []
    for idx, region in enumerate(regions):
        lo = region.lo if region.kind == "annulus" else profile.axis_floor
        span = region.hi - lo
        pr, qr = region.pq
        if qr != 0 and region.kind == "core":
            k = abs(qr)
            if all(c.k != k for c in central):
                central.append(central_cz(profile, k))
        for j in range(density):
            rho0 = lo + span * (j + 1) / (density + 1)
            if j % 2 == 0:
                theta0, phi0 = 0.0, 0.0
            else:
                theta0 = (0.37 * j) % 1.0
                phi0 = (0.61 * j * TWO_PI) % TWO_PI
            leaf = cyl.integrate_cylinder(
                profile, pr, qr, rho_start=rho0,
                theta0=theta0, phi0=phi0, opts=opts,
            )
            leaf.region = idx
            leaves.append(leaf)

    _check_region_uniformity(regions, leaves, reasons)
    _stability_reasons(profile, regions, leaves, tori, central, reasons)
    stability = "stable" if not reasons else "unstable"
    return FoliationReport(
        profile=profile, pq_requested=(p, q), regions=regions, leaves=leaves,
        orbit_census={"tori": tori, "central": central},
        stability=stability, reasons=reasons, seed=seed,
    )


def _check_region_uniformity(regions, leaves, reasons):
    for idx in range(len(regions)):
        group = [l for l in leaves if l.region == idx]
        if not group:
            continue
        pqs = {(l.p, l.q) for l in group}
        if len(pqs) > 1:
            reasons.append(f"region {idx}: leaves disagree on the signed class")
        signs = {
            tuple(p.sign if p else None for p in l.punctures) for l in group
        }
        if len(signs) > 1:
            reasons.append(f"region {idx}: leaves disagree on puncture signs")


def _stability_reasons(profile, regions, leaves, tori, central, reasons):
    if not tori:
        reasons.append("no orbit tori in the chart: leaves have no asymptotic "
                       "orbits to bind to")
        if all(central_cz(profile, k).degenerate for k in range(1, 4)):
            reasons.append("central orbit covers all degenerate")
        return
    for t in tori:
        if not t.morse_bott:
            reasons.append(f"torus at rho={t.r} is not Morse-Bott")
    for c in central:
        if c.degenerate and any(
            l.neg_end.puncture is not None
            and l.neg_end.puncture.target_kind == "central"
            and l.neg_end.puncture.cover == c.k
            for l in leaves
        ):
            reasons.append(f"central orbit cover k={c.k} is degenerate")
    for leaf in leaves:
        for end in (leaf.neg_end, leaf.pos_end):
            if end.kind == "unresolved":
                reasons.append(
                    f"leaf in region {leaf.region}: unresolved end "
                    f"(gap {end.gap})"
                )
            elif end.kind == "puncture" and end.puncture is None:
                reasons.append(
                    f"leaf in region {leaf.region}: {end.note}"
                )
        if leaf.index is None:
            reasons.append(
                f"leaf in region {leaf.region}: index not certifiable"
            )
        elif leaf.index != 2:
            reasons.append(
                f"leaf in region {leaf.region}: index {leaf.index} != 2"
            )


def disjointness_check(report: FoliationReport, samples: int = 500,
                       seed: int | None = None, tol: float = 1e-9) -> bool:
    """Sample random pairs of distinct leaves and verify pointwise separation.

    Leaves are compared at matched parameters (s, t): pairs with distinct
    angle offsets differ in the angle fibers; same-angle pairs must differ in
    rho(s) along the common s-range, which strict monotonicity in the start
    radius guarantees for exact solutions.  Returns True when no sampled pair
    collides within ``tol``.
    """
    seed = report.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    by_region: dict[int, list[cyl.CylinderLeaf]] = {}
    for leaf in report.leaves:
        by_region.setdefault(leaf.region, []).append(leaf)
    eligible = [g for g in by_region.values() if len(g) >= 2]
    if not eligible:
        return True
    for _ in range(samples):
        group = eligible[rng.integers(len(eligible))]
        i, j = rng.choice(len(group), size=2, replace=False)
        if not _pair_disjoint(group[i], group[j], tol):
            return False
    return True


def _pair_disjoint(l1: cyl.CylinderLeaf, l2: cyl.CylinderLeaf, tol: float) -> bool:
    dth = (l1.theta0 - l2.theta0) % 1.0
    dth = min(dth, 1.0 - dth)
    dph = (l1.phi0 - l2.phi0) % TWO_PI
    dph = min(dph, TWO_PI - dph)
    if dth > tol or dph > tol:
        return True
    lo = max(l1.s[0], l2.s[0])
    hi = min(l1.s[-1], l2.s[-1])
    if hi <= lo:
        return True
    ss = np.linspace(lo, hi, 512)
    r1 = np.interp(ss, l1.s, l1.rho)
    r2 = np.interp(ss, l2.s, l2.rho)
    return bool(np.min(np.abs(r1 - r2)) > tol)


class MatchingError(ValueError):
    """Profiles disagree where the continued leaf must match."""


def continue_leaf(new_profile: Profile, leaf: cyl.CylinderLeaf, s_match: float,
                  old_profile: Profile | None = None,
                  opts: cyl.IntegrateOptions | None = None) -> cyl.CylinderLeaf:
    """Analytic continuation of a leaf across a profile change near the core.

    The new profile must agree with the one that produced the leaf on the
    radii the leaf occupies for s >= s_match (verified by re-checking the
    leaf's own equations against the new data there).  The leaf is then
    re-integrated from the matched state; the part above ``s_match``
    reproduces the input within integration accuracy, and the backward part
    asymptotes to the new core behaviour (a new torus radius when the changed
    profile introduces one).  Under the symmetric ansatz both integrability
    obstructions vanish identically (the angle components are harmonic); they
    are evaluated and asserted zero.  The C^1 distance between old and new
    data is reported as a diagnostic when the old profile is supplied.
    """
    if not leaf.s[0] <= s_match <= leaf.s[-1]:
        raise ValueError("s_match outside the leaf's parameter range")
    idx = int(np.searchsorted(leaf.s, s_match))
    idx = min(max(idx, 0), len(leaf.s) - 1)
    rho_m = float(leaf.rho[idx])
    a_m = float(leaf.a[idx])

    # agreement check: the kept samples must satisfy the new profile's
    # equations (this is exactly the statement that the profiles agree on
    # the matched radii)
    tail = cyl.CylinderLeaf(
        p=leaf.p, q=leaf.q, theta0=leaf.theta0, phi0=leaf.phi0,
        s=leaf.s[idx:], a=leaf.a[idx:], rho=leaf.rho[idx:],
        neg_end=leaf.neg_end, pos_end=leaf.pos_end,
        energy_dlambda=0.0, boundary_term=0.0, index=None,
        topology=leaf.topology,
    )
    if len(tail.s) >= 13:
        res = cyl.cr_residual(tail, new_profile)
        if res > 1e-7:
            raise MatchingError(
                f"new profile does not reproduce the leaf above s_match "
                f"(residual {res})"
            )

    # integrability obstructions under the ansatz: theta and phi are linear
    # in t, hence harmonic, and theta_s phi_t - theta_t phi_s = 0
    theta_s, phi_s = 0.0, 0.0
    theta_t, phi_t = float(leaf.q), -TWO_PI * leaf.p
    lap_theta = 0.0
    lap_phi = 0.0
    jac = theta_s * phi_t - theta_t * phi_s
    res_rho_integrability = (
        new_profile.f(rho_m, 1) * lap_theta + new_profile.g(rho_m, 1) * lap_phi
        - (new_profile.f(rho_m, 1) * new_profile.g(rho_m, 2)
           - new_profile.f(rho_m, 2) * new_profile.g(rho_m, 1))
        / new_profile.beta(rho_m) * jac
    )
    res_a_integrability = (
        new_profile.f(rho_m) * lap_theta + new_profile.g(rho_m) * lap_phi
    )
    assert res_rho_integrability == 0.0 and res_a_integrability == 0.0

    new_leaf = cyl.integrate_cylinder(
        new_profile, leaf.p, leaf.q, rho_start=rho_m, a_start=a_m,
        theta0=leaf.theta0, phi0=leaf.phi0, opts=opts,
    )
    new_leaf.region = leaf.region
    new_leaf.warnings.extend(leaf.warnings)
    if old_profile is not None:
        new_leaf.warnings.append(
            f"c1_distance_to_old={c1_distance(old_profile, new_profile):.6g}"
        )
    return new_leaf


def c1_distance(a: Profile, b: Profile, n: int = 2048) -> float:
    """Diagnostic sup-norm of (f, g) and first derivatives on the common range."""
    lo = max(a.rho_min, b.rho_min)
    hi = min(a.rho_max, b.rho_max)
    rr = np.linspace(lo, hi, n)
    worst = 0.0
    for which in ("f", "g"):
        for order in (0, 1):
            worst = max(worst, float(np.max(np.abs(
                a.eval(rr, which, order) - b.eval(rr, which, order)
            ))))
    return worst
