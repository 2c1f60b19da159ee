"""Canonical shipped profiles used by the test suite, docs and CLI demos.

All fixtures live on a radius-2 chart with the twist at delta = 1.2, where
the constructions stay numerically tame; the standard tight profile is also
available at unit radius.  ``condition4_profile`` runs the full surgery
pipeline (half twist, (n q; m p) = (1 1; 0 1) regluing, certified core) and
is the reference for the small-axis-slope-gap index computations.
"""

from __future__ import annotations

import numpy as np

from . import surgery
from .profile import Profile, lambda0, open_book_profile

CHART_RHO_MAX = 2.0
TWIST_DELTA = 1.2
SURGERY_DELTA = 0.35
TWO_PI_ = 2.0 * np.pi


def half_lutz_profile(delta: float = TWIST_DELTA,
                      rho_max: float = CHART_RHO_MAX) -> Profile:
    return surgery.lutz_twist(lambda0(rho_max=rho_max), "half", delta)


def full_lutz_profile(delta: float = TWIST_DELTA,
                      rho_max: float = CHART_RHO_MAX) -> Profile:
    return surgery.lutz_twist(lambda0(rho_max=rho_max), "full", delta)


def condition4_profile(gap: float = 1e-2):
    """Surgered profile with the axis slope pinned gap-close to the innermost
    torus slope; returns (profile, plan, conditions report)."""
    plan = surgery.SurgeryPlan(
        base=lambda0(rho_max=CHART_RHO_MAX),
        matrix=surgery.SurgeryMatrix(1, 1, 0, 1),
        delta=SURGERY_DELTA,
        epsilon=TWIST_DELTA,
        twist="half",
        gap=gap,
    )
    profile, report = surgery.run_plan(plan)
    return profile, plan, report


def binding_chart_profile(h2: float = 0.01) -> Profile:
    """Open-book binding chart, stabilized so the central covers are
    nondegenerate (see profile.open_book_profile)."""
    return open_book_profile(h2=h2)


def scaled_chart_profile(rho_max: float = 0.35) -> Profile:
    """The pi-scaled flat chart f = pi, g = pi rho^2 with the open-book beta;
    the unstabilized starting point for continuation examples."""
    import math

    from .profile import Segment
    pi = math.pi
    beta = np.zeros(9)
    for k in range(5):
        beta[2 * k] = 2 * pi * (2 * pi) ** k
    seg = Segment(0.0, rho_max, np.array([pi]), np.array([0.0, 0.0, pi]), beta)
    return Profile([seg])


def random_contact_profile(rng: np.random.Generator,
                           rho_max: float = 1.0) -> Profile:
    """Seeded single-segment polynomial profile, rejection-sampled to be a
    valid contact form with f(0) != 0 and nondegenerate low covers."""
    from .profile import Segment

    for _ in range(200):
        f0 = rng.uniform(0.3, 2.0) * rng.choice([-1.0, 1.0])
        f2 = rng.uniform(-2.0, 2.0)
        f4 = rng.uniform(-1.0, 1.0)
        g2 = rng.uniform(0.3, 2.0) * np.sign(f0)
        g4 = rng.uniform(-0.5, 0.5)
        b0 = rng.uniform(0.5, 3.0)
        b2 = rng.uniform(0.0, 1.0)
        seg = Segment(
            0.0, rho_max,
            np.array([f0, 0.0, f2, 0.0, f4]),
            np.array([0.0, 0.0, g2, 0.0, g4]),
            np.array([b0, 0.0, b2]),
        )
        prof = Profile([seg])
        if not prof.validate_contact().valid:
            continue
        # keep clear of the degeneracy borderline for oracle comparisons:
        # k f''(0) / (2 pi g''(0)) away from integers for k = 1..5
        frac_ok = all(
            abs(k * f2 / (TWO_PI_ * g2) - round(k * f2 / (TWO_PI_ * g2))) > 1e-4
            for k in range(1, 6)
        )
        if not frac_ok:
            continue
        return prof
    raise RuntimeError("could not sample a valid profile")


def write_fixture_files(directory):
    """Dump the canonical fixtures as profile JSON files; returns the paths."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = {}
    items = {
        "lambda0.json": lambda0(rho_max=CHART_RHO_MAX),
        "lambda0_unit.json": lambda0(),
        "half_lutz.json": half_lutz_profile(),
        "full_lutz.json": full_lutz_profile(),
        "open_book.json": binding_chart_profile(),
        "condition4.json": condition4_profile()[0],
    }
    for name, prof in items.items():
        path = directory / name
        prof.save(path)
        out[name] = path
    return out
