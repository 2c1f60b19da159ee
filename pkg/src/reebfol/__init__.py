"""Rotationally symmetric contact forms on a solid torus.

Profiles (f, g, beta) describe the contact form f d theta + g d phi and the
complex multiplication J v1 = beta v2; the library classifies their closed
Reeb orbits, applies Lutz twists and SL(2, Z) twist surgeries, numerically
constructs the finite-energy cylinders and planes of the symmetric ansatz,
and certifies the resulting foliations, cross-checking every closed-form
index, sign and energy statement against an independent numerical oracle.
"""

from .cylinders import (
    CurveTopology,
    CylinderLeaf,
    IntegrateOptions,
    Puncture,
    central_puncture_sign,
    cr_residual,
    cylinder_index,
    cz_torus_puncture,
    dlambda_energy,
    fredholm_index,
    integrate_cylinder,
    puncture_sign,
    sign_convention,
)
from .foliation import (
    FoliationReport,
    Region,
    build_foliation,
    c1_distance,
    continue_leaf,
    decompose_regions,
    disjointness_check,
)
from .orbits import (
    CentralOrbit,
    OrbitTorus,
    central_cz,
    is_morse_bott,
    reeb_return_time,
    scan_tori,
    torus_period,
    winding_oracle,
)
from .profile import (
    ContactError,
    ContactReport,
    Profile,
    ProfileError,
    Segment,
    lambda0,
    open_book_profile,
)
from .surgery import (
    ConditionsReport,
    CoreConstraints,
    LiftArithmetic,
    SurgeryMatrix,
    SurgeryPlan,
    cover_lift,
    extend_core,
    lutz_twist,
    orbit_homology_class,
    run_plan,
    surgery_pullback,
)

__version__ = "0.1.0"

__all__ = [
    "CentralOrbit", "ConditionsReport", "ContactError", "ContactReport",
    "CoreConstraints", "CurveTopology", "CylinderLeaf", "FoliationReport",
    "IntegrateOptions", "LiftArithmetic", "OrbitTorus", "Profile",
    "ProfileError", "Puncture", "Region", "Segment", "SurgeryMatrix",
    "SurgeryPlan", "build_foliation", "c1_distance", "central_cz",
    "central_puncture_sign", "continue_leaf", "cover_lift", "cr_residual",
    "cylinder_index", "cz_torus_puncture", "decompose_regions",
    "disjointness_check", "dlambda_energy", "extend_core", "fredholm_index",
    "integrate_cylinder", "is_morse_bott", "lambda0", "lutz_twist",
    "open_book_profile", "orbit_homology_class", "puncture_sign",
    "reeb_return_time", "run_plan", "scan_tori", "sign_convention",
    "surgery_pullback", "torus_period", "winding_oracle",
]
