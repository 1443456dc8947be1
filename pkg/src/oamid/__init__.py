"""Correlated orbital-angular-momentum object identification toolkit.

Simulates how a transmissive target reshapes the two-photon OAM joint
spectrum of an SPDC source, models the coincidence-counting measurement
with Poisson noise, and identifies targets from off-diagonal
joint-spectrum signatures using small measurement sets.
"""

from oamid.lg import ModeGeometry, log_factorial, mode_amplitude, ring_radius
from oamid.masks import (
    ObjectMask,
    RasterMask,
    SectorMask,
    StripSpec,
    half_plane,
    load_raster,
    make_cross,
    random_smooth_mask,
    rotate_mask,
    uniform_mask,
)
from oamid.projection import AzimuthalProfile, OperatorMatrix, operator_matrix, radial_profile
from oamid.spdc import NaturalSpectrum, load_spectrum, parametric_spectrum
from oamid.jointspec import (
    JointSpectrum,
    apply_parity_flip,
    cross_section,
    diagonal_sums,
    isolate_object,
    synthesize,
)
from oamid.counting import (
    CountTable,
    MeasurementPlan,
    adjust_integration_time,
    plan_measurements,
    simulate_counts,
)
from oamid.analysis import IdentificationResult, SymmetryReport, compare_region_sizes, identify, symmetry_report
from oamid.oracle import OracleReport, check_factorization, check_selection_rule, matrix_oracle

__all__ = [
    "ModeGeometry",
    "log_factorial",
    "mode_amplitude",
    "ring_radius",
    "ObjectMask",
    "StripSpec",
    "SectorMask",
    "RasterMask",
    "make_cross",
    "rotate_mask",
    "half_plane",
    "uniform_mask",
    "random_smooth_mask",
    "load_raster",
    "AzimuthalProfile",
    "OperatorMatrix",
    "operator_matrix",
    "radial_profile",
    "NaturalSpectrum",
    "parametric_spectrum",
    "load_spectrum",
    "JointSpectrum",
    "synthesize",
    "apply_parity_flip",
    "cross_section",
    "diagonal_sums",
    "isolate_object",
    "CountTable",
    "MeasurementPlan",
    "simulate_counts",
    "adjust_integration_time",
    "plan_measurements",
    "SymmetryReport",
    "IdentificationResult",
    "symmetry_report",
    "compare_region_sizes",
    "identify",
    "OracleReport",
    "matrix_oracle",
    "check_factorization",
    "check_selection_rule",
]

__version__ = "0.1.0"
