"""Sampling-based verification of realizations, limits and inclusions."""

from .checks import (
    ConvergenceReport,
    DaggerReport,
    EtaEstimate,
    LiftReport,
    MonotonicityReport,
    SandwichReport,
    cloud_to_csv,
    dagger_projection_check,
    estimate_eta,
    eta_bound,
    lift_consistency_check,
    limit_convergence_check,
    monotonicity_check,
    sandwich_check,
    write_report,
    zero_set_in_ball,
)
from .metrics import HausdorffResult, component_labels, connected_components, default_linking_radius, hausdorff_distance
from .sampling import (
    EmptyCloudError,
    SampleCloud,
    auto_tau,
    exact_membership,
    fiber,
    grid_axes,
    grid_step,
    inherited_tau,
    sample_realization,
)

__all__ = [
    "ConvergenceReport",
    "DaggerReport",
    "EmptyCloudError",
    "EtaEstimate",
    "HausdorffResult",
    "LiftReport",
    "MonotonicityReport",
    "SampleCloud",
    "SandwichReport",
    "auto_tau",
    "cloud_to_csv",
    "component_labels",
    "connected_components",
    "dagger_projection_check",
    "default_linking_radius",
    "estimate_eta",
    "eta_bound",
    "exact_membership",
    "fiber",
    "grid_axes",
    "grid_step",
    "hausdorff_distance",
    "inherited_tau",
    "lift_consistency_check",
    "limit_convergence_check",
    "monotonicity_check",
    "sample_realization",
    "sandwich_check",
    "write_report",
    "zero_set_in_ball",
]
