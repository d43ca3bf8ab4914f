"""Accuracy-invariance tradeoff analysis on the 2-D information plane.

Quantifies any data representation by its (utility, leakage) pair, computes
the theoretically feasible region and Pareto frontier in closed form,
certifies suboptimality from finite samples, and constructively achieves the
regression frontier in the linear-Gaussian setting.
"""

from .classification import (
    Certificate,
    ClassificationPlane,
    FeasiblePolygonCE,
    certify,
    classify_point,
    cost_bounds,
    dg_error_floor,
    inner_polygon,
    joint_from_probabilities,
    uniform_threshold_expected_point,
    uniform_threshold_joint,
    uniform_threshold_sample,
    vertex_ea,
    vertex_ey,
)
from .gaussian import (
    AchievabilityReport,
    ConstructedRepresentation,
    GaussianModel,
    PsdTarget,
    closed_form_plane_point,
    conditional_variance_of,
    construct_invariant_optimal,
    construct_lagrangian_optimal,
    construct_sufficiency_optimal,
    monte_carlo_verify,
    rank1_linear_map,
    realize_psd_target,
    whiten,
)
from .metrics import (
    ContingencyTable,
    DiscreteDistribution,
    EstimatorConfig,
    InfoPlaneError,
    PlanePoint,
    RepresentationSample,
    conditional_entropy,
    conditional_mean_variance,
    delta_conditional,
    entropy,
    mutual_information,
    plane_point,
)
from .mixing import DiscretePopulation, MixedRepresentation, mix, mix_contingency_tables, mix_curve
from .regression import (
    FrontierCurve,
    RegressionPlane,
    certify_ls,
    classify_point_ls,
    cost_bounds_ls,
    eigenvalues_r,
    frontier,
    frontier_from_dual,
    lagrangian_bound,
    vertex_ea_ls,
    vertex_ey_ls,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
