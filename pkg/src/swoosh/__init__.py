"""Swoosh heatmap regularization and fetal-biometry measurement tools."""

from .geometry import (
    EllipseParams,
    Point2,
    Space,
    axis_endpoints,
    circumference,
    dod_order,
    ellipse_from_axes,
    fit_ellipse,
    landmark_distance,
    map_coordinates,
)
from .heatmap import Heatmap, Landmark, argmax_landmark, dispersion, make_ground_truth, mse, optimum_mse_pair
from .loss import LossBreakdown, LossConfig, compute_loss, loss_gradient
from .metrics import DiffSummary, RaterTable, icc_2_1, mean_difference
from .optim import OptimConfig, OptimTrace, compare_saf_effect, optimize_pair
from .saf import SafCoefficients, saf_derivative, saf_eval, solve_coefficients

__version__ = "0.1.0"
