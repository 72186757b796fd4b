"""High-resolution boundary refinement in strip space.

The neighborhood of an upsampled low-resolution boundary spline is resampled
into a strip image, boundary pixels are scored there, and a minimum-energy
path through the strip is mapped back to image coordinates.
"""

from .geometry import (
    BoundaryCurve, Contour, eval_normal, eval_point, extract_contours,
    fit_periodic_bspline, perturb_curve, scale_curve, translate_curve,
)
from .losses import (
    LossConfig, StripPrediction, boundary_distance_loss, c0_loss, compose_selection,
    dice_loss, matching_loss, selection_backward, soft_argmax_column, total_loss, weighted_l1,
)
from .metrics import BoundaryEval, boundary_f, mask_boundary
from .predictor import PredictorSpec, grayscale, predict
from .reconstruct import (
    BoundaryPath, adaptive_refine, build_energy, crossing_pairs, fill_paths, lr_to_hr, map_path,
    min_energy_path, rasterize_paths, refine_contour, refine_mask,
)
from .strip import (
    StripConfig, StripGeometry, StripMask, choose_strip_width, crop_strip, make_strip,
    rasterize_gt_strip_mask,
)
from .synth import circle_contour, make_fixture, upsample_mask

__version__ = "0.1.0"
