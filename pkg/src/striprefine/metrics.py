"""Boundary F-measure with a pixel tolerance."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage
from skimage.morphology import thin

__all__ = ["BoundaryEval", "mask_boundary", "boundary_f"]


@dataclass(frozen=True)
class BoundaryEval:
    precision: float
    recall: float
    f_score: float
    tolerance: float
    mean_distance: float
    empty_pred: bool = False
    empty_gt: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def mask_boundary(mask) -> np.ndarray:
    """Foreground pixels with at least one 4-neighbor in the background
    (outside the image counts as background)."""
    m = np.asarray(mask) != 0
    eroded = ndimage.binary_erosion(m, structure=ndimage.generate_binary_structure(2, 1),
                                    border_value=0)
    return m & ~eroded


def _distance_to(b: np.ndarray) -> np.ndarray:
    if not b.any():
        return np.full(b.shape, np.inf)
    return ndimage.distance_transform_edt(~b)


def boundary_f(pred_boundary, gt_boundary, tolerance_px: float = 1,
               normalize_width: bool = False) -> BoundaryEval:
    """Precision/recall of boundary pixels within ``tolerance_px`` (Euclidean).

    With ``normalize_width`` both rasters are first thinned to one pixel
    width. Empty inputs give zero precision/recall and set the matching
    flag; ``mean_distance`` is then ``inf``.
    """
    pred = np.asarray(pred_boundary) != 0
    gt = np.asarray(gt_boundary) != 0
    if pred.shape != gt.shape:
        raise ValueError("boundary rasters must have the same shape")
    if tolerance_px < 0:
        raise ValueError("tolerance must be >= 0")
    if normalize_width:
        pred, gt = thin(pred), thin(gt)
    d_gt = _distance_to(gt)
    d_pred = _distance_to(pred)
    n_pred, n_gt = int(pred.sum()), int(gt.sum())
    p = float(np.count_nonzero(d_gt[pred] <= tolerance_px) / n_pred) if n_pred else 0.0
    r = float(np.count_nonzero(d_pred[gt] <= tolerance_px) / n_gt) if n_gt else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    mean_d = float(d_gt[pred].mean()) if n_pred and n_gt else float("inf")
    return BoundaryEval(p, r, f, float(tolerance_px), mean_d, n_pred == 0, n_gt == 0)
