"""Strip-domain boundary losses with analytic gradients.

Every loss returns ``(value, grad)`` where ``grad`` has the shape of the
prediction it differentiates. Non-smooth points take the subgradient of the
branch that is attained; ties in max operations go to the lower index.
Gradients never flow into the ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .strip import StripMask, crop_offset

__all__ = [
    "StripPrediction",
    "LossConfig",
    "compose_selection",
    "selection_backward",
    "weighted_l1",
    "dice_loss",
    "soft_argmax",
    "soft_argmax_column",
    "boundary_distance_loss",
    "matching_loss",
    "c0_loss",
    "total_loss",
]

ZERO_COLUMN = 1e-12


@dataclass(frozen=True)
class StripPrediction:
    """Initial scores ``x``, column-stochastic selection ``m`` and final
    scores ``s = x * m``. ``logits`` is kept when the prediction was built
    by :func:`compose_selection`."""

    x: np.ndarray
    m: np.ndarray
    s: np.ndarray
    logits: np.ndarray | None = None
    row_offset: int = 0

    @property
    def shape(self):
        return self.s.shape


@dataclass(frozen=True)
class LossConfig:
    epsilon: float = 1e-6
    lambda1: float = 0.1
    lambda2: float = 20.0
    lambda3: float = 1.0
    margin: float = 1.0
    maxpool_kernel: int = 11
    crop_fraction: float = 0.5

    def __post_init__(self):
        for name in ("epsilon", "lambda1", "lambda2", "lambda3", "margin", "crop_fraction"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.maxpool_kernel < 1 or self.maxpool_kernel % 2 == 0:
            raise ValueError("maxpool_kernel must be a positive odd integer")


def _labels(y) -> np.ndarray:
    return np.asarray(y.mask if isinstance(y, StripMask) else y, dtype=float)


def compose_selection(x, logits) -> StripPrediction:
    """Column-wise softmax of ``logits`` gates the initial scores ``x``."""
    x = np.asarray(x, dtype=float)
    logits = np.asarray(logits, dtype=float)
    if x.shape != logits.shape:
        raise ValueError("x and logits must have the same shape")
    z = np.exp(logits - logits.max(axis=0, keepdims=True))
    m = z / z.sum(axis=0, keepdims=True)
    return StripPrediction(x, m, x * m, logits)


def selection_backward(pred: StripPrediction, grad_s, grad_x=None):
    """Push gradients w.r.t. ``s`` (and optionally ``x``) back to ``x`` and
    the selection logits. Returns ``(grad_x, grad_logits)``."""
    grad_s = np.asarray(grad_s, dtype=float)
    gx = grad_s * pred.m
    if grad_x is not None:
        gx = gx + grad_x
    gm = grad_s * pred.x
    # softmax Jacobian per column
    glog = pred.m * (gm - np.sum(gm * pred.m, axis=0, keepdims=True))
    return gx, glog


def weighted_l1(s, y, *, grad: bool = True):
    """Class-balanced L1. ``beta`` is the fraction of non-boundary pixels and
    weighs the boundary pixels; all-one or all-zero labels make it 0 or 1."""
    s = np.asarray(s, dtype=float)
    y = _labels(y)
    if s.shape != y.shape:
        raise ValueError("shape mismatch")
    pos = y > 0.5
    beta = np.count_nonzero(~pos) / y.size
    w = np.where(pos, beta, 1.0 - beta)
    value = float(np.sum(w * np.abs(y - s)))
    return value, (w * np.sign(s - y) if grad else None)


def dice_loss(s, y, eps: float = 1e-6, *, grad: bool = True):
    s = np.asarray(s, dtype=float)
    y = _labels(y)
    if s.shape != y.shape:
        raise ValueError("shape mismatch")
    num = 2.0 * np.sum(s * y) + eps
    den = np.sum(s) + np.sum(y) + eps
    value = 1.0 - num / den
    if not grad:
        return float(value), None
    return float(value), -(2.0 * y * den - num) / den**2


def soft_argmax(s):
    """Per-column expected row (1-based) under L1-normalized ``|s|``.

    Returns ``(positions, zero_columns)``; columns with vanishing mass get
    the center ``(H + 1) / 2`` and are flagged.
    """
    s = np.asarray(s, dtype=float)
    h = s.shape[0]
    a = np.abs(s)
    mass = a.sum(axis=0)
    zero = mass < ZERO_COLUMN
    idx = np.arange(1, h + 1, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        pos = (idx @ a) / mass
    pos[zero] = (h + 1) / 2.0
    return pos, zero


def _soft_argmax_grad(s, pos, zero):
    """d pos_j / d s_ij, zero for flagged columns."""
    s = np.asarray(s, dtype=float)
    h = s.shape[0]
    mass = np.abs(s).sum(axis=0)
    mass = np.where(zero, 1.0, mass)
    idx = np.arange(1, h + 1, dtype=float)[:, None]
    g = np.sign(s) * (idx - pos[None, :]) / mass[None, :]
    g[:, zero] = 0.0
    return g


def soft_argmax_column(s_col) -> float:
    pos, _ = soft_argmax(np.asarray(s_col, dtype=float)[:, None])
    return float(pos[0])


def _target_rows(y) -> np.ndarray:
    """1-based argmax row of every label column (first hit on ties)."""
    return np.argmax(_labels(y), axis=0).astype(float) + 1.0


def boundary_distance_loss(s, y, *, grad: bool = True):
    s = np.asarray(s, dtype=float)
    if s.shape != _labels(y).shape:
        raise ValueError("shape mismatch")
    w = s.shape[1]
    pos, zero = soft_argmax(s)
    diff = pos - _target_rows(y)
    value = float(np.abs(diff).sum() / w)
    if not grad:
        return value, None
    return value, _soft_argmax_grad(s, pos, zero) * (np.sign(diff) / w)[None, :]


def matching_loss(x, x_cropped, *, grad: bool = True):
    """Mean absolute difference over the centered rows shared by ``x`` and
    the prediction made on the cropped strip.

    Returns ``(value, (grad_x, grad_x_cropped))``.
    """
    x = np.asarray(x, dtype=float)
    xc = np.asarray(x_cropped, dtype=float)
    if xc.ndim != 2 or x.ndim != 2 or xc.shape[1] != x.shape[1]:
        raise ValueError("shape mismatch")
    if xc.size == 0:
        raise ValueError("zero overlap")
    off = 0 if xc.shape[0] == x.shape[0] else crop_offset(x.shape[0], xc.shape[0])
    region = x[off: off + xc.shape[0]]
    n = xc.size
    sign = np.sign(xc - region)
    value = float(np.abs(xc - region).sum() / n)
    if not grad:
        return value, (None, None)
    gx = np.zeros_like(x)
    gx[off: off + xc.shape[0]] = -sign / n
    return value, (gx, sign / n)


def _maxpool_argmax(d: np.ndarray, kernel: int) -> np.ndarray:
    """Index of the first maximum in each clipped window of width ``kernel``.

    Padding with ``-inf`` is equivalent to clipping since ``d >= 0``.
    """
    r = kernel // 2
    padded = np.concatenate([np.full(r, -np.inf), d, np.full(r, -np.inf)])
    win = np.lib.stride_tricks.sliding_window_view(padded, kernel)
    return np.arange(len(d)) - r + np.argmax(win, axis=1)


def c0_loss(s, cfg: LossConfig | None = None, *, grad: bool = True):
    """Margin penalty on soft-argmax jumps between neighboring columns
    (column ``W-1`` is compared with column 0), spread by a 1-D max pool
    with clipped windows and then averaged."""
    cfg = cfg or LossConfig()
    s = np.asarray(s, dtype=float)
    w = s.shape[1]
    if w < 2:
        raise ValueError("c0_loss needs at least two columns")
    pos, zero = soft_argmax(s)
    delta = pos - np.roll(pos, -1)
    d = np.maximum(0.0, np.abs(delta) - cfg.margin)
    hit = _maxpool_argmax(d, cfg.maxpool_kernel)
    value = float(d[hit].sum() / w)
    if not grad:
        return value, None

    g_d = np.bincount(hit, minlength=w) / w
    active = np.abs(delta) > cfg.margin
    g_delta = np.where(active, np.sign(delta), 0.0) * g_d
    g_pos = g_delta - np.roll(g_delta, 1)
    return value, _soft_argmax_grad(s, pos, zero) * g_pos[None, :]


def total_loss(pred: StripPrediction, pred_cropped: StripPrediction, y, y_cropped=None,
               cfg: LossConfig | None = None, *, grad: bool = True):
    """Weighted sum of every term.

    L1 is applied to both the initial and the final prediction; matching to
    the initial one; dice, boundary distance and C0 to the final one.
    Returns ``(value, breakdown, grads)``. ``grads`` holds the derivatives
    w.r.t. ``x``, ``s`` and the cropped prediction's ``x`` taken as
    independent arrays; use :func:`selection_backward` to reach the logits.
    Every loss takes ``grad=False`` to skip the derivative work.
    """
    cfg = cfg or LossConfig()
    yl = _labels(y)
    if pred.s.shape != yl.shape or pred.x.shape != yl.shape:
        raise ValueError("prediction and labels must share a shape")
    if y_cropped is not None and _labels(y_cropped).shape != pred_cropped.x.shape:
        raise ValueError("cropped prediction and cropped labels must share a shape")

    le_x, g_le_x = weighted_l1(pred.x, yl, grad=grad)
    le_s, g_le_s = weighted_l1(pred.s, yl, grad=grad)
    dc, g_dc = dice_loss(pred.s, yl, cfg.epsilon, grad=grad)
    bd, g_bd = boundary_distance_loss(pred.s, yl, grad=grad)
    mt, (g_mt_x, g_mt_xc) = matching_loss(pred.x, pred_cropped.x, grad=grad)
    c0, g_c0 = c0_loss(pred.s, cfg, grad=grad)

    breakdown = {
        "l_e_initial": le_x,
        "l_e_final": le_s,
        "dice": dc,
        "bd": bd,
        "matching": mt,
        "c0": c0,
    }
    value = le_x + le_s + dc + cfg.lambda1 * bd + cfg.lambda2 * mt + cfg.lambda3 * c0
    breakdown["total"] = value
    if not grad:
        return value, breakdown, None
    grads = {
        "x": g_le_x + cfg.lambda2 * g_mt_x,
        "s": g_le_s + g_dc + cfg.lambda1 * g_bd + cfg.lambda3 * g_c0,
        "x_cropped": cfg.lambda2 * g_mt_xc,
    }
    return value, breakdown, grads
