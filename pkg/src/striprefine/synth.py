"""Synthetic HR images with analytic ground truth and derived LR masks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from skimage.measure import block_reduce

from .geometry import Contour
from .strip import bilinear_sample

__all__ = ["Fixture", "KINDS", "make_fixture", "downsample_mask", "upsample_mask", "circle_contour"]

KINDS = ("disk", "ellipse", "star", "two_circles", "step_edge")
BACKGROUND = np.array([0.2, 0.25, 0.3])
SUPERSAMPLE = 4


@dataclass
class Fixture:
    image: np.ndarray
    gt: np.ndarray
    lr: np.ndarray
    scale: int
    params: dict = field(default_factory=dict)


def _shape_fn(kind: str, size: int, radius: float, lobes: int, displacement: float, half: bool):
    c = size / 2.0

    if kind == "disk":
        def inside(x, y):
            r = np.hypot(x - c, y - c)
            grow = displacement if not half else np.where(x >= c, displacement, 0.0)
            return r <= radius + grow
    elif kind == "ellipse":
        def inside(x, y):
            a = radius + displacement
            b = 0.7 * radius + displacement
            return ((x - c) / a) ** 2 + ((y - c) / b) ** 2 <= 1.0
    elif kind == "star":
        def inside(x, y):
            th = np.arctan2(y - c, x - c)
            return np.hypot(x - c, y - c) <= radius * (1 + 0.25 * np.cos(lobes * th)) + displacement
    elif kind == "two_circles":
        def inside(x, y):
            rr = 0.45 * radius + displacement
            d = 0.55 * radius
            return (np.hypot(x - c + d, y - c) <= rr) | (np.hypot(x - c - d, y - c) <= rr)
    elif kind == "step_edge":
        def inside(x, y):
            return np.broadcast_to(x >= c + displacement, np.broadcast(x, y).shape)
    else:
        raise ValueError(f"unknown fixture kind {kind!r}; expected one of {KINDS}")
    return inside


def downsample_mask(mask, scale: int) -> np.ndarray:
    """Box-filter by ``scale`` and keep cells that are at least half foreground."""
    m = np.asarray(mask, dtype=float)
    return block_reduce(m, (scale, scale), np.mean, cval=0.0) >= 0.5


def upsample_mask(lr_mask, scale: int, shape) -> np.ndarray:
    """Bilinear LR -> HR upsampling with pixel-center alignment, thresholded
    at 0.5."""
    h, w = shape
    yy, xx = np.mgrid[:h, :w].astype(float)
    off = (scale - 1) / 2.0
    coords = np.stack([(xx - off) / scale, (yy - off) / scale], axis=-1)
    return bilinear_sample(np.asarray(lr_mask, dtype=float), coords) >= 0.5


def make_fixture(kind: str = "disk", size: int = 1024, scale: int = 16, radius: float = 300.0,
                 contrast: float = 0.6, noise: float = 0.0, seed: int = 0, lobes: int = 5,
                 displacement: float = 0.0, half: bool = False,
                 lr_from_prior: bool = False) -> Fixture:
    """Render an anti-aliased HR image, its GT mask and the LR mask.

    ``displacement`` grows the shape in the image and GT by that many
    pixels (only the ``x >= center`` half when ``half``). With
    ``lr_from_prior`` the LR mask comes from the undisplaced shape, which
    puts the true boundary at a known offset from the LR boundary.
    """
    inside = _shape_fn(kind, size, radius, lobes, displacement, half)
    yy, xx = np.mgrid[:size, :size].astype(float)
    gt = inside(xx, yy)
    cover = np.zeros((size, size))
    step = 1.0 / SUPERSAMPLE
    for dy in (np.arange(SUPERSAMPLE) + 0.5) * step - 0.5:
        for dx in (np.arange(SUPERSAMPLE) + 0.5) * step - 0.5:
            cover += inside(xx + dx, yy + dy)
    cover /= SUPERSAMPLE**2
    image = BACKGROUND[None, None, :] + contrast * cover[..., None]
    if noise > 0:
        rng = np.random.default_rng(seed)
        image = image + rng.normal(0.0, noise, image.shape)
    image = np.clip(image, 0.0, 1.0)
    prior = _shape_fn(kind, size, radius, lobes, 0.0, False)(xx, yy) if lr_from_prior else gt
    lr = downsample_mask(prior, scale)
    params = dict(kind=kind, size=size, scale=scale, radius=radius, contrast=contrast,
                  noise=noise, seed=seed, lobes=lobes, displacement=displacement, half=half,
                  center=size / 2.0)
    return Fixture(image, np.asarray(gt, dtype=bool), lr, scale, params)


def circle_contour(center, radius: float, n: int = 64, start_angle: float = -np.pi / 2) -> Contour:
    """Points on a circle with increasing angle, i.e. with the outside on the
    positive-normal side of the library's ``(ty, -tx)`` normal convention."""
    th = start_angle + 2 * np.pi * np.arange(n) / n
    return Contour(np.column_stack([center[0] + radius * np.cos(th),
                                    center[1] + radius * np.sin(th)]))
