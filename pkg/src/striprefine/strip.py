"""Strip images: resampling the band around a boundary curve into an
``H x W`` grid whose rows are normal offsets and columns arclength steps.

Row ``i`` sits at normal offset ``t = (i - H/2) * dt`` and column ``j`` at
arclength ``k = start_offset + j * dk``. Positive ``t`` points to the
background side of the curve.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .geometry import BoundaryCurve, eval_normal, eval_point

__all__ = [
    "StripConfig",
    "StripGeometry",
    "StripMask",
    "bilinear_sample",
    "make_strip",
    "rasterize_gt_strip_mask",
    "crop_strip",
    "crop_offset",
    "choose_strip_width",
    "strip_components",
    "curve_id",
    "strip_index",
]


@dataclass(frozen=True)
class StripConfig:
    height: int = 80
    width: int | None = None
    dt: float = 1.0
    width_factor: float = 1.5
    floor_dk: bool = False
    start_offset: float = 0.0

    def __post_init__(self):
        if self.height < 4 or self.height % 2:
            raise ValueError("strip height must be even and >= 4")
        if self.width is not None and self.width < 8:
            raise ValueError("strip width must be >= 8")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.width_factor <= 0:
            raise ValueError("width_factor must be positive")


@dataclass(frozen=True)
class StripGeometry:
    """HR coordinates of every strip cell; ``coords[i, j] = (x, y)``."""

    coords: np.ndarray
    dk: float
    dt: float
    curve_id: str = ""
    start_offset: float = 0.0

    @property
    def height(self) -> int:
        return self.coords.shape[0]

    @property
    def width(self) -> int:
        return self.coords.shape[1]

    def offsets(self) -> np.ndarray:
        return (np.arange(self.height) - self.height / 2) * self.dt


@dataclass(frozen=True)
class StripMask:
    """Binary strip boundary mask plus one representative row per column.

    ``border`` flags the columns whose label was forced onto the first or
    last row because no retained boundary pixel fell inside the strip.
    ``row_offset`` counts rows removed from the top by cropping.
    """

    mask: np.ndarray
    rows: np.ndarray
    border: np.ndarray
    row_offset: int = 0

    @property
    def shape(self):
        return self.mask.shape


def curve_id(curve: BoundaryCurve) -> str:
    h = hashlib.sha1(np.ascontiguousarray(curve.control_points).tobytes())
    h.update(np.ascontiguousarray(curve.knots).tobytes())
    return h.hexdigest()[:12]


def bilinear_sample(image, coords: np.ndarray) -> np.ndarray:
    """Bilinear lookup at ``(..., 2)`` ``(x, y)`` coordinates.

    Coordinates outside the image are clamped to the border pixel. Returns
    ``coords.shape[:-1]`` for a 2-D image, plus a trailing channel axis
    for a 3-D one.
    """
    img = np.asarray(image, dtype=float)
    pos = [coords[..., 1], coords[..., 0]]
    if img.ndim == 2:
        return ndimage.map_coordinates(img, pos, order=1, mode="nearest")
    return np.stack(
        [ndimage.map_coordinates(img[..., c], pos, order=1, mode="nearest")
         for c in range(img.shape[2])],
        axis=-1,
    )


def _as_float_image(image) -> np.ndarray:
    img = np.asarray(image)
    if img.dtype == np.uint8:
        return img.astype(float) / 255.0
    return img.astype(float)


def make_strip(image, curve: BoundaryCurve, cfg: StripConfig,
               width: int | None = None) -> tuple[np.ndarray, StripGeometry]:
    """Sample the strip image and record the geometry of every cell.

    The strip is float32, shape ``(H, W)`` for gray images or
    ``(H, W, C)`` for color ones.
    """
    w = width if width is not None else cfg.width
    if w is None:
        raise ValueError("strip width is required (cfg.width or width=)")
    if w < 8:
        raise ValueError("strip width must be >= 8")
    length = curve.total_length
    if w > 8 * length:
        raise ValueError("oversampled strip")
    dk = math.floor(length / w) if cfg.floor_dk else length / w
    if dk <= 0:
        raise ValueError("oversampled strip")
    k = cfg.start_offset + np.arange(w) * dk
    pts = eval_point(curve, k)
    nrm = eval_normal(curve, k)
    t = (np.arange(cfg.height) - cfg.height / 2) * cfg.dt
    coords = pts[None, :, :] + t[:, None, None] * nrm[None, :, :]
    geom = StripGeometry(coords, float(dk), cfg.dt, curve_id(curve), cfg.start_offset)
    strip = bilinear_sample(_as_float_image(image), coords).astype(np.float32)
    return strip, geom


def strip_index(points, curve: BoundaryCurve, geom: StripGeometry,
                samples_per_column: int = 8) -> np.ndarray:
    """Inverse of the strip geometry: nearest strip cell ``(i, j)`` of HR points.

    Each point is projected on the curve (closest of a dense arclength
    sampling), its signed normal offset gives the row and its arclength the
    column. Only meaningful where the strip does not fold over itself.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = geom.width * samples_per_column
    k = geom.start_offset + np.arange(n) * (geom.dk / samples_per_column)
    tree = cKDTree(eval_point(curve, k))
    _, nearest = tree.query(pts)
    kk = k[nearest]
    t = np.einsum("ij,ij->i", pts - eval_point(curve, kk), eval_normal(curve, kk))
    i = np.rint(t / geom.dt + geom.height / 2).astype(int)
    j = np.mod(np.rint((kk - geom.start_offset) / geom.dk).astype(int), geom.width)
    return np.column_stack([i, j])


def _nearest_sample(mask: np.ndarray, coords: np.ndarray) -> np.ndarray:
    h, w = mask.shape
    xi = np.clip(np.rint(coords[..., 0]).astype(int), 0, w - 1)
    yi = np.clip(np.rint(coords[..., 1]).astype(int), 0, h - 1)
    return mask[yi, xi]


def strip_components(mask: np.ndarray) -> list[np.ndarray]:
    """8-connected components of a strip mask, joined across the column wrap.

    Each component is returned as an ``(n, 2)`` array of ``(row, col)``.
    """
    mask = np.asarray(mask) != 0
    h, w = mask.shape
    labels, n = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    parent = list(range(n + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    if w > 1:
        for r in np.flatnonzero(labels[:, -1]):
            a = labels[r, -1]
            for rr in range(max(r - 1, 0), min(r + 2, h)):
                b = labels[rr, 0]
                if b:
                    parent[find(a)] = find(b)
    groups: dict[int, list] = {}
    rows, cols = np.nonzero(labels)
    for r, c in zip(rows, cols):
        groups.setdefault(find(labels[r, c]), []).append((r, c))
    return [np.array(v) for _, v in sorted(groups.items())]


def _bridge(mask: np.ndarray) -> None:
    """Add vertical runs so every pair of neighboring columns (cyclic) touches."""
    h, w = mask.shape
    for j in range(w):
        nj = (j + 1) % w
        a = np.flatnonzero(mask[:, j])
        b = np.flatnonzero(mask[:, nj])
        diff = np.abs(a[:, None] - b[None, :])
        if diff.min() <= 1:
            continue
        ia, ib = np.unravel_index(np.argmin(diff), diff.shape)
        ra, rb = a[ia], b[ib]
        if rb < ra:
            mask[rb:ra, nj] = 1
        else:
            mask[ra + 1: rb + 1, nj] = 1


def rasterize_gt_strip_mask(gt_mask, geom: StripGeometry) -> StripMask:
    """Ground-truth boundary in strip space.

    Nearest-neighbor samples of the HR mask are differenced down each column
    and the row just before every transition is marked. Only the
    8-connected component with the widest column coverage survives (ties go
    to the one whose mean row is closest to the center). Columns left empty
    get a label on the last row if the strip center there is foreground
    (the boundary lies further out) or on row 0 otherwise, and short
    vertical runs are added so the labels form one connected chain.
    """
    gt = np.asarray(gt_mask) != 0
    if not gt.any():
        raise ValueError("empty ground truth")
    h, w = geom.height, geom.width
    sampled = _nearest_sample(gt, geom.coords)
    raw = np.zeros((h, w), dtype=np.uint8)
    raw[:-1][sampled[:-1] != sampled[1:]] = 1

    out = np.zeros((h, w), dtype=np.uint8)
    comps = strip_components(raw)
    if comps:
        def key(c):
            return (-len(np.unique(c[:, 1])), float(np.mean(np.abs(c[:, 0] - h / 2))))
        best = min(comps, key=key)
        out[best[:, 0], best[:, 1]] = 1

    border = ~out.any(axis=0)
    center = sampled[h // 2]
    for j in np.flatnonzero(border):
        out[h - 1 if center[j] else 0, j] = 1
    _bridge(out)
    rows = np.argmax(out, axis=0)
    return StripMask(out, rows, border)


def crop_offset(height: int, new_height: int) -> int:
    if new_height >= height:
        raise ValueError("crop height must be smaller than the strip height")
    if new_height < 1 or new_height % 2 or height % 2:
        raise ValueError("crop heights must be even")
    return (height - new_height) // 2


def crop_strip(strip, new_height: int):
    """Keep the centered ``new_height`` rows.

    Works on raw arrays (rows on axis 0), :class:`StripMask`,
    :class:`StripGeometry` and prediction objects carrying ``x``, ``m``,
    ``s`` arrays. Masks and predictions accumulate ``row_offset``. A mask is
    not re-adapted: a column whose label falls outside the kept rows simply
    ends up empty.
    """
    if isinstance(strip, StripMask):
        off = crop_offset(strip.mask.shape[0], new_height)
        m = strip.mask[off: off + new_height].copy()
        return StripMask(m, np.argmax(m, axis=0), ~m.any(axis=0), strip.row_offset + off)
    if isinstance(strip, StripGeometry):
        off = crop_offset(strip.height, new_height)
        return replace(strip, coords=strip.coords[off: off + new_height].copy())
    if hasattr(strip, "x") and hasattr(strip, "s"):
        off = crop_offset(strip.x.shape[0], new_height)
        sl = slice(off, off + new_height)
        logits = getattr(strip, "logits", None)
        return replace(strip, x=strip.x[sl].copy(), m=strip.m[sl].copy(), s=strip.s[sl].copy(),
                       logits=None if logits is None else logits[sl].copy(),
                       row_offset=strip.row_offset + off)
    arr = np.asarray(strip)
    off = crop_offset(arr.shape[0], new_height)
    return arr[off: off + new_height].copy()


def choose_strip_width(lr_curve_length: float, scale: float, cfg: StripConfig) -> int:
    """LR boundary length times the scale factor, widened by ``width_factor``."""
    if lr_curve_length <= 0 or scale <= 0:
        raise ValueError("length and scale must be positive")
    return max(8, int(math.floor(cfg.width_factor * scale * lr_curve_length + 0.5)))
