"""From strip scores back to HR boundaries.

The energy of a strip cell is ``-s - |grad| / max|grad|``; the boundary is
the minimum-energy path that visits one row per column and moves at most
one row between neighboring columns (seam-carving transition). Closed
contours also constrain the step from the last column back to the first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from skimage.draw import line as draw_line
from skimage.measure import points_in_poly

from .geometry import BoundaryCurve, extract_contours, fit_periodic_bspline, scale_curve, translate_curve
from .losses import StripPrediction
from .predictor import NOISE_FLOOR, PredictorSpec, grayscale, predict
from .strip import StripConfig, StripGeometry, choose_strip_width, make_strip

__all__ = [
    "EnergyMap",
    "BoundaryPath",
    "gradient_magnitude",
    "build_energy",
    "min_energy_path",
    "map_path",
    "lr_to_hr",
    "refine_contour",
    "adaptive_refine",
    "refine_mask",
    "fill_paths",
    "crossing_pairs",
    "rasterize_paths",
]


@dataclass(frozen=True)
class EnergyMap:
    values: np.ndarray
    gradient_max: float


@dataclass
class BoundaryPath:
    rows: np.ndarray
    points: np.ndarray
    energy: float
    closed: bool = True
    heights: tuple = ()
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "closed": self.closed,
            "points": np.round(self.points, 6).tolist(),
            "energy": round(float(self.energy), 9),
            "heights": [int(h) for h in self.heights],
        }


def gradient_magnitude(strip) -> np.ndarray:
    """Central-difference gradient norm of the gray strip. Rows use one-sided
    differences at the top and bottom; columns wrap around."""
    g = grayscale(strip)
    gr = np.gradient(g, axis=0)
    gc = 0.5 * (np.roll(g, -1, axis=1) - np.roll(g, 1, axis=1))
    return np.hypot(gr, gc)


def build_energy(pred: StripPrediction, strip) -> EnergyMap:
    s = np.asarray(pred.s, dtype=float)
    if s.shape != np.asarray(strip).shape[:2]:
        raise ValueError("prediction and strip shapes differ")
    g = gradient_magnitude(strip)
    gmax = float(g.max())
    term = g / gmax if gmax > NOISE_FLOOR else np.zeros_like(g)
    return EnergyMap(-s - term, gmax)


def _relax(cost: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Best predecessor among rows r-1, r, r+1 along the last axis.
    Returns ``(best_cost, step)`` with step in {-1, 0, 1}; ties go to the
    smaller row."""
    inf = np.full(cost.shape[:-1] + (1,), np.inf)
    up = np.concatenate([inf, cost[..., :-1]], axis=-1)
    down = np.concatenate([cost[..., 1:], inf], axis=-1)
    cand = np.stack([up, cost, down], axis=0)
    pick = np.argmin(cand, axis=0)
    return np.take_along_axis(cand, pick[None], axis=0)[0], pick - 1


def _dp(e: np.ndarray, start: int | None = None):
    """Row-by-row DP over columns; returns final costs and back-steps."""
    h, w = e.shape
    cost = e[:, 0].copy()
    if start is not None:
        pinned = np.full(h, np.inf)
        pinned[start] = cost[start]
        cost = pinned
    back = np.zeros((w, h), dtype=np.int8)
    for j in range(1, w):
        best, step = _relax(cost)
        cost = e[:, j] + best
        back[j] = step
    return cost, back


def _backtrack(back: np.ndarray, end: int) -> np.ndarray:
    w = back.shape[0]
    rows = np.empty(w, dtype=int)
    rows[-1] = end
    for j in range(w - 1, 0, -1):
        rows[j - 1] = rows[j] + back[j, rows[j]]
    return rows


def min_energy_path(energy, cyclic: bool = True):
    """Exact minimum-energy path, ``(rows, energy)``.

    With ``cyclic`` the last row must also be within one of the first. If
    the unconstrained optimum already closes it is optimal for the closed
    problem too and is returned as is. Otherwise one DP per start row runs
    in a single vectorized sweep and the best closed path wins. Ties go to
    the smaller predecessor row, then the smaller end row, then the smaller
    start row.
    """
    e = np.asarray(energy.values if isinstance(energy, EnergyMap) else energy, dtype=float)
    h, w = e.shape
    if w < 2:
        raise ValueError("need at least two columns")
    cost, back = _dp(e)
    end = int(np.argmin(cost))
    rows = _backtrack(back, end)
    if not cyclic or abs(rows[-1] - rows[0]) <= 1:
        return rows, float(cost[end])

    # state[s, r]: best cost of a path pinned to row s at column 0 ending at r
    state = np.full((h, h), np.inf)
    state[np.arange(h), np.arange(h)] = e[:, 0]
    best = np.empty_like(state)
    for j in range(1, w):
        np.copyto(best, state)
        np.minimum(best[:, 1:], state[:, :-1], out=best[:, 1:])
        np.minimum(best[:, :-1], state[:, 1:], out=best[:, :-1])
        np.add(best, e[:, j], out=state)
    allowed = np.abs(np.arange(h)[:, None] - np.arange(h)[None, :]) <= 1
    closed = np.where(allowed, state, np.inf)
    ends = np.argmin(closed, axis=1)
    totals = closed[np.arange(h), ends]
    start = int(np.argmin(totals))
    cost, back = _dp(e, start)
    # same end choice as in the batched sweep
    lo, hi = max(start - 1, 0), min(start + 2, h)
    end = lo + int(np.argmin(cost[lo:hi]))
    return _backtrack(back, end), float(cost[end])


def map_path(rows, geom: StripGeometry) -> np.ndarray:
    rows = np.asarray(rows, dtype=int)
    if len(rows) != geom.width:
        raise ValueError("path length must equal the strip width")
    return geom.coords[rows, np.arange(geom.width)].copy()


def lr_to_hr(lr_curve: BoundaryCurve, scale: float) -> BoundaryCurve:
    """Scale a curve from LR pixel coordinates to HR ones.

    An LR pixel covers ``scale`` HR pixels, so besides the scaling the
    curve is shifted by ``(scale - 1) / 2`` to keep pixel centers aligned.
    """
    return translate_curve(scale_curve(lr_curve, scale), (scale - 1) / 2.0)


def _strip_stage(image, hr_curve, height, width, spec, cfg):
    strip, geom = make_strip(image, hr_curve, StripConfig(
        height=height, dt=cfg.dt, width_factor=cfg.width_factor,
        floor_dk=cfg.floor_dk, start_offset=cfg.start_offset), width=width)
    pred = predict(strip, spec)
    return strip, geom, pred


def refine_contour(image, lr_curve: BoundaryCurve, scale: float,
                   spec: PredictorSpec | None = None,
                   cfg: StripConfig | None = None) -> BoundaryPath:
    """Refine one LR contour at a fixed strip height."""
    spec = spec or PredictorSpec()
    cfg = cfg or StripConfig()
    hr = lr_to_hr(lr_curve, scale)
    width = cfg.width or choose_strip_width(lr_curve.total_length, scale, cfg)
    strip, geom, pred = _strip_stage(image, hr, cfg.height, width, spec, cfg)
    energy = build_energy(pred, strip)
    rows, total = min_energy_path(energy, cyclic=True)
    return BoundaryPath(rows, map_path(rows, geom), total, True, (cfg.height,),
                        {"width": width, "dk": geom.dk})


def _score_stat(s: np.ndarray, literal_sum: bool) -> float:
    if literal_sum:
        return float(s.sum())
    return float(s.max(axis=0).mean())


def _next_height(h: int, growth: float) -> int:
    n = math.ceil(h * growth)
    return n + (n % 2)


def adaptive_refine(image, lr_curve: BoundaryCurve, scale: float,
                    spec: PredictorSpec | None = None, cfg: StripConfig | None = None,
                    segments: int = 1, growth: float = 1.5,
                    literal_sum: bool = False) -> BoundaryPath:
    """Grow the strip height per contour segment while the score holds up.

    Each segment (an equal share of the columns) tries heights ``H``,
    ``ceil(H * growth)`` (rounded up to even), ... as long as the score
    statistic strictly increases, and never beyond half the smaller image
    side. The statistic is the mean of the column maxima of the final
    scores (``literal_sum`` switches to their plain sum). Each segment keeps
    its last improving height; the segment energies are then embedded,
    centered, in the tallest strip and a single cyclic DP runs over all
    columns so the joins stay connected.
    """
    spec = spec or PredictorSpec()
    cfg = cfg or StripConfig()
    if growth <= 1:
        raise ValueError("growth must be > 1")
    if segments < 1:
        raise ValueError("segments must be >= 1")
    img = np.asarray(image)
    cap = min(img.shape[0], img.shape[1]) / 2
    hr = lr_to_hr(lr_curve, scale)
    width = cfg.width or choose_strip_width(lr_curve.total_length, scale, cfg)
    parts = np.array_split(np.arange(width), segments)

    cache: dict[int, tuple] = {}

    def stage(h):
        if h not in cache:
            strip, geom, pred = _strip_stage(image, hr, h, width, spec, cfg)
            cache[h] = (strip, geom, pred, gradient_magnitude(strip))
        return cache[h]

    chosen = []
    for cols in parts:
        h = cfg.height
        prev = _score_stat(stage(h)[2].s[:, cols], literal_sum)
        tried = [(h, prev)]
        while True:
            nh = _next_height(h, growth)
            if nh > cap:
                break
            stat = _score_stat(stage(nh)[2].s[:, cols], literal_sum)
            tried.append((nh, stat))
            if stat <= prev:
                break
            h, prev = nh, stat
        chosen.append((h, tried))

    top = max(h for h, _ in chosen)
    geom = stage(top)[1]
    energy = np.full((top, width), np.inf)
    for cols, (h, _) in zip(parts, chosen):
        _, _, pred, grad = stage(h)
        g = grad[:, cols]
        gmax = float(g.max())
        term = g / gmax if gmax > NOISE_FLOOR else np.zeros_like(g)
        off = (top - h) // 2
        energy[off: off + h, cols] = -pred.s[:, cols] - term
    rows, total = min_energy_path(energy, cyclic=True)
    return BoundaryPath(rows, map_path(rows, geom), total, True,
                        tuple(h for h, _ in chosen),
                        {"width": width, "dk": geom.dk, "tried": [t for _, t in chosen]})


def refine_mask(image, lr_mask, scale: float, spec: PredictorSpec | None = None,
                cfg: StripConfig | None = None, adaptive: int = 0, growth: float = 1.5,
                min_length: float = 8.0, smoothing: float | None = None) -> list[BoundaryPath]:
    """Refine every contour of an LR mask independently (``adaptive`` is the
    number of segments, 0 for a fixed height)."""
    paths = []
    for contour in extract_contours(lr_mask, min_length):
        curve = fit_periodic_bspline(contour, smoothing, mask=lr_mask)
        if adaptive:
            paths.append(adaptive_refine(image, curve, scale, spec, cfg, adaptive, growth))
        else:
            paths.append(refine_contour(image, curve, scale, spec, cfg))
    return paths


def fill_paths(paths, shape) -> np.ndarray:
    """Even-odd fill of all closed paths together.

    Scanline rule: a pixel is inside when an odd number of polygon edges
    cross its row to the left of its center (edges cover rows half-open
    in y, so vertices are never counted twice).
    """
    h, w = shape
    edges = []
    for p in paths:
        pts = p.points if isinstance(p, BoundaryPath) else np.asarray(p, dtype=float)
        if len(pts) >= 3:
            edges.append(np.stack([pts, np.roll(pts, -1, axis=0)], axis=1))
    out = np.zeros(shape, dtype=bool)
    if not edges:
        return out
    e = np.concatenate(edges)
    (x0, y0), (x1, y1) = e[:, 0].T, e[:, 1].T
    lo = np.ceil(np.minimum(y0, y1)).astype(int)
    hi = np.ceil(np.maximum(y0, y1)).astype(int)
    counts = np.clip(hi - lo, 0, None)
    idx = np.repeat(np.arange(len(e)), counts)
    rows = lo[idx] + (np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts))
    f = (rows - y0[idx]) / (y1[idx] - y0[idx])
    xs = x0[idx] + f * (x1[idx] - x0[idx])
    order = np.lexsort((xs, rows))
    rows, xs = rows[order], xs[order]
    pairs_r = rows[0::2]
    start = np.clip(np.ceil(xs[0::2]).astype(int), 0, w)
    stop = np.clip(np.ceil(xs[1::2]).astype(int), 0, w)
    keep = (pairs_r >= 0) & (pairs_r < h) & (stop > start)
    acc = np.zeros((h, w + 1), dtype=np.int32)
    np.add.at(acc, (pairs_r[keep], start[keep]), 1)
    np.add.at(acc, (pairs_r[keep], stop[keep]), -1)
    return np.cumsum(acc, axis=1)[:, :w] > 0


def crossing_pairs(paths) -> list[tuple[int, int]]:
    """Index pairs of closed paths that cross each other.

    Nested or disjoint contours keep all vertices of one on a single side
    of the other; mixed sides mean the refined outlines intersect and the
    even-odd fill will carve the overlap out.
    """
    polys = [p.points if isinstance(p, BoundaryPath) else np.asarray(p, dtype=float) for p in paths]
    out = []
    for a in range(len(polys)):
        for b in range(a + 1, len(polys)):
            if len(polys[a]) < 3 or len(polys[b]) < 3:
                continue
            inside = points_in_poly(polys[b], polys[a])
            if inside.any() and not inside.all():
                out.append((a, b))
    return out


def rasterize_paths(paths, shape) -> np.ndarray:
    """1-px polyline raster (closing segment included for closed paths)."""
    out = np.zeros(shape, dtype=bool)
    for p in paths:
        pts = p.points if isinstance(p, BoundaryPath) else np.asarray(p)
        closed = p.closed if isinstance(p, BoundaryPath) else True
        if len(pts) == 0:
            continue
        ij = np.rint(pts[:, ::-1]).astype(int)
        seq = np.vstack([ij, ij[:1]]) if closed else ij
        for (r0, c0), (r1, c1) in zip(seq[:-1], seq[1:]):
            rr, cc = draw_line(r0, c0, r1, c1)
            ok = (rr >= 0) & (rr < shape[0]) & (cc >= 0) & (cc < shape[1])
            out[rr[ok], cc[ok]] = True
        if len(seq) == 1:
            r, c = seq[0]
            if 0 <= r < shape[0] and 0 <= c < shape[1]:
                out[r, c] = True
    return out
