"""Independent reference implementations used by the tests.

Nothing here calls into the code under test except to build inputs.
"""

import itertools

import numpy as np

KINK = 1e-3  # samples closer than this to a non-smooth point are redrawn


def brute_force_path(e, cyclic):
    """Exhaustive minimum over every adjacency-feasible path (|step| <= 1)."""
    e = np.asarray(e, dtype=float)
    h, w = e.shape
    if w > 12:
        raise ValueError("brute force is only meant for tiny maps")
    steps = np.array(list(itertools.product((-1, 0, 1), repeat=w - 1)), dtype=int).reshape(-1, w - 1)
    best = np.inf
    best_rows = None
    for r0 in range(h):
        rows = np.concatenate([np.full((len(steps), 1), r0), r0 + np.cumsum(steps, axis=1)], axis=1)
        ok = np.all((rows >= 0) & (rows < h), axis=1)
        if cyclic:
            ok &= np.abs(rows[:, -1] - rows[:, 0]) <= 1
        if not ok.any():
            continue
        rows = rows[ok]
        # left-to-right accumulation, the order a column sweep adds in
        energy = np.cumsum(e[rows, np.arange(w)], axis=1)[:, -1]
        i = int(np.argmin(energy))
        if energy[i] < best:
            best, best_rows = float(energy[i]), rows[i]
    return best, best_rows


def soft_argmax_ref(s):
    """1-based expected row of |s| per column, written out as a loop."""
    h, w = s.shape
    out = np.empty(w)
    for j in range(w):
        col = np.abs(s[:, j])
        out[j] = sum((i + 1) * col[i] for i in range(h)) / col.sum()
    return out


def maxpool_ref(d, kernel):
    r = kernel // 2
    return np.array([max(d[max(0, j - r): j + r + 1]) for j in range(len(d))])


def c0_ref(s, margin, kernel):
    pos = soft_argmax_ref(s)
    w = len(pos)
    d = np.array([max(0.0, abs(pos[j] - pos[(j + 1) % w]) - margin) for j in range(w)])
    return float(maxpool_ref(d, kernel).sum() / w)


def _window_tie(d, kernel):
    r = kernel // 2
    for j in range(len(d)):
        win = d[max(0, j - r): j + r + 1]
        top = win.max()
        if top > 0 and np.count_nonzero(win > top - KINK) > 1:
            return True
    return False


def loss_sample(seed, h=8, w=16, margin=1.0, kernel=11):
    """Seeded ``(x, s, y, xc)`` away from every kink of the losses.

    ``s`` has one dominant row per column so that soft-argmax positions
    spread enough to activate the continuity margin.
    """
    rng = np.random.default_rng(seed)
    while True:
        x = rng.uniform(0.02, 0.98, (h, w))
        s = rng.uniform(0.01, 0.1, (h, w))
        s[rng.integers(0, h, w), np.arange(w)] += rng.uniform(0.5, 0.9, w)
        y = np.zeros((h, w))
        y[rng.integers(0, h, w), np.arange(w)] = 1
        xc = rng.uniform(0.02, 0.98, (h // 2, w))
        pos = soft_argmax_ref(s)
        target = np.argmax(y, axis=0) + 1
        delta = pos - np.roll(pos, -1)
        d = np.maximum(0.0, np.abs(delta) - margin)
        region = x[h // 4: h // 4 + h // 2]
        if (np.abs(pos - target).min() > KINK
                and np.abs(np.abs(delta) - margin).min() > KINK
                and np.abs(xc - region).min() > KINK
                and not _window_tie(d, kernel)):
            return x, s, y, xc


def boundary_f_ref(pred, gt, tol):
    """Precision, recall and F by explicit nearest-pixel search."""
    p_pts, g_pts = np.argwhere(pred), np.argwhere(gt)
    if len(p_pts) == 0 or len(g_pts) == 0:
        return 0.0, 0.0, 0.0
    d = np.sqrt(((p_pts[:, None, :] - g_pts[None, :, :]) ** 2).sum(-1))
    p = float(np.mean(d.min(axis=1) <= tol))
    r = float(np.mean(d.min(axis=0) <= tol))
    return p, r, (2 * p * r / (p + r) if p + r else 0.0)


def boundary_pair(seed, size=48):
    """Two seeded boundary rasters: ragged closed outlines of random blobs."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[:size, :size]
    out = []
    for _ in range(2):
        cx, cy = rng.uniform(size * 0.3, size * 0.7, 2)
        r = rng.uniform(size * 0.15, size * 0.35)
        wobble = rng.uniform(0, 0.3) * np.cos(rng.integers(2, 6) * np.arctan2(yy - cy, xx - cx)
                                              + rng.uniform(0, 2 * np.pi))
        m = np.hypot(xx - cx, yy - cy) <= r * (1 + wobble)
        inner = np.zeros_like(m)
        inner[1:-1, 1:-1] = m[1:-1, 1:-1] & m[:-2, 1:-1] & m[2:, 1:-1] & m[1:-1, :-2] & m[1:-1, 2:]
        out.append(m & ~inner)
    return out[0], out[1]
