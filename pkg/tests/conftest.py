import numpy as np
import pytest

from striprefine.geometry import fit_periodic_bspline
from striprefine.synth import circle_contour, make_fixture


def central_diff(f, arr, step=1e-4):
    """Central finite-difference gradient of scalar ``f`` at ``arr``."""
    arr = np.array(arr, dtype=float)
    g = np.zeros_like(arr)
    for idx in np.ndindex(arr.shape):
        orig = arr[idx]
        arr[idx] = orig + step
        hi = f(arr)
        arr[idx] = orig - step
        lo = f(arr)
        arr[idx] = orig
        g[idx] = (hi - lo) / (2 * step)
    return g


def rel_err(analytic, numeric):
    scale = max(np.abs(numeric).max(), 1e-12)
    return float(np.abs(analytic - numeric).max() / scale)


def disk_mask(size, center, radius):
    yy, xx = np.mgrid[:size, :size]
    return np.hypot(xx - center[0], yy - center[1]) <= radius


def circle_curve(center, radius, n=256):
    return fit_periodic_bspline(circle_contour(center, radius, n), smoothing=0)


@pytest.fixture(scope="session")
def disk_fixture():
    return make_fixture("disk", 1024, 16, 300.0, 0.6, 0.0)


def lr_prior_curve(fx):
    """The undisplaced disk as an exact circle in LR pixel coordinates."""
    p = fx.params
    off = (fx.scale - 1) / 2
    c = (p["center"] - off) / fx.scale
    return fit_periodic_bspline(circle_contour((c, c), p["radius"] / fx.scale, 128), smoothing=0)


def circle_distance(points, center, radius):
    return np.abs(np.hypot(points[:, 0] - center, points[:, 1] - center) - radius)


@pytest.fixture(scope="session")
def shifted_fixture():
    # true boundary 60 px = 1.5 * H/2 outside the LR boundary
    return make_fixture("disk", 1024, 16, 300.0, 0.6, 0.0, displacement=60, lr_from_prior=True)


@pytest.fixture(scope="session")
def near_fixture():
    # true boundary 32 px = 0.8 * H/2 outside the LR boundary
    return make_fixture("disk", 1024, 16, 300.0, 0.6, 0.0, displacement=32, lr_from_prior=True)


@pytest.fixture(scope="session")
def half_fixture():
    # only the x >= center half is displaced by 60 px
    return make_fixture("disk", 1024, 16, 300.0, 0.6, 0.0, displacement=60, half=True,
                        lr_from_prior=True)
