"""
Growing the strip when the boundary is out of reach
===================================================

When the LR mask is off by more than half a strip height, the true edge
never enters the strip. Regenerating taller strips while the score
statistic keeps rising finds it again. Splitting the contour into two
segments lets only the misplaced half grow.
"""

import numpy as np

from striprefine import (
    adaptive_refine, boundary_f, circle_contour, fit_periodic_bspline, make_fixture,
    mask_boundary, rasterize_paths, refine_contour,
)

# the right half of the disk is 60 px bigger than the mask says
fx = make_fixture("disk", size=1024, scale=16, radius=300, displacement=60, half=True,
                  lr_from_prior=True)
c = (512 - 7.5) / 16
curve = fit_periodic_bspline(circle_contour((c, c), 300 / 16, 128), smoothing=0)
gt_b = mask_boundary(fx.gt)


def score(path):
    return boundary_f(rasterize_paths([path], gt_b.shape), gt_b, 1).f_score


fixed = refine_contour(fx.image, curve, 16)
print(f"fixed H=80      F={score(fixed):.3f}")

for segments in (1, 2):
    path = adaptive_refine(fx.image, curve, 16, segments=segments, growth=1.5)
    print(f"adaptive x{segments}    F={score(path):.3f}  heights {path.heights}")
    for n, tried in enumerate(path.info["tried"]):
        steps = ", ".join(f"{h}:{s:.3f}" for h, s in tried)
        print(f"   segment {n}: {steps}")
