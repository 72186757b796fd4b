"""
Unrolling a boundary into a strip image
=======================================

A coarse mask gives a rough closed boundary. Sampling the HR image along
the normals of that boundary turns the thin band around it into a
rectangle: columns walk along the curve, rows step across it.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from striprefine import (
    StripConfig, choose_strip_width, extract_contours, fit_periodic_bspline, lr_to_hr,
    make_fixture, make_strip, rasterize_gt_strip_mask,
)

OUT = Path(__file__).with_name("output")
OUT.mkdir(exist_ok=True)

# a star shaped object, rendered at 512 px and seen through an 8x smaller mask
fx = make_fixture("star", size=512, scale=8, radius=150, lobes=5)
print("HR image", fx.image.shape, "LR mask", fx.lr.shape)

# %%
# The LR contour becomes a smooth periodic spline, then moves to HR pixels.
curve = fit_periodic_bspline(extract_contours(fx.lr)[0], mask=fx.lr)
hr_curve = lr_to_hr(curve, fx.scale)
cfg = StripConfig(height=60)
width = choose_strip_width(curve.total_length, fx.scale, cfg)
strip, geom = make_strip(fx.image, hr_curve, cfg, width=width)
print(f"strip {strip.shape}, arclength step {geom.dk:.3f} px")

# %%
# The HR ground truth seen through the same geometry: one boundary row per
# column, kept as a single connected chain.
y = rasterize_gt_strip_mask(fx.gt, geom)
print("boundary rows span", y.rows.min(), "to", y.rows.max())

fig, ax = plt.subplots(3, 1, figsize=(10, 6))
ax[0].imshow(fx.image)
ax[0].plot(*geom.coords[0].T, "c-", lw=0.5)
ax[0].plot(*geom.coords[-1].T, "c-", lw=0.5)
ax[0].set_title("band sampled around the LR boundary")
ax[1].imshow(strip[:, :1000], aspect="auto")
ax[1].set_title("strip image (first 1000 columns)")
ax[2].imshow(y.mask[:, :1000], aspect="auto", cmap="gray")
ax[2].set_title("ground-truth boundary in strip space")
for a in ax:
    a.axis("off")
fig.tight_layout()
fig.savefig(OUT / "01_strip_image.png", dpi=120)
