"""
Plugging in an external scorer
==============================

Strips leave the library as bundles (a JSON header next to raw arrays)
and score maps come back the same way. Here the "model" is a blurred copy
of the ground-truth strip mask.
"""

import tempfile
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter1d

from striprefine import (
    PredictorSpec, build_energy, extract_contours, fit_periodic_bspline, lr_to_hr,
    make_fixture, make_strip, map_path, min_energy_path, predict, rasterize_gt_strip_mask,
)
from striprefine.io import read_strip_bundle, write_score_bundle, write_strip_bundle
from striprefine.strip import StripConfig, choose_strip_width

fx = make_fixture("ellipse", size=512, scale=8, radius=180)
curve = fit_periodic_bspline(extract_contours(fx.lr)[0], mask=fx.lr)
cfg = StripConfig(height=40)
strip, geom = make_strip(fx.image, lr_to_hr(curve, 8), cfg,
                         width=choose_strip_width(curve.total_length, 8, cfg))

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    header = write_strip_bundle(tmp / "strip", strip, geom, rasterize_gt_strip_mask(fx.gt, geom))
    print("wrote", sorted(p.name for p in tmp.iterdir()))

    # what a trained model would do: read the bundle, write scores
    bundle = read_strip_bundle(header)
    scores = gaussian_filter1d(bundle.mask.astype(float), 1.5, axis=0)
    write_score_bundle(tmp / "scores", scores / scores.max(axis=0))

    pred = predict(strip, PredictorSpec(kind="external", score_path=str(tmp / "scores")))
    rows, energy = min_energy_path(build_energy(pred, strip))

pts = map_path(rows, geom)
a, b = 180, 0.7 * 180
err = np.abs(((pts[:, 0] - 256) / a) ** 2 + ((pts[:, 1] - 256) / b) ** 2 - 1)
print(f"path energy {energy:.2f}, mean implicit-ellipse residual {err.mean():.4f}")
