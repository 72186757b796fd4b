"""
Training losses on a toy strip
==============================

The library does not train a network, but it ships every loss with an
analytic gradient so an external trainer can. Here the terms are
evaluated on a noisy prediction and one gradient is checked numerically.
"""

import numpy as np

from striprefine import LossConfig, compose_selection, crop_strip, selection_backward, total_loss

rng = np.random.default_rng(0)
H, W = 16, 48

# a wavy boundary and a prediction that is close but noisy
rows = np.round(H / 2 + 3 * np.sin(np.linspace(0, 2 * np.pi, W, endpoint=False))).astype(int)
y = np.zeros((H, W))
y[rows, np.arange(W)] = 1
x = np.clip(y + rng.normal(0, 0.1, (H, W)), 0, 1)
logits = 4 * x + rng.normal(0, 0.5, (H, W))
pred = compose_selection(x, logits)
# the second pass sees only the centered half of the strip
yc = crop_strip(y, H // 2)
xc = np.clip(yc + rng.normal(0, 0.1, yc.shape), 0, 1)
cropped = compose_selection(xc, 4 * xc)

cfg = LossConfig()
value, parts, grads = total_loss(pred, cropped, y, cfg=cfg)
for k, v in parts.items():
    print(f"{k:12s} {v:10.4f}")

# gradients flow back to the selection logits through the column softmax
gx, glog = selection_backward(pred, grads["s"], grads["x"])
i, j = 5, 7
h = 1e-5
bumped = logits.copy()
bumped[i, j] += h
up = total_loss(compose_selection(x, bumped), cropped, y, cfg=cfg, grad=False)[0]
bumped[i, j] -= 2 * h
down = total_loss(compose_selection(x, bumped), cropped, y, cfg=cfg, grad=False)[0]
print(f"d total / d logit[{i},{j}]: analytic {glog[i, j]:.6f}, numeric {(up - down) / (2 * h):.6f}")
