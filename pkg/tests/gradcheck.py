"""Finite-difference checks of every loss gradient on one seeded sample."""

import numpy as np

from striprefine.losses import (
    LossConfig, StripPrediction, boundary_distance_loss, c0_loss, dice_loss, matching_loss,
    total_loss, weighted_l1,
)

from conftest import central_diff, rel_err
from oracles import loss_sample

STEP = 1e-4


def _pred(x, s):
    # x and s are treated as independent arrays, matching total_loss's grads
    return StripPrediction(x, np.ones_like(s) / s.shape[0], s)


def gradient_errors(seed, cfg=None):
    cfg = cfg or LossConfig()
    x, s, y, xc = loss_sample(seed, margin=cfg.margin, kernel=cfg.maxpool_kernel)
    out = {}

    _, g = weighted_l1(s, y)
    out["weighted_l1"] = rel_err(g, central_diff(lambda a: weighted_l1(a, y, grad=False)[0], s, STEP))
    _, g = dice_loss(s, y, cfg.epsilon)
    out["dice"] = rel_err(g, central_diff(lambda a: dice_loss(a, y, cfg.epsilon, grad=False)[0], s, STEP))
    _, g = boundary_distance_loss(s, y)
    out["bd"] = rel_err(g, central_diff(lambda a: boundary_distance_loss(a, y, grad=False)[0], s, STEP))

    _, (gx, gxc) = matching_loss(x, xc)
    num_x = central_diff(lambda a: matching_loss(a, xc, grad=False)[0], x, STEP)
    num_xc = central_diff(lambda a: matching_loss(x, a, grad=False)[0], xc, STEP)
    out["matching"] = max(rel_err(gx, num_x), rel_err(gxc, num_xc))

    _, g = c0_loss(s, cfg)
    out["c0"] = rel_err(g, central_diff(lambda a: c0_loss(a, cfg, grad=False)[0], s, STEP))

    pc = _pred(xc, xc)
    _, _, grads = total_loss(_pred(x, s), pc, y, cfg=cfg)
    num_x = central_diff(lambda a: total_loss(_pred(a, s), pc, y, cfg=cfg, grad=False)[0], x, STEP)
    num_s = central_diff(lambda a: total_loss(_pred(x, a), pc, y, cfg=cfg, grad=False)[0], s, STEP)
    num_xc = central_diff(lambda a: total_loss(_pred(x, s), _pred(a, a), y, cfg=cfg, grad=False)[0], xc, STEP)
    out["total"] = max(rel_err(grads["x"], num_x), rel_err(grads["s"], num_s),
                       rel_err(grads["x_cropped"], num_xc))
    return out
