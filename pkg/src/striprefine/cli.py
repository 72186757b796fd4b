"""Command-line interface: ``striprefine <command> ...``.

Every command exits 0 on success and 2 on unreadable or inconsistent input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .geometry import curve_to_json, extract_contours, fit_periodic_bspline
from .losses import LossConfig, compose_selection, total_loss
from .metrics import boundary_f, mask_boundary
from .predictor import PredictorSpec, predict
from .reconstruct import (
    BoundaryPath, build_energy, crossing_pairs, fill_paths, lr_to_hr, map_path, min_energy_path,
    rasterize_paths, refine_mask,
)
from .strip import StripConfig, choose_strip_width, crop_strip, make_strip, rasterize_gt_strip_mask
from .synth import KINDS, make_fixture


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    scale: float = 16.0
    strip_height: int = 80
    width_factor: float = 1.5
    predictor: str = "gradient"
    adaptive: str = "off"
    growth: float = 1.5
    seed: int = 0
    tolerances: list = field(default_factory=lambda: [1.0])

    def __post_init__(self):
        if self.scale < 1:
            raise InputError("scale must be >= 1")
        if self.adaptive not in ("off", "1", "2"):
            raise InputError("adaptive must be off, 1 or 2")

    @property
    def strip(self) -> StripConfig:
        return StripConfig(height=self.strip_height, width_factor=self.width_factor)

    @property
    def segments(self) -> int:
        return 0 if self.adaptive == "off" else int(self.adaptive)


def _run_config(args) -> RunConfig:
    return RunConfig(scale=args.scale, strip_height=args.strip_height,
                     width_factor=args.width_factor, predictor=args.predictor,
                     adaptive=args.adaptive, growth=args.growth, seed=args.seed)


def _write_outputs(out_dir: Path, paths: list[BoundaryPath], shape, **extra) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    crossings = crossing_pairs(paths)
    if crossings:
        print(f"warning: refined contours intersect {crossings}; mask filled even-odd", file=sys.stderr)
    io.write_boundary_json(out_dir / "boundary.json", paths,
                           intersections=[list(c) for c in crossings], **extra)
    io.write_mask(out_dir / "boundary.png", rasterize_paths(paths, shape))
    io.write_mask(out_dir / "mask.png", fill_paths(paths, shape))


def _load_pair(image_path, mask_path):
    image = io.read_image(image_path)
    lr = io.read_mask(mask_path)
    if not lr.any():
        raise InputError(f"{mask_path}: mask has no foreground")
    return image, lr


def cmd_synth(args) -> None:
    fx = make_fixture(args.kind, args.size, args.scale, args.radius, args.contrast,
                      args.noise, args.seed, args.lobes)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_image(out / "image.png", fx.image)
    io.write_mask(out / "hr_gt.png", fx.gt)
    io.write_mask(out / "lr_mask.png", fx.lr)
    (out / "params.json").write_text(json.dumps(fx.params, indent=1, sort_keys=True))


def cmd_refine(args) -> None:
    cfg = _run_config(args)
    image, lr = _load_pair(args.image, args.lr_mask)
    spec = PredictorSpec.parse(cfg.predictor)
    paths = refine_mask(image, lr, cfg.scale, spec, cfg.strip, cfg.segments, cfg.growth)
    if not paths:
        raise InputError("no contour long enough to refine")
    _write_outputs(Path(args.out_dir), paths, image.shape[:2],
                   config={k: v for k, v in asdict(cfg).items() if k != "tolerances"})


def cmd_extract_strip(args) -> None:
    cfg = _run_config(args)
    image, lr = _load_pair(args.image, args.lr_mask)
    gt = io.read_mask(args.gt) if args.gt else None
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for n, contour in enumerate(extract_contours(lr)):
        curve = fit_periodic_bspline(contour, mask=lr)
        width = choose_strip_width(curve.total_length, cfg.scale, cfg.strip)
        strip, geom = make_strip(image, lr_to_hr(curve, cfg.scale), cfg.strip, width=width)
        smask = rasterize_gt_strip_mask(gt, geom) if gt is not None else None
        io.write_strip_bundle(out / f"contour{n}", strip, geom, smask,
                              image_shape=list(image.shape[:2]), scale=cfg.scale,
                              lr_curve=json.loads(curve_to_json(curve)))


def cmd_reconstruct(args) -> None:
    paths = []
    shape = None
    scores = args.scores or []
    if scores and len(scores) != len(args.bundles):
        raise InputError("give one score bundle per strip bundle")
    for n, bpath in enumerate(args.bundles):
        bundle = io.read_strip_bundle(bpath)
        shape = tuple(bundle.header.get("image_shape", shape or (0, 0)))
        spec = (PredictorSpec(kind="external", score_path=scores[n]) if scores
                else PredictorSpec.parse(args.predictor))
        pred = predict(bundle.image, spec)
        rows, energy = min_energy_path(build_energy(pred, bundle.image), cyclic=True)
        paths.append(BoundaryPath(rows, map_path(rows, bundle.geometry), energy, True,
                                  (bundle.geometry.height,)))
    if not shape or min(shape) < 1:
        raise InputError("bundle header lacks image_shape")
    _write_outputs(Path(args.out_dir), paths, shape)


def cmd_overlay(args) -> None:
    image = io.read_image(args.image)
    paths = io.read_boundary_json(args.boundary)
    out = (np.clip(np.rint(image * 255), 0, 255)).astype(np.uint8)
    drawn = rasterize_paths(paths, image.shape[:2])
    out[drawn] = (255, 0, 0)
    io.write_image(args.out, out)


def _boundary_input(path, from_masks: bool) -> np.ndarray:
    m = io.read_mask(path)
    return mask_boundary(m) if from_masks else m


def cmd_evaluate(args) -> None:
    tols = args.tolerance or [1.0]
    pred, gt = Path(args.pred), Path(args.gt)
    if pred.is_dir() != gt.is_dir():
        raise InputError("pred and gt must both be files or both be directories")
    if not pred.is_dir():
        pb, gb = _boundary_input(pred, args.masks), _boundary_input(gt, args.masks)
        if pb.shape != gb.shape:
            raise InputError("pred and gt sizes differ")
        evals = [boundary_f(pb, gb, t, args.normalize_width).to_dict() for t in tols]
        print(json.dumps(evals[0] if len(evals) == 1 else evals, indent=1))
        return

    names = sorted(p.name for p in pred.glob("*.png") if (gt / p.name).exists())
    if not names:
        raise InputError("no matching PNG names in the two directories")
    rows = []
    for name in names:
        pb, gb = _boundary_input(pred / name, args.masks), _boundary_input(gt / name, args.masks)
        if pb.shape != gb.shape:
            raise InputError(f"{name}: pred and gt sizes differ")
        for t in tols:
            e = boundary_f(pb, gb, t, args.normalize_width)
            rows.append([name, t, e.precision, e.recall, e.f_score, e.mean_distance])
    for t in tols:
        sel = [r for r in rows if r[1] == t]
        rows.append(["mean", t] + [float(np.mean([r[i] for r in sel])) for i in range(2, 6)])
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["file", "tolerance", "precision", "recall", "f_score", "mean_distance"])
        w.writerows(rows)
    finally:
        if args.out:
            fh.close()


def _prediction_from_scores(path):
    arr, _ = io.read_score_bundle(path)
    x = arr[..., 0].astype(float)
    logits = arr[..., 1].astype(float) if arr.shape[2] > 1 else 10.0 * x
    return compose_selection(x, logits)


def cmd_losses(args) -> None:
    cfg = LossConfig(lambda1=args.lambda1, lambda2=args.lambda2, lambda3=args.lambda3,
                     margin=args.margin, maxpool_kernel=args.kernel)
    pred = _prediction_from_scores(args.prediction)
    gt = io.read_strip_bundle(args.ground_truth)
    if gt.mask is None:
        raise InputError("ground-truth bundle carries no strip mask")
    if gt.mask.shape != pred.s.shape:
        raise InputError("score map shape mismatch")
    h = pred.s.shape[0]
    crop_h = int(round(h * cfg.crop_fraction))
    crop_h -= crop_h % 2
    if args.cropped:
        cropped = _prediction_from_scores(args.cropped)
    else:
        # no second prediction available: compare x with its own crop
        cropped = crop_strip(pred, crop_h)
    value, breakdown, _ = total_loss(pred, cropped, gt.mask, None, cfg)
    print(json.dumps(breakdown, indent=1, sort_keys=True))


def _add_run_flags(p) -> None:
    p.add_argument("--scale", type=float, default=16.0)
    p.add_argument("--strip-height", type=int, default=80)
    p.add_argument("--width-factor", type=float, default=1.5)
    p.add_argument("--predictor", default="gradient",
                   help="gradient, gradient:RADIUS or external:SCORE_BUNDLE")
    p.add_argument("--adaptive", choices=["off", "1", "2"], default="off")
    p.add_argument("--growth", type=float, default=1.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="striprefine",
                                 description="Strip-based HR boundary refinement from LR masks.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="render a synthetic fixture")
    p.add_argument("--kind", choices=KINDS, default="disk")
    p.add_argument("--size", type=int, default=1024)
    p.add_argument("--scale", type=int, default=16)
    p.add_argument("--radius", type=float, default=300.0)
    p.add_argument("--contrast", type=float, default=0.6)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--lobes", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("refine", help="refine every contour of an LR mask")
    p.add_argument("image")
    p.add_argument("lr_mask")
    _add_run_flags(p)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("extract-strip", help="write one strip bundle per contour")
    p.add_argument("image")
    p.add_argument("lr_mask")
    p.add_argument("--gt", help="HR ground-truth mask; adds the strip mask to each bundle")
    _add_run_flags(p)
    p.set_defaults(func=cmd_extract_strip)

    p = sub.add_parser("reconstruct", help="boundary from strip bundles (+ external scores)")
    p.add_argument("bundles", nargs="+")
    p.add_argument("--scores", nargs="+", help="score bundles, one per strip bundle")
    p.add_argument("--predictor", default="gradient")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("overlay", help="draw a boundary JSON over an image")
    p.add_argument("image")
    p.add_argument("boundary")
    p.add_argument("out")
    p.set_defaults(func=cmd_overlay)

    p = sub.add_parser("evaluate", help="boundary F-score (files or directories)")
    p.add_argument("pred")
    p.add_argument("gt")
    p.add_argument("--tolerance", type=float, action="append")
    p.add_argument("--masks", action="store_true", help="inputs are filled masks, not boundaries")
    p.add_argument("--normalize-width", action="store_true")
    p.add_argument("--out", help="CSV path for directory mode (default stdout)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("losses", help="loss report for a score bundle against a GT strip bundle")
    p.add_argument("prediction")
    p.add_argument("ground_truth")
    p.add_argument("--cropped", help="score bundle predicted on the cropped strip")
    p.add_argument("--lambda1", type=float, default=0.1)
    p.add_argument("--lambda2", type=float, default=20.0)
    p.add_argument("--lambda3", type=float, default=1.0)
    p.add_argument("--margin", type=float, default=1.0)
    p.add_argument("--kernel", type=int, default=11)
    p.set_defaults(func=cmd_losses)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (InputError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
