"""File formats: PNG images/masks, strip bundles, score bundles, boundary JSON.

A bundle is a JSON header next to raw little-endian arrays, row-major and
channel-interleaved:

* ``<stem>.image.f32``: strip image, ``H x W x C`` float32
* ``<stem>.geom.f32``: cell coordinates, ``H x W x 2`` float32 ``(x, y)``
* ``<stem>.mask.u8``: optional GT strip mask, ``H x W`` uint8
* ``<stem>.score.f32``: score maps (``role: "score"``), ``H x W x C``
  float32 with channels ``x`` and optionally ``logits``
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .reconstruct import BoundaryPath
from .strip import StripGeometry, StripMask

__all__ = [
    "read_image",
    "read_mask",
    "write_mask",
    "write_image",
    "StripBundle",
    "write_strip_bundle",
    "read_strip_bundle",
    "write_score_bundle",
    "read_score_bundle",
    "write_boundary_json",
    "read_boundary_json",
]

FORMAT = "striprefine-bundle/1"
CONVENTIONS = {
    "row": "t = (i - H/2) * dt, positive t toward the background side",
    "col": "k = start_offset + j * dk (arclength along the curve)",
    "layout": "row-major, channel-interleaved, little-endian",
}


def read_image(path) -> np.ndarray:
    """RGB float image in [0, 1], shape ``(H, W, 3)``."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=float) / 255.0


def read_mask(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("L")) != 0


def write_mask(path, mask) -> None:
    Image.fromarray((np.asarray(mask) != 0).astype(np.uint8) * 255, mode="L").save(path)


def write_image(path, image) -> None:
    arr = np.asarray(image)
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(arr).save(path)


@dataclass
class StripBundle:
    image: np.ndarray
    geometry: StripGeometry
    mask: np.ndarray | None
    header: dict


def _stem(path) -> Path:
    p = Path(path)
    return p.with_suffix("") if p.suffix == ".json" else p


def _write_raw(path: Path, arr: np.ndarray, dtype: str) -> None:
    path.write_bytes(np.ascontiguousarray(arr, dtype=np.dtype(dtype).newbyteorder("<")).tobytes())


def _read_raw(path: Path, dtype: str, shape) -> np.ndarray:
    dt = np.dtype(dtype).newbyteorder("<")
    data = path.read_bytes()
    expected = int(np.prod(shape)) * dt.itemsize
    if len(data) != expected:
        raise ValueError(f"corrupt bundle: {path.name} has {len(data)} bytes, expected {expected}")
    return np.frombuffer(data, dtype=dt).reshape(shape).astype(dtype)


def _read_header(path, role: str) -> tuple[dict, Path]:
    stem = _stem(path)
    header_path = stem.with_suffix(".json")
    try:
        header = json.loads(header_path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"corrupt bundle header {header_path}: {exc}") from None
    if not isinstance(header, dict) or header.get("format") != FORMAT:
        raise ValueError(f"corrupt bundle header {header_path}: unknown format")
    if header.get("role") != role:
        raise ValueError(f"{header_path} has role {header.get('role')!r}, expected {role!r}")
    for key in ("H", "W", "files"):
        if key not in header:
            raise ValueError(f"corrupt bundle header {header_path}: missing {key!r}")
    return header, header_path.parent


def write_strip_bundle(path, strip, geom: StripGeometry, mask=None, **extra) -> Path:
    """Write a strip bundle; ``path`` is the stem or the header ``.json``.
    Extra keyword arguments land in the header. Returns the header path."""
    stem = _stem(path)
    stem.parent.mkdir(parents=True, exist_ok=True)
    img = np.asarray(strip, dtype=np.float32)
    if img.ndim == 2:
        img = img[..., None]
    h, w, c = img.shape
    files = {"image": stem.name + ".image.f32", "geometry": stem.name + ".geom.f32", "mask": None}
    _write_raw(stem.parent / files["image"], img, "f4")
    _write_raw(stem.parent / files["geometry"], geom.coords, "f4")
    if mask is not None:
        m = mask.mask if isinstance(mask, StripMask) else np.asarray(mask)
        files["mask"] = stem.name + ".mask.u8"
        _write_raw(stem.parent / files["mask"], (m != 0).astype(np.uint8), "u1")
    header = {
        "format": FORMAT, "role": "strip", "H": h, "W": w, "channels": c,
        "dk": geom.dk, "dt": geom.dt, "curve_id": geom.curve_id,
        "start_offset": geom.start_offset, "conventions": CONVENTIONS, "files": files,
    }
    header.update(extra)
    out = stem.with_suffix(".json")
    out.write_text(json.dumps(header, indent=2, sort_keys=True))
    return out


def read_strip_bundle(path) -> StripBundle:
    header, root = _read_header(path, "strip")
    h, w = int(header["H"]), int(header["W"])
    c = int(header.get("channels", 3))
    files = header["files"]
    try:
        image = _read_raw(root / files["image"], "f4", (h, w, c))
        coords = _read_raw(root / files["geometry"], "f4", (h, w, 2)).astype(float)
        dk, dt = float(header["dk"]), float(header["dt"])
    except KeyError as exc:
        raise ValueError(f"corrupt bundle header: missing {exc}") from None
    mask = None
    if files.get("mask"):
        mask = _read_raw(root / files["mask"], "u1", (h, w))
    if c == 1:
        image = image[..., 0]
    geom = StripGeometry(coords, dk, dt, str(header.get("curve_id", "")),
                         float(header.get("start_offset", 0.0)))
    return StripBundle(image, geom, mask, header)


def write_score_bundle(path, x, logits=None, **extra) -> Path:
    stem = _stem(path)
    stem.parent.mkdir(parents=True, exist_ok=True)
    chans = [np.asarray(x, dtype=np.float32)]
    names = ["x"]
    if logits is not None:
        chans.append(np.asarray(logits, dtype=np.float32))
        names.append("logits")
    arr = np.stack(chans, axis=-1)
    h, w, c = arr.shape
    files = {"score": stem.name + ".score.f32"}
    _write_raw(stem.parent / files["score"], arr, "f4")
    header = {"format": FORMAT, "role": "score", "H": h, "W": w, "channels": c,
              "channel_names": names, "conventions": CONVENTIONS, "files": files}
    header.update(extra)
    out = stem.with_suffix(".json")
    out.write_text(json.dumps(header, indent=2, sort_keys=True))
    return out


def read_score_bundle(path) -> tuple[np.ndarray, dict]:
    """Returns the ``(H, W, C)`` float32 score array and the header."""
    header, root = _read_header(path, "score")
    c = int(header.get("channels", 1))
    if c not in (1, 2):
        raise ValueError("score bundles carry 1 or 2 channels")
    arr = _read_raw(root / header["files"]["score"], "f4", (int(header["H"]), int(header["W"]), c))
    return arr, header


def write_boundary_json(path, paths, **extra) -> None:
    doc = {"contours": [p.to_dict() for p in paths]}
    for p, d in zip(paths, doc["contours"]):
        d["rows"] = [int(r) for r in p.rows]
    doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True))


def read_boundary_json(path) -> list[BoundaryPath]:
    """Accepts ``{"contours": [...]}`` or a single ``{closed, points, energy}``."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"bad boundary JSON {path}: {exc}") from None
    items = doc.get("contours", [doc]) if isinstance(doc, dict) else None
    if items is None:
        raise ValueError(f"bad boundary JSON {path}")
    out = []
    for d in items:
        try:
            pts = np.asarray(d["points"], dtype=float).reshape(-1, 2)
            out.append(BoundaryPath(np.asarray(d.get("rows", []), dtype=int), pts,
                                    float(d.get("energy", 0.0)), bool(d.get("closed", True)),
                                    tuple(d.get("heights", ()))))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"bad boundary JSON {path}: {exc}") from None
    return out
