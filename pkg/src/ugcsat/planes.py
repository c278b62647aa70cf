"""Single-channel image planes: validation, I/O, luma conversion and metrics.

A plane is a 2-D ``float64`` array of intensities on the ``[0, 255]`` scale,
indexed ``[row, col]``.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

BT601 = (0.299, 0.587, 0.114)


def as_plane(a) -> np.ndarray:
    """Return ``a`` as a validated float64 plane."""
    p = np.asarray(a, dtype=np.float64)
    if p.ndim != 2 or p.size == 0:
        raise ValueError(f"plane must be a non-empty 2-D array, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("plane contains non-finite samples")
    return p


def to_uint8(p) -> np.ndarray:
    return np.clip(np.rint(p), 0, 255).astype(np.uint8)


def luma(a) -> np.ndarray:
    """Convert grayscale or RGB(A) samples to a BT.601 luma plane."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 2:
        return as_plane(a)
    if a.ndim == 3 and a.shape[2] in (3, 4):
        w = np.asarray(BT601)
        return as_plane(a[..., :3] @ w)
    raise ValueError(f"unsupported sample layout {a.shape}")


def read_plane(path) -> np.ndarray:
    """Read an 8-bit image file as a luma plane."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.mode in ("L", "RGB", "RGBA"):
                a = np.asarray(im)
            elif im.mode in ("I;16", "I", "F"):
                raise ValueError(f"{path}: only 8-bit images are supported")
            else:
                a = np.asarray(im.convert("RGB"))
    except OSError as exc:
        raise ValueError(f"cannot read image {path}: {exc}") from exc
    return luma(a)


def write_plane(path, p) -> None:
    """Write a plane as an 8-bit grayscale image (format from the suffix)."""
    Image.fromarray(to_uint8(p), mode="L").save(path)


def mse(a, b) -> float:
    a, b = as_plane(a), as_plane(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr(ref, test, peak=255.0) -> float:
    e = mse(ref, test)
    if e == 0:
        return float("inf")
    return float(10.0 * np.log10(peak**2 / e))


def natural_image(shape=(256, 256), seed=0) -> np.ndarray:
    """Generate a piecewise-smooth test plane with edges and mild texture.

    Mixes a smooth illumination gradient, random ellipses and rectangles with
    soft edges, and low-amplitude band-limited texture, so that it has the
    sparse-gradient statistics wavelet denoisers are designed for.
    """
    rng = np.random.default_rng(seed)
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w] / max(h, w)
    a, b, c = rng.uniform(-60, 60, 3)
    img = 128 + a * (xx - 0.5) + b * (yy - 0.5) + c * (xx - 0.5) * (yy - 0.5)

    for _ in range(12):
        cy, cx = rng.uniform(0, 1, 2) * (h / max(h, w), w / max(h, w))
        ry, rx = rng.uniform(0.04, 0.25, 2)
        level = rng.uniform(-70, 70)
        if rng.random() < 0.5:
            mask = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1
        else:
            mask = (np.abs(yy - cy) <= ry) & (np.abs(xx - cx) <= rx)
        img += level * ndimage.gaussian_filter(mask.astype(float), 0.8)

    texture = ndimage.gaussian_filter(rng.normal(size=shape), 2.0)
    img += 6.0 * texture / texture.std()
    return np.clip(img, 0, 255)
