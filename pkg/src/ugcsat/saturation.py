"""Block-level saturation detection with a denoised reference.

For every quality value of a sweep and every ``k x k`` block, the decoded
block is compared with the UGC block ``u`` and with the denoised block ``z``.
A block is saturated at a quality value when the decoded block is at least
as close to ``u`` as to ``z``: past that point extra bits mostly reproduce
what the denoiser considers noise.  The saturation quality value of a block
is the start of the trailing run of saturated quality values; frame and clip
values are medians snapped to the quality grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codec import QualityGrid, QualitySweep
from .planes import as_plane


@dataclass(frozen=True)
class BlockGrid:
    """Tiling of a plane into complete ``k x k`` blocks; partial edge blocks are dropped."""

    rows: int
    cols: int
    k: int = 8

    @classmethod
    def for_shape(cls, shape, k: int = 8) -> "BlockGrid":
        if k < 1:
            raise ValueError("block size must be positive")
        h, w = shape
        grid = cls(h // k, w // k, k)
        if grid.count < 1:
            raise ValueError(f"a {h}x{w} plane holds no complete {k}x{k} block")
        return grid

    @property
    def count(self) -> int:
        return self.rows * self.cols

    def rect(self, i: int):
        """Pixel rectangle ``(row0, col0, row1, col1)`` of block ``i`` (row-major order)."""
        r, c = divmod(i, self.cols)
        k = self.k
        return r * k, c * k, (r + 1) * k, (c + 1) * k

    def blocks(self, p) -> np.ndarray:
        """View of a plane as ``(count, k, k)`` blocks."""
        k = self.k
        a = p[: self.rows * k, : self.cols * k]
        return a.reshape(self.rows, k, self.cols, k).transpose(0, 2, 1, 3).reshape(-1, k, k)


def _pair(a, b):
    a, b = as_plane(a), as_plane(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return a, b


def block_mse(a, b, grid: BlockGrid | None = None) -> np.ndarray:
    """Per-block MSE between two planes, in block order."""
    a, b = _pair(a, b)
    if grid is None:
        grid = BlockGrid.for_shape(a.shape)
    d = grid.blocks(a - b)
    return np.mean(d * d, axis=(1, 2))


def mse_iqr(e) -> float:
    """Interquartile range of block MSE values (linear-interpolation quartiles)."""
    e = np.asarray(e, dtype=float)
    if e.ndim != 1 or e.size < 4:
        raise ValueError("MSE-IQR needs at least 4 block values")
    q1, q3 = np.quantile(e, [0.25, 0.75], method="linear")
    return float(max(q3 - q1, 0.0))


def saturation_indicator(u_hat, u, z) -> int:
    """1 when ``||u_hat - u|| <= ||u_hat - z||``, else 0."""
    u_hat, u, z = (np.asarray(v, dtype=float) for v in (u_hat, u, z))
    if not u_hat.shape == u.shape == z.shape:
        raise ValueError(f"block shapes differ: {u_hat.shape}, {u.shape}, {z.shape}")
    return int(np.sum((u_hat - u) ** 2) <= np.sum((u_hat - z) ** 2))


def noise_region_membership(u_hat, u, ref) -> int:
    """1 when ``u_hat`` is strictly farther from ``ref`` than from ``u``.

    With ``ref`` the pristine plane this tests membership of the noise
    encoding region; with a denoised plane, of its empirical counterpart.
    """
    u_hat, u = _pair(u_hat, u)
    ref = as_plane(ref)
    if ref.shape != u.shape:
        raise ValueError(f"shape mismatch {ref.shape} vs {u.shape}")
    return int(np.sum((u_hat - ref) ** 2) > np.sum((u_hat - u) ** 2))


def block_qv_star(delta_row, grid: QualityGrid = QualityGrid()) -> int:
    """First quality value of the trailing all-ones run of ``delta_row``.

    A row with no trailing one (the block never saturates) maps to the
    largest grid value.
    """
    d = np.asarray(delta_row).astype(bool)
    values = grid.values
    if d.shape != (len(values),):
        raise ValueError(f"delta row has length {d.size}, grid has {len(values)}")
    if not d[-1]:
        return values[-1]
    zeros = np.flatnonzero(~d)
    n_star = zeros[-1] + 1 if zeros.size else 0
    return values[n_star]


def snap_median(values, grid: QualityGrid) -> int:
    """Median snapped to the grid.

    Even counts average the two central values; the result is moved to the
    nearest grid value, ties going to the lower one.
    """
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValueError("median of an empty set")
    m = v.size // 2
    med = v[m] if v.size % 2 else 0.5 * (v[m - 1] + v[m])
    g = np.asarray(grid.values, dtype=float)
    dist = np.abs(g - med)
    return int(g[np.flatnonzero(dist == dist.min())[0]])


def block_qv_stars(delta: np.ndarray, grid: QualityGrid) -> np.ndarray:
    """Vectorised :func:`block_qv_star` over a ``(n_qv, n_blocks)`` delta matrix."""
    d = np.asarray(delta, dtype=bool)
    n = d.shape[0]
    # index of the last zero per block, -1 when none
    rev_first_zero = np.argmax(~d[::-1], axis=0)
    has_zero = (~d).any(axis=0)
    last_zero = np.where(has_zero, n - 1 - rev_first_zero, -1)
    n_star = np.minimum(last_zero + 1, n - 1)
    return np.asarray(grid.values)[n_star]


@dataclass
class FrameSaturation:
    """Saturation analysis of one frame.

    ``mse_vs_ugc`` and ``mse_vs_denoised`` are ``(n_qv, n_blocks)`` block MSE
    tables; ``delta`` has the same shape.  ``iqr_vs_pristine`` is filled only
    when a pristine plane is supplied.
    """

    frame_index: int
    qvs: list
    bpp: np.ndarray
    mse_vs_ugc: np.ndarray
    mse_vs_denoised: np.ndarray
    delta: np.ndarray
    qv_star_block: np.ndarray
    qv_star_frame: int
    iqr_vs_ugc: np.ndarray
    iqr_vs_denoised: np.ndarray
    iqr_vs_pristine: np.ndarray | None = None
    block_grid: BlockGrid | None = None


@dataclass
class SaturationResult:
    frames: list
    qv_star_clip: int
    grid: QualityGrid = field(default_factory=QualityGrid)

    @property
    def qv_star_frame(self):
        return [f.qv_star_frame for f in self.frames]

    @property
    def delta(self):
        return np.stack([f.delta for f in self.frames])


def _iqr_curve(table):
    return np.array([mse_iqr(row) for row in table]) if table.shape[1] >= 4 else np.full(
        table.shape[0], np.nan
    )


def analyze_frame(
    u, z, sweep: QualitySweep, k: int = 8, grid: QualityGrid | None = None,
    frame_index: int = 0, pristine=None,
) -> FrameSaturation:
    """Saturation indicators and QV* for one frame.

    MSE-IQR curves need at least four blocks and are NaN otherwise.
    """
    u, z = _pair(u, z)
    if grid is None:
        grid = QualityGrid(tuple(sweep.qvs))
    if tuple(sweep.qvs) != grid.values:
        raise ValueError("sweep quality values do not match the grid")
    bg = BlockGrid.for_shape(u.shape, k)
    for dec in sweep.decoded:
        if dec.shape != u.shape:
            raise ValueError(f"decoded shape {dec.shape} differs from {u.shape}")
    e_u = np.stack([block_mse(dec, u, bg) for dec in sweep.decoded])
    e_z = np.stack([block_mse(dec, z, bg) for dec in sweep.decoded])
    delta = (e_u <= e_z).astype(np.uint8)
    stars = block_qv_stars(delta, grid)
    iqr_x = None
    if pristine is not None:
        x = as_plane(pristine)
        iqr_x = _iqr_curve(np.stack([block_mse(dec, x, bg) for dec in sweep.decoded]))
    return FrameSaturation(
        frame_index=frame_index,
        qvs=list(grid.values),
        bpp=sweep.bpp,
        mse_vs_ugc=e_u,
        mse_vs_denoised=e_z,
        delta=delta,
        qv_star_block=stars,
        qv_star_frame=snap_median(stars, grid),
        iqr_vs_ugc=_iqr_curve(e_u),
        iqr_vs_denoised=_iqr_curve(e_z),
        iqr_vs_pristine=iqr_x,
        block_grid=bg,
    )


def analyze_clip(frames, k: int = 8, grid: QualityGrid | None = None) -> SaturationResult:
    """Analyse a clip given ``(u, z, sweep)`` triples, or pre-computed frame results."""
    frames = list(frames)
    if not frames:
        raise ValueError("clip has no frames")
    results = []
    for t, item in enumerate(frames):
        if isinstance(item, FrameSaturation):
            results.append(item)
        else:
            u, z, sw = item
            results.append(analyze_frame(u, z, sw, k, grid, frame_index=t))
    grid = grid or QualityGrid(tuple(results[0].qvs))
    return SaturationResult(results, snap_median([r.qv_star_frame for r in results], grid), grid)
