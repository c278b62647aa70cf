"""Run configuration and the single-clip pipeline: load, denoise, sweep, analyse, write."""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .codec import DegradationSpec, QualityGrid, load_frames, sweep
from .saturation import SaturationResult, analyze_frame, snap_median
from .wavelet import DenoiserSpec, denoise

METADATA = {
    "analysis_plane": "luma (BT.601 0.299/0.587/0.114)",
    "codec": "Pillow baseline grayscale JPEG",
    "bitrate_bytes": "full JPEG stream including headers",
    "degradation_proxy": "8x8 block-DCT quantisation, step 2**((qp-4)/6), stands in for H.264",
}


@dataclass
class RunConfig:
    """Everything that determines a run.  ``jobs`` affects speed only."""

    input: str | None = None
    manifest: str | None = None
    category: str | None = None
    out_dir: str = "out"
    grid: str = "14:90:4"
    block_size: int = 8
    denoiser: str = "bayes_shrink"
    wavelet: str = "db2"
    levels: int = 3
    blur_sigma: float = 1.0
    denoiser_command: str | None = None
    degradation: str = "dct_quantize"
    qp: int = 40
    quality: int = 30
    degradation_command: str | None = None
    frames: list = field(default_factory=lambda: [15, 30, 10])
    seed: int = 0
    jobs: int = 0
    svg: bool = False
    save_jpeg: bool = False
    var_x: float | None = None
    var_eta: float | None = None
    rate_max: float = 6.0
    rate_step: float = 0.05

    def __post_init__(self):
        self.frames = [int(v) for v in self.frames]
        if len(self.frames) != 3:
            raise ValueError("frames must be start,stride,count")
        if self.block_size < 1:
            raise ValueError("block size must be positive")
        # validate eagerly so bad configs fail before any work
        self.quality_grid()
        self.denoiser_spec()
        self.degradation_spec()

    def quality_grid(self) -> QualityGrid:
        return QualityGrid.parse(self.grid)

    def denoiser_spec(self) -> DenoiserSpec:
        return DenoiserSpec(
            kind=self.denoiser, wavelet=self.wavelet, levels=self.levels,
            sigma=self.blur_sigma, command=self.denoiser_command,
        )

    def degradation_spec(self) -> DegradationSpec:
        return DegradationSpec(
            kind=self.degradation, qp=self.qp, quality=self.quality,
            command=self.degradation_command,
        )

    def n_jobs(self) -> int:
        return self.jobs if self.jobs > 0 else (os.cpu_count() or 1)

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = set(cls.keys())
        unknown = set(data) - known - {"metadata"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{k: v for k, v in data.items() if k in known})

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_mapping(json.load(fh))

    def dump(self, path, command: str) -> None:
        data = asdict(self)
        data["metadata"] = dict(METADATA, command=command)
        with open(path, "w") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return v


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def process_frame(args):
    """Denoise, sweep and analyse one frame.  Module-level so worker processes can run it."""
    frame_index, u, cfg = args
    grid = cfg.quality_grid()
    z = denoise(u, cfg.denoiser_spec())
    sw = sweep(u, grid, frame_id=frame_index)
    result = analyze_frame(u, z, sw, cfg.block_size, grid, frame_index=frame_index)
    return sw, result


def map_ordered(fn, items, jobs):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))


@dataclass
class ClipAnalysis:
    result: SaturationResult
    sweeps: list


def analyze_source(source, cfg: RunConfig, jobs: int | None = None) -> ClipAnalysis:
    """Run the full pipeline on one frame source."""
    indices, planes = load_frames(source, cfg.frames)
    jobs = cfg.n_jobs() if jobs is None else jobs
    out = map_ordered(process_frame, [(t, u, cfg) for t, u in zip(indices, planes)], jobs)
    grid = cfg.quality_grid()
    frames = [r for _, r in out]
    clip = snap_median([f.qv_star_frame for f in frames], grid)
    return ClipAnalysis(SaturationResult(frames, clip, grid), [s for s, _ in out])


def write_clip_outputs(analysis: ClipAnalysis, out_dir) -> None:
    """Write sweep.csv, saturation.csv, iqr.csv and summary.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    res = analysis.result

    write_csv(
        out / "sweep.csv", ["frame_index", "qv", "bytes", "bpp"],
        ((f.frame_index, e.qv, e.bytes, e.bpp)
         for f, sw in zip(res.frames, analysis.sweeps) for e in sw.entries),
    )

    def saturation_rows():
        for f in res.frames:
            for i in range(f.delta.shape[1]):
                for n, qv in enumerate(f.qvs):
                    yield (f.frame_index, i, qv, f.mse_vs_ugc[n, i],
                           f.mse_vs_denoised[n, i], int(f.delta[n, i]))

    write_csv(
        out / "saturation.csv",
        ["frame_index", "block_index", "qv", "mse_vs_ugc", "mse_vs_denoised", "delta"],
        saturation_rows(),
    )
    write_csv(
        out / "iqr.csv", ["frame_index", "qv", "bpp", "iqr_vs_ugc", "iqr_vs_denoised"],
        ((f.frame_index, qv, f.bpp[n], f.iqr_vs_ugc[n], f.iqr_vs_denoised[n])
         for f in res.frames for n, qv in enumerate(f.qvs)),
    )
    rows = [(f.frame_index, f.qv_star_frame) for f in res.frames]
    rows.append(("clip", res.qv_star_clip))
    write_csv(out / "summary.csv", ["frame_index", "qv_star_frame"], rows)
