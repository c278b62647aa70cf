"""JPEG quality sweeps, synthetic UGC degradation and frame loading."""

from __future__ import annotations

import io
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.fft import dctn, idctn

from .planes import as_plane, luma, read_plane, to_uint8, write_plane

FRAME_SUFFIXES = (".png", ".pgm")


class CodecError(RuntimeError):
    pass


@dataclass(frozen=True)
class QualityGrid:
    """Strictly increasing list of encoder quality values."""

    values: tuple = tuple(range(14, 91, 4))

    def __post_init__(self):
        v = tuple(int(q) for q in self.values)
        if not v:
            raise ValueError("quality grid is empty")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"quality grid must be strictly increasing: {v}")
        if v[0] < 1 or v[-1] > 100:
            raise ValueError("quality values must lie in [1, 100]")
        object.__setattr__(self, "values", v)

    @classmethod
    def parse(cls, text: str) -> "QualityGrid":
        """Parse ``"a:b:step"`` (inclusive of ``b``) or a comma list ``"30,50,70"``."""
        text = text.strip()
        if ":" in text:
            parts = [int(t) for t in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError(f"grid must be a:b:step, got {text!r}")
            a, b, step = parts
            return cls(tuple(range(a, b + 1, step)))
        return cls(tuple(int(t) for t in text.split(",")))

    def spec(self) -> str:
        v = self.values
        steps = {b - a for a, b in zip(v, v[1:])}
        if len(steps) == 1:
            return f"{v[0]}:{v[-1]}:{steps.pop()}"
        return ",".join(map(str, v))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


@dataclass(frozen=True)
class SweepEntry:
    qv: int
    decoded: np.ndarray
    bytes: int
    bpp: float


@dataclass(frozen=True)
class QualitySweep:
    entries: tuple

    @property
    def qvs(self):
        return [e.qv for e in self.entries]

    @property
    def bpp(self):
        return np.array([e.bpp for e in self.entries])

    @property
    def decoded(self):
        return [e.decoded for e in self.entries]

    def __len__(self):
        return len(self.entries)


def jpeg_bytes(p, qv: int) -> bytes:
    """Baseline grayscale JPEG stream of a plane at quality ``qv``."""
    buf = io.BytesIO()
    Image.fromarray(to_uint8(p), mode="L").save(buf, format="JPEG", quality=int(qv))
    return buf.getvalue()


def encode_decode(p, qv: int, frame_id=None):
    """JPEG round trip of a luma plane; returns ``(decoded, n_bytes)``.

    The byte count is the length of the complete stream, headers included.
    """
    p = as_plane(p)
    if not 1 <= int(qv) <= 100:
        raise ValueError(f"quality value must be in [1, 100], got {qv}")
    try:
        data = jpeg_bytes(p, qv)
        with Image.open(io.BytesIO(data)) as im:
            decoded = np.asarray(im, dtype=np.float64)
    except (OSError, ValueError) as exc:
        where = f"qv={qv}" + ("" if frame_id is None else f", frame={frame_id}")
        raise CodecError(f"JPEG round trip failed ({where}): {exc}") from exc
    if decoded.shape != p.shape:
        raise CodecError(f"decoded shape {decoded.shape} differs from input {p.shape}")
    return decoded, len(data)


def sweep(p, grid: QualityGrid = QualityGrid(), frame_id=None) -> QualitySweep:
    p = as_plane(p)
    n_pix = p.size
    entries = []
    for qv in grid:
        decoded, n = encode_decode(p, qv, frame_id)
        entries.append(SweepEntry(qv, decoded, n, 8.0 * n / n_pix))
    return QualitySweep(tuple(entries))


DEGRADATION_KINDS = ("dct_quantize", "recompress_jpeg", "external")


@dataclass(frozen=True)
class DegradationSpec:
    """How synthetic UGC is produced from a pristine plane.

    ``dct_quantize`` stands in for a prior H.264 encode: 8x8 orthonormal DCT,
    uniform quantisation with step ``2**((qp - 4) / 6)``, reconstruction and
    rounding to 8-bit.  ``recompress_jpeg`` uses a JPEG round trip at
    ``quality``.  ``external`` runs ``command`` with ``{input}``/``{output}``
    PNG placeholders.
    """

    kind: str = "dct_quantize"
    qp: int = 40
    quality: int = 30
    command: str | None = None
    dither: float = 0.0

    def __post_init__(self):
        if self.kind not in DEGRADATION_KINDS:
            raise ValueError(f"unknown degradation kind {self.kind!r}")
        if self.kind == "dct_quantize" and not 0 <= self.qp <= 51:
            raise ValueError(f"qp must be in [0, 51], got {self.qp}")
        if self.kind == "external" and not self.command:
            raise ValueError("external degradation needs a command template")

    @property
    def step(self) -> float:
        return 2.0 ** ((self.qp - 4) / 6.0)


def block_dct_quantize(p, step: float, block: int = 8, rng=None, dither: float = 0.0):
    """Quantise 8x8 block-DCT coefficients with a uniform step; no rounding or clamping.

    Edge rows/columns that do not fill a block are quantised in a partial
    block of their own size.
    """
    p = as_plane(p)
    out = np.empty_like(p)
    h, w = p.shape
    for r in range(0, h, block):
        for c in range(0, w, block):
            tile = p[r : r + block, c : c + block]
            coef = dctn(tile - 128.0, norm="ortho")
            if dither and rng is not None:
                coef = coef + rng.uniform(-0.5, 0.5, coef.shape) * dither * step
            q = np.rint(coef / step) * step
            out[r : r + block, c : c + block] = idctn(q, norm="ortho") + 128.0
    return out


def synthesize_ugc(pristine, spec: DegradationSpec, seed: int = 0) -> np.ndarray:
    """Degrade a pristine plane into a synthetic UGC plane (8-bit valued)."""
    x = as_plane(pristine)
    if spec.kind == "dct_quantize":
        rng = np.random.default_rng(seed) if spec.dither else None
        y = block_dct_quantize(x, spec.step, rng=rng, dither=spec.dither)
        return np.clip(np.rint(y), 0, 255)
    if spec.kind == "recompress_jpeg":
        return encode_decode(x, spec.quality)[0]
    with tempfile.TemporaryDirectory(prefix="ugcsat-") as tmp:
        src, dst = Path(tmp) / "input.png", Path(tmp) / "output.png"
        write_plane(src, x)
        argv = [a.format(input=src, output=dst) for a in shlex.split(spec.command)]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, check=False)
        except OSError as exc:
            raise CodecError(f"cannot run {argv[0]!r}: {exc}") from exc
        if proc.returncode != 0 or not dst.exists():
            raise CodecError(
                f"external degradation failed (exit {proc.returncode}): {proc.stderr.strip()}"
            )
        y = read_plane(dst)
    if y.shape != x.shape:
        raise CodecError(f"external degradation changed shape {x.shape} -> {y.shape}")
    return y


_INDEX_RE = re.compile(r"(\d+)(?!.*\d)")


def index_frames(directory) -> dict:
    """Map frame index -> path for numbered PNG/PGM files in a directory."""
    frames = {}
    for path in sorted(Path(directory).iterdir()):
        if path.suffix.lower() not in FRAME_SUFFIXES:
            continue
        m = _INDEX_RE.search(path.stem)
        if m is None:
            continue
        idx = int(m.group(1))
        if idx in frames:
            raise ValueError(f"duplicate frame index {idx}: {frames[idx].name}, {path.name}")
        frames[idx] = path
    return frames


def frame_indices(sampling) -> list:
    start, stride, count = (int(v) for v in sampling)
    if start < 0 or stride < 1 or count < 1:
        raise ValueError(f"invalid sampling (start, stride, count) = {sampling}")
    return [start + k * stride for k in range(count)]


def load_frames(source, sampling=(15, 30, 10)):
    """Load sampled frames as luma planes; returns ``(indices, planes)``.

    ``source`` may be a directory of numbered frames (the number in the file
    name is the frame index), a ``.npy`` array of shape ``(frames, h, w)``
    whose first axis is the index, or a single image, which is treated as a
    one-frame clip with index 0 and ignores ``sampling``.
    """
    source = Path(source)
    if not source.exists():
        raise FileNotFoundError(f"frame source not found: {source}")
    if source.is_file() and source.suffix.lower() != ".npy":
        return [0], [read_plane(source)]

    wanted = frame_indices(sampling)
    if source.is_file():
        stack = np.load(source)
        if stack.ndim not in (3, 4):
            raise ValueError(f"{source}: expected (frames, h, w[, c]) array, got {stack.shape}")
        missing = [i for i in wanted if i >= len(stack)]
        if missing:
            raise ValueError(f"{source}: missing frame indices {missing} (have {len(stack)})")
        planes = [luma(stack[i]) for i in wanted]
    else:
        available = index_frames(source)
        missing = [i for i in wanted if i not in available]
        if missing:
            raise ValueError(f"{source}: missing frame indices {missing}")
        planes = [read_plane(available[i]) for i in wanted]
    shapes = {p.shape for p in planes}
    if len(shapes) != 1:
        raise ValueError(f"{source}: frame dimensions differ across frames: {sorted(shapes)}")
    return wanted, planes
