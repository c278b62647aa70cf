import numpy as np
import pytest
from PIL import Image
from scipy.fft import dct

from ugcsat.codec import (
    CodecError,
    DegradationSpec,
    QualityGrid,
    block_dct_quantize,
    encode_decode,
    frame_indices,
    load_frames,
    sweep,
    synthesize_ugc,
)
from ugcsat.planes import luma, mse, natural_image, psnr, read_plane, write_plane


def test_default_grid():
    g = QualityGrid()
    assert len(g) == 20
    assert g.values == (14, 18, 22, 26, 30, 34, 38, 42, 46, 50, 54, 58, 62, 66, 70, 74, 78, 82, 86, 90)
    assert QualityGrid.parse("14:90:4") == g
    assert QualityGrid.parse("30,50,70").values == (30, 50, 70)
    assert QualityGrid.parse(g.spec()) == g


@pytest.mark.parametrize("values", [(), (20, 10), (10, 10), (0, 5), (50, 101)])
def test_grid_validation(values):
    with pytest.raises(ValueError):
        QualityGrid(values)


def test_encode_decode_quality_ordering(pristine):
    lo, n_lo = encode_decode(pristine, 14)
    hi, n_hi = encode_decode(pristine, 90)
    assert lo.shape == pristine.shape
    assert psnr(pristine, hi) > psnr(pristine, lo)
    assert n_hi > n_lo


def test_bytes_grow_on_512_plane():
    x = np.rint(natural_image((512, 512), seed=5))
    assert encode_decode(x, 90)[1] > encode_decode(x, 14)[1]


def test_constant_128_is_exact():
    p = np.full((64, 64), 128.0)
    for qv in QualityGrid():
        assert np.array_equal(encode_decode(p, qv)[0], p)


@pytest.mark.parametrize("value", [0, 37, 100, 200, 255])
def test_constant_plane_error_small(value):
    # DC quantisation of flat blocks is coarse at low quality; 2 levels observed worst case
    p = np.full((64, 64), float(value))
    for qv in QualityGrid():
        assert np.abs(encode_decode(p, qv)[0] - p).max() <= 2


def test_encode_decode_rejects_bad_quality(pristine):
    with pytest.raises(ValueError):
        encode_decode(pristine, 0)
    with pytest.raises(ValueError):
        encode_decode(pristine, 101)


def test_sweep_entries_and_determinism(pristine):
    a = sweep(pristine)
    assert a.qvs == list(range(14, 91, 4))
    assert all(e.bpp > 0 for e in a.entries)
    assert a.entries[-1].bpp > a.entries[0].bpp
    b = sweep(pristine)
    assert [e.bytes for e in a.entries] == [e.bytes for e in b.entries]
    assert all(np.array_equal(x, y) for x, y in zip(a.decoded, b.decoded))
    e = a.entries[0]
    assert e.bpp == 8 * e.bytes / pristine.size


def test_single_entry_sweep(pristine):
    s = sweep(pristine, QualityGrid((50,)))
    dec, n = encode_decode(pristine, 50)
    assert len(s) == 1 and s.entries[0].bytes == n
    assert np.array_equal(s.entries[0].decoded, dec)


def test_proxy_step_mapping():
    assert DegradationSpec(qp=4).step == 1.0
    assert DegradationSpec(qp=10).step == 2.0
    with pytest.raises(ValueError):
        DegradationSpec(qp=52)
    with pytest.raises(ValueError):
        DegradationSpec(kind="h264")


def _dct_spread():
    # max over sample positions of sum_k |basis_k(n)| for the 8x8 orthonormal DCT
    c = dct(np.eye(8), norm="ortho", axis=0)
    per_axis = np.abs(c).sum(axis=0)
    return float(np.max(np.outer(per_axis, per_axis)))


@pytest.mark.parametrize("qp", [0, 2, 3])
def test_sub_unit_step_is_near_lossless(pristine, qp):
    spec = DegradationSpec(qp=qp)
    assert spec.step < 1
    pre = block_dct_quantize(pristine, spec.step)
    assert np.abs(pre - pristine).max() <= 0.5 * spec.step * _dct_spread()
    out = synthesize_ugc(pristine, spec)
    assert np.abs(out - pristine).max() <= 1
    assert mse(out, pristine) < 0.1


def test_proxy_distortion_grows_with_qp(pristine):
    errs = [mse(synthesize_ugc(pristine, DegradationSpec(qp=qp)), pristine) for qp in (35, 40, 45)]
    assert errs[0] < errs[1] < errs[2]


@pytest.mark.parametrize("qp", [10, 35, 45, 51])
def test_flat_plane_unchanged(qp):
    # 128 keeps the DC coefficient at zero; other levels pass when the DC lands on the step lattice
    p = np.full((40, 56), 128.0)
    assert np.array_equal(synthesize_ugc(p, DegradationSpec(qp=qp)), p)


@pytest.mark.parametrize("qp", [35, 40, 45])
def test_proxy_idempotent(pristine, qp):
    spec = DegradationSpec(qp=qp)
    once = synthesize_ugc(pristine, spec)
    twice = synthesize_ugc(once, spec)
    assert np.abs(twice - once).max() <= 1


def test_proxy_handles_partial_blocks(rng):
    p = rng.uniform(0, 255, (21, 13))
    assert synthesize_ugc(p, DegradationSpec(qp=40)).shape == p.shape


def test_recompress_jpeg_kind(pristine):
    out = synthesize_ugc(pristine, DegradationSpec("recompress_jpeg", quality=20))
    assert np.array_equal(out, encode_decode(pristine, 20)[0])


def test_external_degradation(tmp_path, pristine):
    import sys

    script = tmp_path / "deg.py"
    script.write_text("import sys, shutil\nshutil.copy(sys.argv[1], sys.argv[2])\n")
    spec = DegradationSpec("external", command=f"{sys.executable} {script} {{input}} {{output}}")
    assert np.array_equal(synthesize_ugc(pristine, spec), pristine)
    bad = DegradationSpec("external", command=f"{sys.executable} -c 'import sys; sys.exit(1)'")
    with pytest.raises(CodecError):
        synthesize_ugc(pristine, bad)


def _write_sequence(directory, n, shape=(16, 24)):
    directory.mkdir()
    for i in range(n):
        Image.fromarray(np.full(shape, i % 256, np.uint8)).save(directory / f"frame_{i:05d}.png")


def test_frame_sampling_paper_defaults(tmp_path):
    assert frame_indices((15, 30, 10)) == [15, 45, 75, 105, 135, 165, 195, 225, 255, 285]
    _write_sequence(tmp_path / "seq", 300)
    idx, planes = load_frames(tmp_path / "seq", (15, 30, 10))
    assert idx == list(range(15, 286, 30))
    assert [p[0, 0] for p in planes] == [float(i % 256) for i in idx]


def test_first_frame_only(tmp_path):
    _write_sequence(tmp_path / "seq", 3)
    idx, planes = load_frames(tmp_path / "seq", (0, 1, 1))
    assert idx == [0] and len(planes) == 1


def test_missing_frames_and_mismatched_sizes(tmp_path):
    _write_sequence(tmp_path / "seq", 5)
    with pytest.raises(ValueError, match="missing"):
        load_frames(tmp_path / "seq", (0, 2, 4))
    Image.fromarray(np.zeros((8, 8), np.uint8)).save(tmp_path / "seq" / "frame_00005.png")
    with pytest.raises(ValueError, match="differ"):
        load_frames(tmp_path / "seq", (4, 1, 2))
    with pytest.raises(FileNotFoundError):
        load_frames(tmp_path / "nope")


def test_npy_stack_and_single_image(tmp_path, rng):
    stack = rng.integers(0, 255, (4, 8, 8)).astype(np.uint8)
    np.save(tmp_path / "clip.npy", stack)
    idx, planes = load_frames(tmp_path / "clip.npy", (1, 2, 2))
    assert idx == [1, 3] and np.array_equal(planes[1], stack[3])
    write_plane(tmp_path / "one.png", stack[0])
    idx, planes = load_frames(tmp_path / "one.png", (15, 30, 10))
    assert idx == [0] and np.array_equal(planes[0], stack[0])


def test_luma_conversion(tmp_path):
    gray = np.full((4, 4, 3), 93, np.uint8)
    assert np.allclose(luma(gray), 93.0, atol=1e-12)
    rgb = np.zeros((1, 1, 3))
    rgb[0, 0] = (255, 0, 0)
    assert luma(rgb)[0, 0] == pytest.approx(0.299 * 255)
    Image.fromarray(np.full((6, 6, 3), 200, np.uint8)).save(tmp_path / "c.png")
    p = read_plane(tmp_path / "c.png")
    assert np.allclose(p, 200.0) and p.min() >= 0 and p.max() <= 255
