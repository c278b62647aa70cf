import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from ugcsat.corpus import (
    UndefinedCorrelation,
    make_synthetic_corpus,
    pearson,
    read_manifest,
    run_corpus,
    spearman,
    write_report,
)
from ugcsat.pipeline import RunConfig


def test_perfect_correlations():
    x = np.array([1.0, 4.0, 2.0, 8.0, 5.0])
    assert pearson(x, x) == pytest.approx(1.0)
    assert spearman(x, x) == pytest.approx(1.0)
    assert pearson(x, -x) == pytest.approx(-1.0)
    assert spearman(x, -x) == pytest.approx(-1.0)


def test_spearman_rank_formula():
    # 1 - 6 * sum(d^2) / (n (n^2 - 1)) with sum(d^2) = 2
    assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(1 - 6 * 2 / (4 * 15))


def test_undefined_correlations():
    with pytest.raises(UndefinedCorrelation):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(UndefinedCorrelation):
        spearman([1, 2], [2, 1])
    with pytest.raises(ValueError):
        pearson([1, 2, 3], [1, 2])


samples = arrays(np.float64, 12, elements=st.integers(-50, 50).map(float))


@given(samples, samples)
def test_against_scipy(x, y):
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return
    assert pearson(x, y) == pytest.approx(stats.pearsonr(x, y)[0], abs=1e-9)
    assert spearman(x, y) == pytest.approx(stats.spearmanr(x, y)[0], abs=1e-9)


@given(samples, samples, st.floats(0.1, 10), st.floats(-10, 10))
def test_invariances(x, y, a, b):
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return
    assert pearson(a * x + b, y) == pytest.approx(pearson(x, y), abs=1e-9)
    assert spearman(np.exp(x / 25), y) == pytest.approx(spearman(x, y), abs=1e-12)


def test_manifest_parsing(tmp_path):
    (tmp_path / "m.csv").write_text(
        "clip_id,frame_source,mos,category\n"
        "a,frames/a,3.5,Sports\n"
        "b,/abs/b,,\n"
    )
    recs = read_manifest(tmp_path / "m.csv")
    assert recs[0].frame_source == tmp_path / "frames/a" and recs[0].mos == 3.5
    assert recs[1].mos is None and recs[1].category is None
    (tmp_path / "dup.csv").write_text("clip_id,frame_source\na,x\na,y\n")
    with pytest.raises(ValueError, match="duplicate"):
        read_manifest(tmp_path / "dup.csv")
    (tmp_path / "bad.csv").write_text("id,path\na,x\n")
    with pytest.raises(ValueError, match="lacks"):
        read_manifest(tmp_path / "bad.csv")


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    return make_synthetic_corpus(tmp_path_factory.mktemp("corpus"), n_images=1, shape=(128, 128))


def test_single_clip_report_flags_undefined(corpus, tmp_path):
    lines = corpus.read_text().splitlines()
    one = corpus.parent / "one.csv"
    one.write_text("\n".join(lines[:2]) + "\n")
    rep = run_corpus(one, RunConfig(jobs=1))
    assert len(rep.rows) == 1 and not rep.defined
    write_report(rep, tmp_path / "out")
    assert "undefined" in (tmp_path / "out" / "correlation.csv").read_text()


def test_synthetic_corpus_is_positively_correlated(corpus):
    rep = run_corpus(corpus, RunConfig(jobs=1))
    assert rep.n == 5
    assert [r[0] for r in rep.rows] == sorted(r[0] for r in rep.rows)
    assert rep.spearman > 0.8


def test_failures_are_recorded(corpus, tmp_path):
    m = corpus.parent / "with_missing.csv"
    m.write_text(corpus.read_text() + "zz_missing,/does/not/exist.png,-1,x\n")
    rep = run_corpus(m, RunConfig(jobs=1))
    assert [f[0] for f in rep.failures] == ["zz_missing"]
    assert rep.n == 5
    empty = tmp_path / "e.csv"
    empty.write_text("clip_id,frame_source\nx,/nope.png\n")
    with pytest.raises(RuntimeError):
        run_corpus(empty, RunConfig(jobs=1))


def test_category_filter(corpus):
    rep = run_corpus(corpus, RunConfig(jobs=1), category="img0")
    assert rep.n == 5
    with pytest.raises(RuntimeError):
        run_corpus(corpus, RunConfig(jobs=1), category="Livemusic")


def test_shuffled_mos_is_weakly_correlated(tmp_path):
    manifest = make_synthetic_corpus(tmp_path, n_images=4, shape=(96, 96))
    rep = run_corpus(manifest, RunConfig(jobs=1))
    qv = np.array([r[3] for r in rep.rows], dtype=float)
    mos = np.random.default_rng(11).permutation([r[2] for r in rep.rows])
    assert len(qv) == 20
    assert abs(spearman(mos, qv)) < 0.5
