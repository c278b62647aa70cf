"""Corpus driver: QV* per clip and its correlation with ingested quality scores."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .codec import DegradationSpec, synthesize_ugc
from .pipeline import RunConfig, analyze_source, map_ordered, write_csv
from .planes import natural_image, write_plane

log = logging.getLogger(__name__)


class UndefinedCorrelation(ValueError):
    """Correlation is undefined (too few samples or a constant input)."""


def pearson(xs, ys) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be 1-D of equal length")
    if x.size < 3:
        raise UndefinedCorrelation(f"need at least 3 samples, got {x.size}")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = np.dot(dx, dx), np.dot(dy, dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelation("correlation of a constant vector")
    r = np.dot(dx, dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def spearman(xs, ys) -> float:
    """Rank correlation, ties receiving average ranks."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be 1-D of equal length")
    return pearson(rankdata(x), rankdata(y))


@dataclass(frozen=True)
class ClipRecord:
    clip_id: str
    frame_source: Path
    mos: float | None = None
    category: str | None = None


def read_manifest(path) -> list:
    """Parse a manifest CSV; relative frame sources resolve against its directory."""
    path = Path(path)
    base = path.parent
    records, seen = [], set()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"clip_id", "frame_source"} - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: manifest lacks columns {sorted(missing)}")
        for row in reader:
            cid = row["clip_id"].strip()
            if cid in seen:
                raise ValueError(f"{path}: duplicate clip_id {cid!r}")
            seen.add(cid)
            src = Path(row["frame_source"].strip())
            mos = (row.get("mos") or "").strip()
            cat = (row.get("category") or "").strip()
            records.append(ClipRecord(
                cid, src if src.is_absolute() else base / src,
                float(mos) if mos else None, cat or None,
            ))
    return records


@dataclass
class CorpusReport:
    rows: list  # (clip_id, category, mos, qv_star) sorted by clip_id
    pearson: float | None
    spearman: float | None
    n: int
    failures: list = field(default_factory=list)  # (clip_id, message)

    @property
    def defined(self) -> bool:
        return self.pearson is not None


def _run_clip(args):
    rec, cfg = args
    try:
        res = analyze_source(rec.frame_source, cfg, jobs=1).result
        return rec, res.qv_star_clip, None
    except Exception as exc:  # recorded per clip, the corpus run continues
        return rec, None, f"{type(exc).__name__}: {exc}"


def run_corpus(manifest, cfg: RunConfig, category: str | None = None) -> CorpusReport:
    """QV* for every clip of a manifest plus correlations against MOS.

    Clips that fail are recorded in ``failures`` and skipped; a corpus with
    no successful clip raises ``RuntimeError``.
    """
    records = sorted(read_manifest(manifest), key=lambda r: r.clip_id)
    if category is not None:
        records = [r for r in records if r.category == category]
    results = map_ordered(_run_clip, [(r, cfg) for r in records], cfg.n_jobs())
    rows, failures = [], []
    for rec, qv, err in results:
        if err is None:
            rows.append((rec.clip_id, rec.category, rec.mos, qv))
        else:
            log.warning("clip %s failed: %s", rec.clip_id, err)
            failures.append((rec.clip_id, err))
    if not rows:
        raise RuntimeError(f"no clip in {manifest} was processed successfully")

    scored = [(m, q) for _, _, m, q in rows if m is not None]
    r = rho = None
    if scored:
        mos, qv = map(np.array, zip(*scored))
        try:
            r, rho = pearson(mos, qv), spearman(mos, qv)
        except UndefinedCorrelation as exc:
            log.info("correlation undefined: %s", exc)
    return CorpusReport(rows, r, rho, len(scored), failures)


def write_report(report: CorpusReport, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(
        out / "report.csv", ["clip_id", "category", "mos", "qv_star"],
        ((c, cat or "", "" if m is None else m, q) for c, cat, m, q in report.rows),
    )
    undefined = "undefined"
    write_csv(
        out / "correlation.csv", ["statistic", "value", "n"],
        [("pearson", undefined if report.pearson is None else report.pearson, report.n),
         ("spearman", undefined if report.spearman is None else report.spearman, report.n)],
    )
    if report.failures:
        write_csv(out / "failures.csv", ["clip_id", "error"], report.failures)


def make_synthetic_corpus(out_dir, n_images=3, qps=(30, 35, 40, 45, 50), shape=(256, 256), seed=0):
    """Write degraded test images and a manifest whose MOS surrogate is ``-qp``.

    Returns the manifest path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for img in range(n_images):
        x = np.rint(natural_image(shape, seed + img))
        for qp in qps:
            cid = f"img{img}_qp{qp:02d}"
            write_plane(out / f"{cid}.png", synthesize_ugc(x, DegradationSpec(qp=qp)))
            rows.append((cid, f"{cid}.png", -qp, f"img{img}"))
    manifest = out / "manifest.csv"
    write_csv(manifest, ["clip_id", "frame_source", "mos", "category"], rows)
    return manifest
