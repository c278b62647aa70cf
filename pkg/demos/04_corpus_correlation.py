"""
QV* against a quality score over a corpus
=========================================

Three test images, each degraded at five strengths, form a 15-clip corpus
whose quality score is the negated degradation strength.  Heavier prior
compression saturates the JPEG sweep at a lower quality value, so QV* and
the score are rank-correlated.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from ugcsat.corpus import make_synthetic_corpus, run_corpus
from ugcsat.pipeline import RunConfig

out = Path("demo_output")
manifest = make_synthetic_corpus(out / "corpus", n_images=3, qps=(30, 35, 40, 45, 50))

report = run_corpus(manifest, RunConfig(jobs=1))
for clip_id, category, mos, qv in report.rows:
    print(f"{clip_id:12s} score {mos:6.1f}  QV* {qv}")
print(f"Pearson r = {report.pearson:.3f}, Spearman rho = {report.spearman:.3f}, n = {report.n}")

plt.figure(figsize=(4.5, 3.5))
for cat in sorted({r[1] for r in report.rows}):
    pts = [(q, m) for _, c, m, q in report.rows if c == cat]
    plt.scatter(*zip(*pts), label=cat)
plt.xlabel("QV*")
plt.ylabel("quality score (-QP)")
plt.legend()
plt.tight_layout()
plt.savefig(out / "corpus_scatter.png")
