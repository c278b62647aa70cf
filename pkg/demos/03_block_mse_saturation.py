"""
Block MSE-IQR saturation of synthetic UGC
=========================================

A pristine image is degraded by block-DCT quantisation at three strengths
(standing in for prior H.264 compression at QP 35, 40 and 45), then swept
through JPEG at 20 quality values.  The interquartile range of the 8x8
block MSE flattens once the encoder starts reproducing the prior
compression artifacts, both against the pristine image and against the
denoised UGC.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ugcsat.codec import DegradationSpec, sweep, synthesize_ugc
from ugcsat.planes import mse, natural_image
from ugcsat.saturation import analyze_frame
from ugcsat.wavelet import denoise

out = Path("demo_output")
out.mkdir(exist_ok=True)

x = np.rint(natural_image((256, 256), seed=0))

fig, axes = plt.subplots(1, 3, figsize=(11, 3.3), sharey=True)
for ax, qp in zip(axes, (35, 40, 45)):
    u = synthesize_ugc(x, DegradationSpec(qp=qp))
    z = denoise(u)
    f = analyze_frame(u, z, sweep(u), pristine=x)
    print(f"qp {qp}: MSE(u, x) = {mse(u, x):6.2f}   MSE(z, x) = {mse(z, x):6.2f}   "
          f"frame QV* = {f.qv_star_frame}")
    ax.plot(f.bpp, f.iqr_vs_pristine, "o-", ms=3, label="vs pristine")
    ax.plot(f.bpp, f.iqr_vs_denoised, "s-", ms=3, label="vs denoised")
    ax.set_title(f"proxy QP {qp}, QV* = {f.qv_star_frame}")
    ax.set_xlabel("bits per pixel")
axes[0].set_ylabel("block MSE IQR")
axes[0].legend()
fig.tight_layout()
fig.savefig(out / "iqr_saturation.png")

###############################################################################
# Where saturation happens inside the image: the per-block QV* map of the
# most degraded version.

f45 = analyze_frame(u, z, sweep(u))
bg = f45.block_grid
plt.figure(figsize=(4, 3.5))
plt.imshow(f45.qv_star_block.reshape(bg.rows, bg.cols), cmap="viridis")
plt.colorbar(label="block QV*")
plt.title("per-block saturation quality")
plt.tight_layout()
plt.savefig(out / "block_qv_star.png")
