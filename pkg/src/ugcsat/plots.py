"""Minimal deterministic SVG figures (matplotlib, Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path):
    with matplotlib.rc_context({"svg.hashsalt": "ugcsat", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def rd_curves_svg(path, rates, curves: dict, floor=None, title=None):
    """Line plot of distortion-rate curves given as ``{label: distortions}``."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, d in curves.items():
        ax.plot(rates, d, label=label)
    if floor is not None:
        ax.axhline(floor, color="gray", linestyle=":", label=f"D0 = {floor:.4g}")
    ax.set_xlabel("rate (bits/sample)")
    ax.set_ylabel("distortion (MSE)")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def iqr_svg(path, frames):
    """MSE-IQR vs bits-per-pixel for each analysed frame."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for f in frames:
        ax.plot(f.bpp, f.iqr_vs_ugc, "--", label=f"frame {f.frame_index} vs UGC")
        ax.plot(f.bpp, f.iqr_vs_denoised, "-", label=f"frame {f.frame_index} vs denoised")
    ax.set_xlabel("bits per pixel")
    ax.set_ylabel("block MSE IQR")
    ax.legend(fontsize="small")
    fig.tight_layout()
    _save(fig, path)


def scatter_svg(path, xs, ys, xlabel="QV*", ylabel="MOS"):
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.scatter(xs, ys, s=14)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    _save(fig, path)
