"""Noisy-source rate-distortion analysis and JPEG saturation detection for UGC."""

from .analytic import (
    GaussianChannel,
    d0,
    derivative_ratio,
    mmse_gain,
    monte_carlo_decomposition,
    traditional_drf,
    ugc_drf,
)
from .codec import DegradationSpec, QualityGrid, encode_decode, load_frames, sweep, synthesize_ugc
from .corpus import pearson, run_corpus, spearman
from .saturation import (
    BlockGrid,
    analyze_clip,
    analyze_frame,
    block_mse,
    block_qv_star,
    mse_iqr,
    noise_region_membership,
    saturation_indicator,
)
from .wavelet import DenoiserSpec, denoise, dwt2, estimate_noise_sigma, idwt2

__version__ = "0.1.0"
