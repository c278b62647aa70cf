"""Closed-form rate-distortion functions for a scalar Gaussian noisy source.

The pristine source ``x ~ N(0, var_x)`` is observed through additive,
independent noise ``u = x + eta`` with ``eta ~ N(0, var_eta)``.  Two
distortion-rate functions are compared:

* the traditional one, where distortion is measured against ``u`` itself;
* the noisy-source one, where distortion is measured against ``x`` while only
  ``u`` can be encoded.  It is bounded below by the MMSE of estimating ``x``
  from ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GaussianChannel:
    """Pristine and noise variances of the scalar Gaussian model."""

    var_x: float
    var_eta: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.var_x) or self.var_x <= 0:
            raise ValueError(f"var_x must be positive, got {self.var_x}")
        if not np.isfinite(self.var_eta) or self.var_eta < 0:
            raise ValueError(f"var_eta must be non-negative, got {self.var_eta}")

    def var_u(self) -> float:
        return self.var_x + self.var_eta


@dataclass(frozen=True)
class RdCurve:
    """Distortion-rate samples, rate in bits per sample."""

    rates: np.ndarray
    distortions: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rates, dtype=float)
        d = np.asarray(self.distortions, dtype=float)
        if r.shape != d.shape or r.ndim != 1:
            raise ValueError("rates and distortions must be 1-D of equal length")
        if np.any(r < 0) or np.any(np.diff(r) <= 0):
            raise ValueError("rates must be non-negative and strictly increasing")
        if np.any(d < 0) or np.any(np.diff(d) > 0):
            raise ValueError("distortions must be non-negative and non-increasing")
        object.__setattr__(self, "rates", r)
        object.__setattr__(self, "distortions", d)

    @property
    def points(self):
        return list(zip(self.rates.tolist(), self.distortions.tolist()))


def _check_rate(rate):
    r = np.asarray(rate, dtype=float)
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise ValueError(f"rate must be finite and non-negative, got {rate}")
    return r


def _scalar_or_array(r):
    return float(r) if r.ndim == 0 else r


def mmse_gain(ch: GaussianChannel) -> float:
    """Gain ``a`` of the linear MMSE estimator ``y = a * u``."""
    return ch.var_x / ch.var_u()


def d0(ch: GaussianChannel) -> float:
    """MSE of the MMSE estimate: the distortion floor at any rate."""
    return ch.var_x * ch.var_eta / ch.var_u()


def traditional_drf(ch: GaussianChannel, rate):
    """Gaussian distortion-rate function with the noisy signal as reference.

    ``D(R) = var_u * 2**(-2R)``.  Accepts a scalar or an array of rates.
    """
    r = _check_rate(rate)
    return _scalar_or_array(ch.var_u() * np.exp2(-2.0 * r))


def ugc_drf(ch: GaussianChannel, rate):
    """Distortion-rate function with the pristine signal as reference.

    ``D_ugc(R) = D0 + var_y * 2**(-2R)`` where ``var_y = var_x**2 / var_u``
    is the variance of the MMSE estimate.  Equals ``var_x`` at zero rate and
    saturates at :func:`d0`.
    """
    r = _check_rate(rate)
    var_y = ch.var_x**2 / ch.var_u()
    return _scalar_or_array(d0(ch) + var_y * np.exp2(-2.0 * r))


def derivative_ratio(ch: GaussianChannel) -> float:
    """Ratio of the slopes ``|dD_ugc/dR| / |dD/dR|``, i.e. ``(var_x/var_u)**2``."""
    return mmse_gain(ch) ** 2


def crossing_rate(ch: GaussianChannel) -> float:
    """Rate at which the traditional and noisy-source curves intersect.

    Solves ``var_u 2^(-2R) = D0 + var_y 2^(-2R)``; infinite for a noiseless
    channel, where the curves coincide.
    """
    var_u = ch.var_u()
    excess = var_u - ch.var_x**2 / var_u
    if ch.var_eta == 0:
        return float("inf")
    return 0.5 * float(np.log2(excess / d0(ch)))


def rd_curves(ch: GaussianChannel, rates):
    """Traditional and noisy-source curves sampled on ``rates``."""
    r = np.asarray(rates, dtype=float)
    return RdCurve(r, traditional_drf(ch, r)), RdCurve(r, ugc_drf(ch, r))


@dataclass(frozen=True)
class Decomposition:
    """Monte-Carlo estimates for the estimate-then-compress decomposition.

    ``d_ugc`` is E[(x - q(y))^2], ``d_y`` is E[(y - q(y))^2] and ``d0`` the
    analytic floor.  ``gap`` is ``d_ugc - (d0 + d_y)`` and ``gap_se`` its
    standard error; ``orthogonality`` is the sample mean of (x - y) q(y)
    with standard error ``orthogonality_se``.
    """

    d_ugc: float
    d_y: float
    d0: float
    d0_empirical: float
    gap: float
    gap_se: float
    orthogonality: float
    orthogonality_se: float

    def __iter__(self):
        # unpacks as the (d_ugc, d_y, d0) triple
        return iter((self.d_ugc, self.d_y, self.d0))


def uniform_quantizer(values, levels, half_range):
    """Mid-rise uniform quantizer on ``[-half_range, half_range]`` with clamping."""
    if levels < 2:
        raise ValueError("quantizer needs at least 2 levels")
    step = 2.0 * half_range / levels
    idx = np.floor(np.asarray(values, dtype=float) / step)
    idx = np.clip(idx, -(levels // 2), levels - levels // 2 - 1)
    return (idx + 0.5) * step


def monte_carlo_decomposition(
    ch: GaussianChannel, n_samples: int, quantizer_levels: int, seed: int
) -> Decomposition:
    """Check E[(x-q)^2] = D0 + E[(y-q)^2] by sampling, with q a quantized MMSE estimate.

    The quantizer covers +-4 standard deviations of ``y``.
    """
    if n_samples < 10_000:
        raise ValueError("n_samples must be at least 1e4")
    if quantizer_levels < 2:
        raise ValueError("quantizer_levels must be at least 2")
    rng = np.random.default_rng(seed)
    x = rng.normal(0.0, np.sqrt(ch.var_x), n_samples)
    eta = rng.normal(0.0, np.sqrt(ch.var_eta), n_samples)
    u = x + eta
    y = mmse_gain(ch) * u
    sigma_y = ch.var_x / np.sqrt(ch.var_u())
    q = uniform_quantizer(y, quantizer_levels, 4.0 * sigma_y)

    floor = d0(ch)
    err_x = (x - q) ** 2
    err_y = (y - q) ** 2
    g = err_x - err_y - floor
    orth = (x - y) * q
    sqrt_n = np.sqrt(n_samples)
    return Decomposition(
        d_ugc=float(err_x.mean()),
        d_y=float(err_y.mean()),
        d0=floor,
        d0_empirical=float(((x - y) ** 2).mean()),
        gap=float(g.mean()),
        gap_se=float(g.std(ddof=1) / sqrt_n),
        orthogonality=float(orth.mean()),
        orthogonality_se=float(orth.std(ddof=1) / sqrt_n),
    )
