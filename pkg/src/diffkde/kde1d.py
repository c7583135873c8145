"""Gaussian kernel density estimation and its boundary-consistent variant.

The plain Gaussian estimator lives on the whole real line; the
reflection ("theta") kernel solves the same heat flow on a bounded
interval with zero-flux ends, which keeps the estimate a bona fide
density and removes the factor-two bias at the endpoints.
"""

from __future__ import annotations

import numpy as np

from .grids import (
    BinnedHistogram,
    DensityEstimate1D,
    Grid1D,
    _as_sample,
    bin_linear,
    cosine_moments,
    cosine_synthesis,
)

SQRT_2PI = np.sqrt(2.0 * np.pi)

# Switch between image and cosine series for the interval kernel; both are
# converged well past machine precision at this scale.
_THETA_SWITCH_T = 0.01
_LOG_TINY = 40.0  # exp(-40) < 5e-18, safely below every tolerance used here


def _phi(u: np.ndarray, t: float) -> np.ndarray:
    return np.exp(-0.5 * u * u / t) / (SQRT_2PI * np.sqrt(t))


def gauss_kde_exact(sample, xs, t: float) -> np.ndarray:
    """Direct-sum Gaussian KDE; the oracle for every spectral evaluation."""
    if not t > 0:
        raise ValueError("bandwidth t must be positive")
    x = _as_sample(sample)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    return _phi(xs[:, None] - x[None, :], t).mean(axis=1)


def smooth_weights(weights: np.ndarray, t_unit: float) -> np.ndarray:
    """Evolve unit-interval node weights by the Neumann heat flow to time t."""
    c = cosine_moments(weights)
    k = np.arange(weights.size)
    c = c * np.exp(-0.5 * (np.pi * k) ** 2 * t_unit)
    return cosine_synthesis(c)


def gauss_kde_spectral(binned: BinnedHistogram, t: float) -> DensityEstimate1D:
    """Heat-equation (zero-flux) solution on the grid interval at time t.

    Coincides with the reflection-kernel estimator on the interval; in the
    interior of a grid padded by at least ~6*sqrt(t) it agrees with
    :func:`gauss_kde_exact` to a few parts in 1e4.
    """
    if not t > 0:
        raise ValueError("bandwidth t must be positive")
    grid = binned.grid
    vals = smooth_weights(binned.weights, t / grid.range ** 2) / grid.range
    vals[np.abs(vals) < 1e-15] = 0.0
    return DensityEstimate1D(grid, np.clip(vals, 0.0, None), t)


def theta_kernel_images(x, y, t: float, K: int | None = None):
    """Interval kernel via reflected Gaussian images.

    kappa(x, y; t) = sum_k phi(x, 2k + y; t) + phi(x, 2k - y; t), truncated
    where the neglected tail is below 1e-14.  Preferred for small t.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any((x < 0) | (x > 1)) or np.any((y < 0) | (y > 1)):
        raise ValueError("x and y must lie in [0, 1]")
    if K is None:
        # images at |2k| - 2 or further; keep exp(-(2K-2)^2/(2t)) negligible
        K = max(5, int(np.ceil(1.0 + 0.5 * np.sqrt(2.0 * t * _LOG_TINY))))
    ks = np.arange(-K, K + 1)
    shape = np.broadcast(x, y).shape
    xb = np.broadcast_to(x, shape)[..., None]
    yb = np.broadcast_to(y, shape)[..., None]
    total = _phi(xb - (2 * ks + yb), t) + _phi(xb - (2 * ks - yb), t)
    out = total.sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def theta_kernel_cosine(x, y, t: float, K: int | None = None):
    """Interval kernel via its cosine series; preferred for larger t."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any((x < 0) | (x > 1)) or np.any((y < 0) | (y > 1)):
        raise ValueError("x and y must lie in [0, 1]")
    if K is None:
        K = max(5, int(np.ceil(np.sqrt(2.0 * _LOG_TINY / t) / np.pi)))
    ks = np.arange(1, K + 1)
    damp = np.exp(-0.5 * (np.pi * ks) ** 2 * t)
    shape = np.broadcast(x, y).shape
    xb = np.broadcast_to(x, shape)[..., None]
    yb = np.broadcast_to(y, shape)[..., None]
    out = 1.0 + 2.0 * (damp * np.cos(np.pi * ks * xb) * np.cos(np.pi * ks * yb)).sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def theta_kernel(x, y, t: float):
    """Interval kernel, choosing the faster converging representation."""
    if t < _THETA_SWITCH_T:
        return theta_kernel_images(x, y, t)
    return theta_kernel_cosine(x, y, t)


def theta_estimator(sample, t: float, grid: Grid1D) -> DensityEstimate1D:
    """Reflection-kernel estimator of data living on the grid interval."""
    x = _as_sample(sample)
    if x.min() < grid.lo or x.max() > grid.hi:
        raise ValueError("data outside the grid interval")
    return gauss_kde_spectral(bin_linear(x, grid), t)


def theta_sample(y: float, t: float, rng: np.random.Generator, size=None):
    """Draw from the interval kernel centred at y by reflecting a normal draw.

    Y = y + N(0, t) is folded into [0, 1] by reflecting at both endpoints
    (W = Y mod 2 on [0, 2), then X = W if W <= 1 else 2 - W).
    """
    if not 0.0 <= y <= 1.0:
        raise ValueError("y must lie in [0, 1]")
    z = rng.normal(y, np.sqrt(t), size=size)
    w = np.mod(z, 2.0)
    x = np.where(w > 1.0, 2.0 - w, w)
    return float(x) if size is None else x


def mode_count(estimate: DensityEstimate1D) -> int:
    """Number of strict interior local maxima; plateaus count once."""
    v = estimate.values
    d = np.sign(np.diff(v))
    d = d[d != 0]
    if d.size == 0:
        return 0
    return int(np.sum((d[:-1] > 0) & (d[1:] < 0)))
