"""Histogram entropy of a spectrum observable.

Values are binned into ``L`` equal-width bins spanning their own
``[min, max]`` range, and the plug-in entropy of the bin frequencies is
returned in nats. Because the bin edges follow the data range, multiplying
the input by any positive constant leaves the counts and the entropy
unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyRequestError

EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class Histogram:
    bin_count: int
    y_min: float
    y_max: float
    counts: np.ndarray

    @property
    def width(self) -> float:
        return (self.y_max - self.y_min) / self.bin_count

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def bin_indices(values: np.ndarray, bins: int) -> np.ndarray:
    """Bin index of every value, row-wise over the last axis.

    The maximum lands in the last bin. A row with zero range puts every
    value in bin 0.
    """
    values = np.asarray(values, dtype=float)
    if values.shape[-1] == 0:
        raise EmptyRequestError("cannot bin an empty vector")
    if bins < 1:
        raise ValueError(f"bin count must be >= 1, got {bins}")
    lo = values.min(axis=-1, keepdims=True)
    hi = values.max(axis=-1, keepdims=True)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    idx = np.floor((values - lo) / safe * bins).astype(np.intp)
    np.clip(idx, 0, bins - 1, out=idx)
    idx[np.broadcast_to(span == 0, idx.shape)] = 0
    return idx


def histogram_counts(values: np.ndarray, bins: int) -> np.ndarray:
    """Counts with shape ``values.shape[:-1] + (bins,)``."""
    idx = bin_indices(values, bins)
    lead = idx.shape[:-1]
    rows = idx.reshape(-1, idx.shape[-1])
    offsets = np.arange(rows.shape[0])[:, None] * bins
    flat = np.bincount((rows + offsets).ravel(), minlength=rows.shape[0] * bins)
    return flat.reshape(*lead, bins)


def entropy_from_counts(counts: np.ndarray) -> np.ndarray:
    """Plug-in entropy (nats) of count vectors along the last axis, 0 log 0 = 0."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum(axis=-1, keepdims=True)
    p = counts / total
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(p), 0.0)
    # -0.0 would otherwise leak out of single-bin rows
    return -terms.sum(axis=-1) + 0.0


def build_histogram(values, bin_count: int) -> Histogram:
    values = np.asarray(values, dtype=float).ravel()
    counts = histogram_counts(values, bin_count)
    return Histogram(bin_count=bin_count, y_min=float(values.min()),
                     y_max=float(values.max()), counts=counts)


def estimate_entropy(hist: Histogram) -> float:
    return float(entropy_from_counts(hist.counts))


def spectrum_entropy(values, bins: int) -> float:
    return estimate_entropy(build_histogram(values, bins))


def entropy_rows(values: np.ndarray, bins: int) -> np.ndarray:
    """Vectorized :func:`spectrum_entropy` over the last axis."""
    return entropy_from_counts(histogram_counts(values, bins))


def _check_rho(rho: float) -> None:
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")


def theoretical_amplitude_entropy(bins: int, rho: float = 0.999) -> float:
    """Entropy constant of Rayleigh-distributed spectrum amplitudes of WGN.

    ``rho`` is the CDF level taken as the effective maximum of the data.
    """
    _check_rho(rho)
    if bins < 1:
        raise ValueError("bins must be >= 1")
    c1 = math.sqrt(-2.0 * math.log(1.0 - rho))
    return math.log(bins / (c1 * math.sqrt(2.0))) + EULER_GAMMA / 2.0 + 1.0


def theoretical_power_entropy(bins: int, rho: float = 0.999) -> float:
    """Entropy constant of exponentially distributed power bins of WGN.

    No noise power enters: the result depends only on ``bins`` and ``rho``.
    """
    _check_rho(rho)
    if bins < 1:
        raise ValueError("bins must be >= 1")
    c2 = -2.0 * math.log(1.0 - rho)
    return 1.0 + math.log(2.0 * bins / c2)
