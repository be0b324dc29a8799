"""Reference computations that share no code with the package."""

import math

import numpy as np
from scipy import integrate, stats


def direct_dft(x):
    """O(N^2) normalized DFT with exact phase reduction."""
    x = np.asarray(x)
    n = x.shape[-1]
    k = np.arange(n)
    w = np.exp(-2j * np.pi * ((np.outer(k, k) % n) / n))
    return (x @ w.T) / n


def loop_histogram(values, bins):
    """Histogram by explicit edge comparison, max in the last bin."""
    values = [float(v) for v in values]
    lo, hi = min(values), max(values)
    counts = [0] * bins
    if hi == lo:
        counts[0] = len(values)
        return counts
    width = (hi - lo) / bins
    for v in values:
        i = 0
        while i < bins - 1 and v >= lo + (i + 1) * width:
            i += 1
        counts[i] += 1
    return counts


def loop_entropy(counts):
    n = sum(counts)
    return -sum(c / n * math.log(c / n) for c in counts if c)


def power_entropy_by_quadrature(bins, rho):
    """Histogram entropy of exponential data via h(Y) - log(Y_max / L), numerically."""
    dist = stats.expon(scale=2.0)  # 2*sigma1^2 with sigma1^2 = 1
    h, _ = integrate.quad(lambda y: -dist.pdf(y) * dist.logpdf(y), 0, np.inf)
    y_max = dist.ppf(rho)
    return h - math.log(y_max / bins)


def amplitude_entropy_by_quadrature(bins, rho):
    dist = stats.rayleigh(scale=1.0)
    h, _ = integrate.quad(lambda x: -dist.pdf(x) * dist.logpdf(x), 0, np.inf)
    x_max = dist.ppf(rho)
    return h - math.log(x_max / bins)


TWO_BIT_WEIGHT = {"11": 2, "10": 1, "01": -1, "00": -2}


def fuse_two_bit_reference(codes):
    z = sum(TWO_BIT_WEIGHT[c] for c in codes)
    if z > 0:
        return 1
    if z < 0:
        return 0
    positives = sum(1 for c in codes if TWO_BIT_WEIGHT[c] > 0)
    return 1 if 2 * positives > len(codes) else 0


def fuse_counting_reference(bits, n):
    return 1 if sum(bits) >= n else 0
