"""Normalized DFT and the amplitude / power-density observables.

The transform is ``X[k] = (1/N) sum_n x[n] exp(-2j*pi*k*n/N)``. It is an
iterative radix-2 decimation-in-time FFT working in place on a batch of
rows; real input is packed two rows per complex transform.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import UnsupportedLengthError
from .signal import Frame


@dataclass(frozen=True)
class Spectrum:
    bins: np.ndarray

    def __len__(self):
        return self.bins.shape[-1]


@dataclass(frozen=True)
class AmplitudeSpectrum:
    values: np.ndarray


@dataclass(frozen=True)
class PowerSpectrum:
    values: np.ndarray


@lru_cache(maxsize=None)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


@lru_cache(maxsize=None)
def _twiddles(size: int) -> np.ndarray:
    half = size // 2
    return np.exp(-2j * np.pi * np.arange(half) / size)


def _check_length(n: int) -> None:
    if n < 1 or n & (n - 1):
        raise UnsupportedLengthError(f"transform length must be a power of two, got {n}")


def fft_complex(x: np.ndarray) -> np.ndarray:
    """Unnormalized forward transform along the last axis."""
    x = np.asarray(x)
    n = x.shape[-1]
    _check_length(n)
    a = x[..., _bit_reversal(n)].astype(np.complex128)
    lead = a.shape[:-1]
    size = 2
    while size <= n:
        half = size // 2
        view = a.reshape(*lead, n // size, size)
        t = view[..., half:] * _twiddles(size)
        view[..., half:] = view[..., :half] - t
        view[..., :half] += t
        size *= 2
    return a


def fft_real(x: np.ndarray) -> np.ndarray:
    """Unnormalized forward transform of real rows (last axis)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    _check_length(n)
    lead = x.shape[:-1]
    rows = x.reshape(-1, n)
    m = rows.shape[0]
    if m < 2:
        return fft_complex(rows).reshape(*lead, n)
    if m % 2:
        rows = np.vstack([rows, np.zeros((1, n))])
    z = fft_complex(rows[0::2] + 1j * rows[1::2])
    zr = np.conj(z[:, (-np.arange(n)) % n])
    out = np.empty(rows.shape, dtype=np.complex128)
    out[0::2] = 0.5 * (z + zr)
    out[1::2] = -0.5j * (z - zr)
    return out[:m].reshape(*lead, n)


def dft_array(x: np.ndarray) -> np.ndarray:
    """Normalized transform of the last axis of ``x`` (real or complex)."""
    x = np.asarray(x)
    n = x.shape[-1]
    raw = fft_complex(x) if np.iscomplexobj(x) else fft_real(x)
    return raw / n


def dft(frame: Frame | np.ndarray) -> Spectrum:
    samples = frame.samples if isinstance(frame, Frame) else frame
    return Spectrum(bins=dft_array(samples))


def amplitude(spec: Spectrum) -> AmplitudeSpectrum:
    return AmplitudeSpectrum(values=np.abs(spec.bins))


def power_density(spec: Spectrum) -> PowerSpectrum:
    b = spec.bins
    return PowerSpectrum(values=b.real * b.real + b.imag * b.imag)

