"""Observation frames under the two hypotheses.

A frame is ``N`` real baseband samples: white Gaussian noise alone (H0), or
noise plus a rectangular-pulse BPSK waveform scaled by a block-fading gain
(H1). Every random draw goes through an explicit ``numpy.random.Generator``;
:func:`trial_rng` derives independent streams from a master seed and an
integer key so a trial is reproducible no matter which worker runs it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from typing import Iterator

import numpy as np

from .errors import EmptyRequestError


class Hypothesis(IntEnum):
    H0 = 0
    H1 = 1


class ChannelKind(str, Enum):
    AWGN = "awgn"
    RAYLEIGH = "rayleigh"


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for stream ``key`` under master ``seed``.

    Streams are addressed by position (``SeedSequence`` spawn keys), so the
    draws for ``key`` never depend on how many other streams were consumed.
    """
    seq = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SignalParams:
    symbol_rate: float = 1e6
    sample_rate: float = 64e6
    frame_len: int = 1024

    def __post_init__(self):
        if self.symbol_rate <= 0 or self.sample_rate <= 0:
            raise ValueError("rates must be positive")
        ratio = self.sample_rate / self.symbol_rate
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError(
                f"sample_rate {self.sample_rate} is not an integer multiple "
                f"of symbol_rate {self.symbol_rate}"
            )
        if not _is_power_of_two(int(self.frame_len)):
            raise ValueError(f"frame_len must be a power of two, got {self.frame_len}")

    @property
    def samples_per_symbol(self) -> int:
        return int(round(self.sample_rate / self.symbol_rate))


@dataclass(frozen=True)
class NoiseModel:
    nominal_power_dbmw: float = -95.0
    uncertainty_offset_db: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.nominal_power_dbmw) and math.isfinite(self.uncertainty_offset_db)):
            raise ValueError("noise power and offset must be finite")

    @property
    def nominal_power(self) -> float:
        """Nominal noise power in milliwatt."""
        return 10.0 ** (self.nominal_power_dbmw / 10.0)

    @property
    def actual_power(self) -> float:
        """Noise power actually generated, in milliwatt."""
        return 10.0 ** ((self.nominal_power_dbmw + self.uncertainty_offset_db) / 10.0)


@dataclass(frozen=True)
class ChannelModel:
    kind: ChannelKind = ChannelKind.RAYLEIGH

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))

    def draw_gain(self, rng: np.random.Generator) -> float:
        if self.kind is ChannelKind.AWGN:
            return 1.0
        # sqrt of a unit-mean exponential is Rayleigh with E[h^2] = 1
        return float(np.sqrt(rng.standard_exponential()))


@dataclass(frozen=True)
class ScenarioConfig:
    signal: SignalParams = field(default_factory=SignalParams)
    noise: NoiseModel = field(default_factory=NoiseModel)
    channel: ChannelModel = field(default_factory=ChannelModel)
    snr_db: float = -10.0

    def __post_init__(self):
        if not math.isfinite(self.snr_db):
            raise ValueError(f"snr_db must be finite, got {self.snr_db}")

    @property
    def frame_len(self) -> int:
        return self.signal.frame_len

    @property
    def amplitude(self) -> float:
        """BPSK amplitude giving average SNR ``snr_db`` over the actual noise.

        The amplitude tracks the generated noise power, so an uncertainty
        offset rescales the whole frame and leaves the SNR unchanged.
        """
        return math.sqrt(self.noise.actual_power * 10.0 ** (self.snr_db / 10.0))

    def with_snr(self, snr_db: float) -> "ScenarioConfig":
        return replace(self, snr_db=snr_db)

    def with_offset(self, offset_db: float) -> "ScenarioConfig":
        return replace(self, noise=replace(self.noise, uncertainty_offset_db=offset_db))

    def with_frame_len(self, frame_len: int) -> "ScenarioConfig":
        return replace(self, signal=replace(self.signal, frame_len=frame_len))


@dataclass(frozen=True)
class Frame:
    samples: np.ndarray
    truth: Hypothesis
    gain: float
    actual_noise_power: float

    def __len__(self):
        return len(self.samples)

    def scaled(self, c: float) -> "Frame":
        """Same realization with every sample multiplied by ``c``."""
        return replace(self, samples=self.samples * c, actual_noise_power=self.actual_noise_power * c * c)


def gen_bpsk_symbols(count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` equiprobable symbols from {+1, -1}."""
    if count < 1:
        raise EmptyRequestError("symbol count must be at least 1")
    return rng.integers(0, 2, size=count, dtype=np.int8) * 2 - 1


def synth_primary(params: SignalParams, num_samples: int, amplitude: float,
                  rng: np.random.Generator) -> np.ndarray:
    """Rectangular-pulse BPSK at ``params.samples_per_symbol`` samples each.

    The frame starts on a symbol boundary; a trailing partial symbol is
    truncated.
    """
    if amplitude < 0:
        raise ValueError("amplitude must be non-negative")
    if num_samples < 1:
        raise EmptyRequestError("num_samples must be at least 1")
    sps = params.samples_per_symbol
    symbols = gen_bpsk_symbols(-(-num_samples // sps), rng)
    return amplitude * np.repeat(symbols.astype(float), sps)[:num_samples]


def make_frame(truth: Hypothesis, scenario: ScenarioConfig, rng: np.random.Generator,
               gain: float | None = None) -> Frame:
    """Generate one frame under ``truth``.

    Draw order is fixed: fading gain (unless ``gain`` is supplied), then the
    ``N`` noise samples, then the symbols (H1 only). Keeping the noise ahead
    of the symbols means two scenarios that differ only in noise offset or
    SNR see the same standard-normal noise draws.
    """
    truth = Hypothesis(truth)
    if gain is None:
        gain = scenario.channel.draw_gain(rng)
    n = scenario.frame_len
    sigma = math.sqrt(scenario.noise.actual_power)
    samples = sigma * rng.standard_normal(n)
    if truth is Hypothesis.H1:
        samples += gain * synth_primary(scenario.signal, n, scenario.amplitude, rng)
    return Frame(samples=samples, truth=truth, gain=gain,
                 actual_noise_power=scenario.noise.actual_power)


class FrameSource:
    """Successive frames of one sensing event, drawn on demand.

    All frames of an event share one fading gain (the channel is constant
    over a sensing event and independent across events); noise and symbols
    are fresh per frame. ``limit`` caps the number of frames available.
    """

    def __init__(self, truth: Hypothesis, scenario: ScenarioConfig,
                 rng: np.random.Generator, limit: int | None = None):
        self.truth = Hypothesis(truth)
        self.scenario = scenario
        self.rng = rng
        self.limit = limit
        self.drawn = 0
        self._gain: float | None = None

    def __iter__(self) -> Iterator[Frame]:
        return self

    def __next__(self) -> Frame:
        if self.limit is not None and self.drawn >= self.limit:
            raise StopIteration
        frame = make_frame(self.truth, self.scenario, self.rng, gain=self._gain)
        self._gain = frame.gain
        self.drawn += 1
        return frame
