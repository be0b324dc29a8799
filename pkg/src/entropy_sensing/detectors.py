"""Single-sensor decision rules.

Entropy detectors decide H1 when the histogram entropy of the spectrum is
at or below ``lam``. The two-stage detector adds a gate ``lam +/- delta0``:
readings inside it pull a second, fresh frame and decide on the mean of
the two entropies. The energy detector is the fixed-threshold baseline.

Each rule exists twice: a per-frame function returning a result object,
and an array form (``*_rule``) applied to precomputed statistics by the
Monte Carlo code. The per-frame functions are thin wrappers over the array
forms so the two cannot drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable

import numpy as np

from .entropy import entropy_rows
from .errors import InsufficientDataError
from .signal import Frame, Hypothesis
from .spectral import amplitude, dft, power_density


class TwoBitDecision(IntEnum):
    """Local two-bit verdict; the integer value is the fusion weight."""

    D11 = 2
    D10 = 1
    D01 = -1
    D00 = -2

    @property
    def code(self) -> str:
        return self.name[1:]

    @classmethod
    def from_code(cls, code: str) -> "TwoBitDecision":
        return cls[f"D{code}"]

    def complement(self) -> "TwoBitDecision":
        return TwoBitDecision(-int(self))

    @property
    def hypothesis(self) -> Hypothesis:
        return Hypothesis.H1 if self > 0 else Hypothesis.H0


@dataclass(frozen=True)
class Thresholds:
    lam: float | None = None
    delta0: float = 0.0
    energy_lambda: float | None = None

    def __post_init__(self):
        if self.delta0 < 0:
            raise ValueError(f"delta0 must be >= 0, got {self.delta0}")
        if self.lam is not None and self.lam <= 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if self.energy_lambda is not None and self.energy_lambda <= 0:
            raise ValueError(f"energy_lambda must be > 0, got {self.energy_lambda}")


@dataclass(frozen=True)
class OneStageResult:
    statistic: float
    decision: Hypothesis


@dataclass(frozen=True)
class TwoStageResult:
    h_l1: float
    h_l2: float | None
    stages_used: int
    decision: Hypothesis
    two_bit: TwoBitDecision


# -- statistics -------------------------------------------------------------

def power_entropy(samples: np.ndarray, bins: int) -> np.ndarray:
    """Entropy of the power spectrum of each row of ``samples``."""
    return entropy_rows(power_density(dft(samples)).values, bins)


def amplitude_entropy(samples: np.ndarray, bins: int) -> np.ndarray:
    return entropy_rows(amplitude(dft(samples)).values, bins)


def energy_statistic(samples: np.ndarray) -> np.ndarray:
    """Mean squared sample value of each row."""
    samples = np.asarray(samples, dtype=float)
    return np.mean(samples * samples, axis=-1)


# -- array rules ------------------------------------------------------------

def entropy_rule(statistic, lam: float) -> np.ndarray:
    return np.asarray(statistic) <= lam


def energy_rule(statistic, energy_lambda: float) -> np.ndarray:
    return np.asarray(statistic) >= energy_lambda


def two_stage_rule(h1, h2, lam: float, delta0: float):
    """Two-stage outcome for arrays of first/second-stage entropies.

    Returns ``(decision, second_stage, weight)``: the binary H1 decision,
    whether the second stage ran, and the two-bit fusion weight in
    {2, 1, -1, -2}. ``h2`` is only consulted where the second stage runs.
    """
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    low, high = lam - delta0, lam + delta0
    sure_h1 = h1 <= low
    sure_h0 = h1 > high
    doubted = ~(sure_h1 | sure_h0)
    mean_h1 = (h1 + h2) / 2.0 <= lam
    decision = sure_h1 | (doubted & mean_h1)

    second = np.where(h2 <= low, 2, np.where(h2 > high, -2, np.where(mean_h1, 1, -1)))
    weight = np.where(sure_h1, 2, np.where(sure_h0, -2, second)).astype(np.int8)
    return decision, doubted, weight


# -- per-frame detectors ----------------------------------------------------

def _decision(flag) -> Hypothesis:
    return Hypothesis.H1 if bool(flag) else Hypothesis.H0


def detect_entropy_amplitude(frame: Frame, lam: float, bins: int = 15) -> OneStageResult:
    stat = float(amplitude_entropy(frame.samples, bins))
    return OneStageResult(stat, _decision(entropy_rule(stat, lam)))


def detect_entropy_power(frame: Frame, lam: float, bins: int = 15) -> OneStageResult:
    stat = float(power_entropy(frame.samples, bins))
    return OneStageResult(stat, _decision(entropy_rule(stat, lam)))


def detect_energy(frame: Frame, energy_lambda: float) -> OneStageResult:
    if energy_lambda <= 0:
        raise ValueError("energy_lambda must be positive")
    stat = float(energy_statistic(frame.samples))
    return OneStageResult(stat, _decision(energy_rule(stat, energy_lambda)))


def _two_stage(frames: Iterable[Frame], th: Thresholds, bins: int) -> TwoStageResult:
    if th.lam is None:
        raise ValueError("two-stage detection needs thresholds.lam")
    it = iter(frames)
    try:
        first = next(it)
    except StopIteration:
        raise InsufficientDataError("frame source is empty") from None
    h1 = float(power_entropy(first.samples, bins))
    if h1 <= th.lam - th.delta0 or h1 > th.lam + th.delta0:
        decision, _, weight = two_stage_rule(h1, h1, th.lam, th.delta0)
        return TwoStageResult(h1, None, 1, _decision(decision), TwoBitDecision(int(weight)))
    try:
        second = next(it)
    except StopIteration:
        raise InsufficientDataError("second stage needs another frame") from None
    h2 = float(power_entropy(second.samples, bins))
    decision, _, weight = two_stage_rule(h1, h2, th.lam, th.delta0)
    return TwoStageResult(h1, h2, 2, _decision(decision), TwoBitDecision(int(weight)))


def two_stage_detect(frames: Iterable[Frame], th: Thresholds, bins: int = 15) -> TwoStageResult:
    """Run the two-stage entropy detector on frames pulled from ``frames``.

    The second frame is requested only when the first-stage entropy falls
    in ``(lam - delta0, lam + delta0]``.

    Raises:
        InsufficientDataError: the source has no frame when one is needed.
    """
    return _two_stage(frames, th, bins)


def two_stage_two_bit(frames: Iterable[Frame], th: Thresholds, bins: int = 15) -> TwoBitDecision:
    return _two_stage(frames, th, bins).two_bit
