"""Empirical false-alarm calibration of decision thresholds.

All thresholds come from statistics simulated under H0. One-stage entropy
and energy thresholds are nearest-rank quantiles; the two-stage threshold
is found by bisection on the end-to-end false-alarm rate, since the
doubted region makes the rate a nonlinear function of ``lam``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable

import numpy as np

from .detectors import two_stage_rule
from .errors import CalibrationRangeError, InsufficientTrialsError
from .montecarlo import CALIBRATE, collect_stats
from .signal import Hypothesis, ScenarioConfig

MIN_TAIL_COUNT = 20
PF_TOLERANCE = 0.005
MAX_BISECTIONS = 40


class DetectorKind(str, Enum):
    ENTROPY_AMPLITUDE = "entropy-amplitude"
    ENTROPY_POWER = "entropy-power"
    ENERGY = "energy"
    TWO_STAGE = "two-stage"


@dataclass(frozen=True)
class CalibrationSpec:
    detector: DetectorKind
    target_pf: float
    trials: int = 100_000
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    delta0: float = 0.0
    bins: int = 15

    def __post_init__(self):
        object.__setattr__(self, "detector", DetectorKind(self.detector))
        if not 0.0 < self.target_pf < 1.0:
            raise ValueError(f"target_pf must lie in (0, 1), got {self.target_pf}")
        if self.trials < 1000:
            raise ValueError(f"calibration needs >= 1000 trials, got {self.trials}")
        if self.delta0 < 0:
            raise ValueError("delta0 must be >= 0")


def _check_tail(n: int, target_pf: float) -> None:
    if target_pf * n < MIN_TAIL_COUNT:
        raise InsufficientTrialsError(
            f"{n} trials leave fewer than {MIN_TAIL_COUNT} samples in a {target_pf} tail"
        )


def lower_quantile(stats, p: float) -> float:
    """Nearest-rank ``p`` quantile: the smallest sample with empirical CDF >= p."""
    s = np.sort(np.asarray(stats, dtype=float).ravel())
    rank = max(1, math.ceil(p * s.size - 1e-9))
    return float(s[rank - 1])


def one_stage_threshold(stats, target_pf: float) -> float:
    """``lam`` with ``P(stat <= lam | H0) ~= target_pf`` (low entropy decides H1)."""
    stats = np.asarray(stats).ravel()
    _check_tail(stats.size, target_pf)
    return lower_quantile(stats, target_pf)


def energy_threshold(stats, target_pf: float) -> float:
    """``lam_E`` with ``P(T >= lam_E | H0) ~= target_pf``."""
    stats = np.asarray(stats).ravel()
    _check_tail(stats.size, target_pf)
    return lower_quantile(stats, 1.0 - target_pf)


def bisect_threshold(rate: Callable[[float], float], target: float, lo: float, hi: float,
                     tol: float = PF_TOLERANCE, max_iter: int = MAX_BISECTIONS) -> float:
    """Bisection on a non-decreasing empirical rate ``rate(lam)``.

    Narrows onto the smallest ``lam`` reaching ``target`` and returns
    whichever bracket end is closer to it.

    Raises:
        CalibrationRangeError: ``target`` is not bracketed by ``[lo, hi]``,
            or the closest achievable rate misses it by more than ``tol``.
    """
    r_lo, r_hi = rate(lo), rate(hi)
    if not r_lo <= target <= r_hi:
        raise CalibrationRangeError(
            f"target rate {target} outside [{r_lo}, {r_hi}] for lam in [{lo}, {hi}]"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        r_mid = rate(mid)
        if r_mid < target:
            lo, r_lo = mid, r_mid
        else:
            hi, r_hi = mid, r_mid
    best, r_best = (lo, r_lo) if abs(r_lo - target) < abs(r_hi - target) else (hi, r_hi)
    if abs(r_best - target) > tol:
        raise CalibrationRangeError(
            f"closest rate {r_best} misses target {target} by more than {tol}"
        )
    return best


def two_stage_pf(h1, h2, lam: float, delta0: float) -> float:
    return float(np.mean(two_stage_rule(h1, h2, lam, delta0)[0]))


def two_stage_threshold(h1, h2, delta0: float, target_pf: float, bins: int = 15) -> float:
    """Bisect ``lam`` so the two-stage rule on H0 pairs hits ``target_pf``."""
    h1 = np.asarray(h1, dtype=float).ravel()
    h2 = np.asarray(h2, dtype=float).ravel()
    _check_tail(h1.size, target_pf)
    return bisect_threshold(lambda lam: two_stage_pf(h1, h2, lam, delta0),
                            target_pf, 0.0, math.log(bins) + 1.0)


def _h0_stats(spec: CalibrationSpec, seed: int, observable: str, frames: int):
    return collect_stats(Hypothesis.H0, spec.scenario, spec.trials, seed, frames=frames,
                         bins=spec.bins, purpose=CALIBRATE, observables=(observable,))[observable]


def calibrate_one_stage(spec: CalibrationSpec, seed: int) -> float:
    observable = {
        DetectorKind.ENTROPY_AMPLITUDE: "amplitude",
        DetectorKind.ENTROPY_POWER: "power",
    }.get(spec.detector)
    if observable is None:
        raise ValueError(f"calibrate_one_stage does not handle {spec.detector.value}")
    _check_tail(spec.trials, spec.target_pf)
    return one_stage_threshold(_h0_stats(spec, seed, observable, 1), spec.target_pf)


def calibrate_energy(spec: CalibrationSpec, seed: int) -> float:
    """Energy threshold at the scenario's nominal noise power."""
    if spec.detector is not DetectorKind.ENERGY:
        raise ValueError(f"calibrate_energy does not handle {spec.detector.value}")
    _check_tail(spec.trials, spec.target_pf)
    nominal = spec.scenario.with_offset(0.0)
    stats = collect_stats(Hypothesis.H0, nominal, spec.trials, seed, purpose=CALIBRATE,
                          observables=("energy",))["energy"]
    return energy_threshold(stats, spec.target_pf)


def calibrate_two_stage(spec: CalibrationSpec, seed: int) -> float:
    if spec.detector is not DetectorKind.TWO_STAGE:
        raise ValueError(f"calibrate_two_stage does not handle {spec.detector.value}")
    _check_tail(spec.trials, spec.target_pf)
    stats = _h0_stats(spec, seed, "power", 2)
    return two_stage_threshold(stats[:, 0, 0], stats[:, 0, 1], spec.delta0,
                               spec.target_pf, spec.bins)


def calibrate(spec: CalibrationSpec, seed: int) -> float:
    """Dispatch to the calibration routine for ``spec.detector``."""
    if spec.detector is DetectorKind.ENERGY:
        return calibrate_energy(spec, seed)
    if spec.detector is DetectorKind.TWO_STAGE:
        return calibrate_two_stage(spec, seed)
    return calibrate_one_stage(spec, seed)


@dataclass(frozen=True)
class CalibrationRecord:
    detector: str
    frame_len: int
    bins: int
    delta0: float
    target_pf: float
    threshold: float
    trials: int
    seed: int
    channel: str = "rayleigh"
    nominal_power_dbmw: float = -95.0
    rule: str = ""
    users: int = 1

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "CalibrationRecord":
        known = {f: data[f] for f in cls.__dataclass_fields__ if f in data}
        return cls(**known)


def save_records(path, records) -> None:
    records = [records] if isinstance(records, CalibrationRecord) else list(records)
    Path(path).write_text(json.dumps([r.to_dict() for r in records], indent=2) + "\n")


def load_records(path) -> list[CalibrationRecord]:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = [data]
    return [CalibrationRecord.from_dict(d) for d in data]
