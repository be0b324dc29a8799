"""Monte Carlo experiments: Pd/Pf estimation, sweeps, ROC, Γ and CSV output.

Every measurement point simulates ``trials`` H1 events and ``trials`` H0
events. Detectors evaluated in the same call see the same frames (common
random numbers), and H0 statistics are shared across an SNR sweep since H0
frames do not depend on the SNR.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .calibration import (
    DetectorKind,
    bisect_threshold,
    energy_threshold,
    one_stage_threshold,
    two_stage_threshold,
)
from .cooperative import FusionRule, fused_decisions
from .detectors import Thresholds, energy_rule, entropy_rule, two_stage_rule
from .errors import ConfigurationError, InsufficientTrialsError
from .montecarlo import CALIBRATE, MEASURE, TrialStats, collect_stats
from .signal import Hypothesis, ScenarioConfig

Z95 = NormalDist().inv_cdf(0.975)

CSV_COLUMNS = (
    "scenario", "detector", "rule", "users", "snr_db", "pf_target",
    "pd_hat", "pd_lo", "pd_hi", "pf_hat", "pf_lo", "pf_hi",
    "gamma_h1", "gamma_h0", "trials", "seed",
)


def wilson_interval(successes: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("n must be positive")
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    # the bounds are exactly 0 and 1 at the extremes; avoid rounding residue
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class PairedDifference:
    mean: float
    lo: float
    hi: float

    @property
    def half_width(self) -> float:
        return (self.hi - self.lo) / 2.0

    @property
    def excludes_zero(self) -> bool:
        return self.lo > 0.0 or self.hi < 0.0


def paired_difference(a, b, z: float = Z95) -> PairedDifference:
    """Normal-theory interval for ``mean(a - b)`` over paired 0/1 outcomes."""
    d = np.asarray(a, dtype=float).ravel() - np.asarray(b, dtype=float).ravel()
    n = d.size
    if n < 2:
        raise ValueError("need at least two pairs")
    mean = float(d.mean())
    se = float(d.std(ddof=1)) / math.sqrt(n)
    return PairedDifference(mean, mean - z * se, mean + z * se)


@dataclass
class MetricsRow:
    scenario: str
    detector: str
    snr_db: float
    pf_target: float
    pd_hat: float | None
    pd_lo: float | None
    pd_hi: float | None
    pf_hat: float | None
    pf_lo: float | None
    pf_hi: float | None
    trials: int
    seed: int
    rule: str = ""
    users: int = 1
    gamma_h1: float | None = None
    gamma_h0: float | None = None

    def as_csv(self) -> list[str]:
        out = []
        for name in CSV_COLUMNS:
            value = getattr(self, name)
            if value is None:
                out.append("")
            elif isinstance(value, float):
                out.append(repr(value))
            else:
                out.append(str(value))
        return out


def rows_to_csv(rows: Sequence[MetricsRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.as_csv())
    return buf.getvalue()


def write_csv(path, rows: Sequence[MetricsRow]) -> None:
    Path(path).write_text(rows_to_csv(rows))


# -- detectors --------------------------------------------------------------

@dataclass(frozen=True)
class DetectorSpec:
    """A single-sensor detector bound to its configuration.

    ``frame_len`` overrides the scenario's frame length (used for the 2N
    one-stage comparison).
    """

    kind: DetectorKind
    bins: int = 15
    delta0: float = 0.0
    frame_len: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", DetectorKind(self.kind))
        if self.delta0 < 0:
            raise ValueError("delta0 must be >= 0")

    users = 1

    @property
    def label(self) -> str:
        parts = []
        if self.kind is DetectorKind.TWO_STAGE:
            parts.append(f"delta0={self.delta0:g}")
        if self.frame_len is not None:
            parts.append(f"N={self.frame_len}")
        return self.kind.value + (f"[{';'.join(parts)}]" if parts else "")

    @property
    def rule(self) -> str:
        return ""

    @property
    def observable(self) -> str:
        return {
            DetectorKind.ENTROPY_AMPLITUDE: "amplitude",
            DetectorKind.ENERGY: "energy",
        }.get(self.kind, "power")

    @property
    def frames(self) -> int:
        return 2 if self.kind is DetectorKind.TWO_STAGE else 1

    @property
    def is_two_stage(self) -> bool:
        return self.kind is DetectorKind.TWO_STAGE

    def scenario_for(self, scenario: ScenarioConfig) -> ScenarioConfig:
        return scenario if self.frame_len is None else scenario.with_frame_len(self.frame_len)

    def decide(self, stats: TrialStats, th: Thresholds):
        """``(decision, second_stage)`` per trial; ``second_stage`` is None for one-stage rules."""
        x = stats[self.observable][:, 0]
        if self.kind is DetectorKind.ENERGY:
            if th.energy_lambda is None:
                raise ConfigurationError("energy detector is not calibrated")
            return energy_rule(x[:, 0], th.energy_lambda), None
        if th.lam is None:
            raise ConfigurationError(f"{self.label} is not calibrated")
        if self.kind is DetectorKind.TWO_STAGE:
            decision, second, _ = two_stage_rule(x[:, 0], x[:, 1], th.lam, self.delta0)
            return decision, second
        return entropy_rule(x[:, 0], th.lam), None

    def thresholds_from_h0(self, h0: TrialStats, target_pf: float) -> Thresholds:
        x = h0[self.observable][:, 0]
        if self.kind is DetectorKind.ENERGY:
            return Thresholds(energy_lambda=energy_threshold(x[:, 0], target_pf))
        if self.kind is DetectorKind.TWO_STAGE:
            lam = two_stage_threshold(x[:, 0], x[:, 1], self.delta0, target_pf, self.bins)
            return Thresholds(lam=lam, delta0=self.delta0)
        return Thresholds(lam=one_stage_threshold(x[:, 0], target_pf))


@dataclass(frozen=True)
class CooperativeSpec:
    """``users`` sensors with local entropy-power detectors and a fusion rule.

    Two-bit fusion always uses two-stage locals; counting rules use
    ``local`` ("one-stage" or "two-stage").
    """

    rule: FusionRule
    users: int = 5
    local: str = "one-stage"
    bins: int = 15
    delta0: float = 0.0
    frame_len: int | None = None

    def __post_init__(self):
        if isinstance(self.rule, str):
            object.__setattr__(self, "rule", FusionRule.parse(self.rule))
        if self.users < 1:
            raise ValueError("users must be >= 1")
        if self.local not in ("one-stage", "two-stage"):
            raise ValueError(f"unknown local detector {self.local!r}")
        if not self.rule.is_two_bit:
            self.rule.resolve_n(self.users)

    observable = "power"

    @property
    def kind(self) -> str:
        return "cooperative"

    @property
    def is_two_stage(self) -> bool:
        return self.rule.is_two_bit or self.local == "two-stage"

    @property
    def frames(self) -> int:
        return 2 if self.is_two_stage else 1

    @property
    def label(self) -> str:
        local = "two-stage" if self.is_two_stage else "one-stage"
        parts = []
        if self.is_two_stage:
            parts.append(f"delta0={self.delta0:g}")
        if self.frame_len is not None:
            parts.append(f"N={self.frame_len}")
        return f"cooperative-{local}" + (f"[{';'.join(parts)}]" if parts else "")

    def scenario_for(self, scenario: ScenarioConfig) -> ScenarioConfig:
        return scenario if self.frame_len is None else scenario.with_frame_len(self.frame_len)

    def _fused(self, stats: TrialStats, lam: float):
        return fused_decisions(stats["power"], self.rule, lam, self.delta0, self.local)

    def decide(self, stats: TrialStats, th: Thresholds):
        if th.lam is None:
            raise ConfigurationError(f"{self.label} is not calibrated")
        decision, second = self._fused(stats, th.lam)
        return decision, (second if self.is_two_stage else None)

    def thresholds_from_h0(self, h0: TrialStats, target_pf: float) -> Thresholds:
        if target_pf * h0.trials < 20:
            raise InsufficientTrialsError("too few H0 trials for the fused false-alarm target")
        lam = bisect_threshold(lambda lam: float(np.mean(self._fused(h0, lam)[0])),
                               target_pf, 0.0, math.log(self.bins) + 1.0)
        return Thresholds(lam=lam, delta0=self.delta0)


Detector = DetectorSpec | CooperativeSpec


# -- statistics collection --------------------------------------------------

class StatsCache:
    """Memoizes :func:`collect_stats` per (hypothesis, scenario, layout)."""

    def __init__(self, seed: int, trials: int, purpose: int = MEASURE, workers: int | None = None):
        self.seed = seed
        self.trials = trials
        self.purpose = purpose
        self.workers = workers
        self._store: dict = {}

    def get(self, truth: Hypothesis, scenario: ScenarioConfig, detectors: Sequence[Detector]) -> TrialStats:
        users = max(d.users for d in detectors)
        frames = max(d.frames for d in detectors)
        bins = detectors[0].bins
        if any(d.bins != bins for d in detectors):
            raise ConfigurationError("detectors sharing frames must use the same bin count")
        observables = tuple(sorted({d.observable for d in detectors}))
        if truth is Hypothesis.H0:
            # H0 frames never use the SNR
            scenario = scenario.with_snr(0.0)
        key = (truth, scenario, users, frames, bins, observables)
        if key not in self._store:
            self._store[key] = collect_stats(
                truth, scenario, self.trials, self.seed, users=users, frames=frames, bins=bins,
                purpose=self.purpose, observables=observables, workers=self.workers)
        return self._store[key]


def _group_by_scenario(scenario: ScenarioConfig, detectors: Sequence[Detector]):
    groups: dict = {}
    for d in detectors:
        groups.setdefault((d.scenario_for(scenario), d.users, d.bins), []).append(d)
    return groups


def calibrate_detectors(scenario: ScenarioConfig, detectors: Sequence[Detector], target_pf: float,
                        trials: int, seed: int, workers: int | None = None) -> dict:
    """Thresholds for each detector at ``target_pf``, from one H0 calibration set."""
    if not 0.0 < target_pf < 1.0:
        raise ValueError(f"target_pf must lie in (0, 1), got {target_pf}")
    cache = StatsCache(seed, trials, CALIBRATE, workers)
    nominal = scenario.with_offset(0.0)
    out = {}
    for (sc, _, _), group in _group_by_scenario(nominal, detectors).items():
        h0 = cache.get(Hypothesis.H0, sc, group)
        for d in group:
            out[d] = d.thresholds_from_h0(h0, target_pf)
    return out


# -- measurement ------------------------------------------------------------

def scenario_id(scenario: ScenarioConfig) -> str:
    off = scenario.noise.uncertainty_offset_db
    return (f"{scenario.channel.kind.value}-N{scenario.frame_len}"
            f"-P{scenario.noise.nominal_power_dbmw:g}dBm-off{off:+g}dB")


def _gamma(second) -> float | None:
    if second is None:
        return None
    return 1.0 + float(np.mean(second))


def _row(scenario, detector, target_pf, trials, seed, d1=None, d0=None, s1=None, s0=None):
    row = MetricsRow(
        scenario=scenario_id(detector.scenario_for(scenario)), detector=detector.label,
        snr_db=float(scenario.snr_db), pf_target=float(target_pf),
        pd_hat=None, pd_lo=None, pd_hi=None, pf_hat=None, pf_lo=None, pf_hi=None,
        trials=trials, seed=seed, rule=getattr(detector.rule, "label", detector.rule),
        users=detector.users, gamma_h1=_gamma(s1), gamma_h0=_gamma(s0),
    )
    if d1 is not None:
        k = int(np.sum(d1))
        row.pd_hat = k / d1.size
        row.pd_lo, row.pd_hi = wilson_interval(k, d1.size)
    if d0 is not None:
        k = int(np.sum(d0))
        row.pf_hat = k / d0.size
        row.pf_lo, row.pf_hi = wilson_interval(k, d0.size)
    return row


@dataclass(frozen=True)
class Point:
    """A scenario, a detector and its calibrated thresholds."""

    scenario: ScenarioConfig
    detector: Detector
    thresholds: Thresholds | None
    target_pf: float = float("nan")


def _require(th: Thresholds | None, detector) -> Thresholds:
    if th is None:
        raise ConfigurationError(f"no calibrated thresholds for {detector.label}")
    return th


def measure(scenario: ScenarioConfig, detectors: Sequence[Detector], thresholds: dict,
            target_pf: float, trials: int, seed: int, cache: StatsCache | None = None,
            hypotheses=(Hypothesis.H1, Hypothesis.H0)) -> list[MetricsRow]:
    """One row per detector at ``scenario``; detectors share frames where layouts agree."""
    cache = cache or StatsCache(seed, trials)
    results = {}
    for (sc, _, _), group in _group_by_scenario(scenario, detectors).items():
        per_truth = {t: cache.get(t, sc, group) for t in hypotheses}
        for d in group:
            th = _require(thresholds.get(d), d)
            d1 = s1 = d0 = s0 = None
            if Hypothesis.H1 in per_truth:
                d1, s1 = d.decide(per_truth[Hypothesis.H1], th)
            if Hypothesis.H0 in per_truth:
                d0, s0 = d.decide(per_truth[Hypothesis.H0], th)
            results[d] = _row(scenario, d, target_pf, trials, seed, d1, d0, s1, s0)
    return [results[d] for d in detectors]


def estimate_pd_pf(point: Point, trials: int, seed: int, workers: int | None = None) -> MetricsRow:
    """Pd and Pf of one calibrated detector with Wilson bounds (and Γ if two-stage)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    th = _require(point.thresholds, point.detector)
    return measure(point.scenario, [point.detector], {point.detector: th}, point.target_pf,
                   trials, seed, StatsCache(seed, trials, MEASURE, workers))[0]


@dataclass(frozen=True)
class SweepSpec:
    scenario: ScenarioConfig
    detectors: tuple
    snr_grid: tuple
    target_pf: float = 0.1
    trials: int = 10_000
    seed: int = 0
    calibration_trials: int = 100_000
    thresholds: dict | None = field(default=None, hash=False, compare=False)
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "detectors", tuple(self.detectors))
        object.__setattr__(self, "snr_grid", tuple(float(s) for s in self.snr_grid))
        if not self.snr_grid:
            raise ConfigurationError("SNR grid is empty")
        if not self.detectors:
            raise ConfigurationError("no detectors selected")
        if self.trials < 100:
            raise ConfigurationError(f"need >= 100 trials per point, got {self.trials}")
        if not 0.0 < self.target_pf < 1.0:
            raise ConfigurationError("target_pf must lie in (0, 1)")

    def resolve_thresholds(self) -> dict:
        if self.thresholds is not None:
            missing = [d.label for d in self.detectors if d not in self.thresholds]
            if missing:
                raise ConfigurationError(f"missing calibration for {', '.join(missing)}")
            return self.thresholds
        return calibrate_detectors(self.scenario, self.detectors, self.target_pf,
                                   self.calibration_trials, self.seed, self.workers)


def sweep_snr(spec: SweepSpec) -> list[MetricsRow]:
    """Rows ordered by SNR, then by detector."""
    thresholds = spec.resolve_thresholds()
    cache = StatsCache(spec.seed, spec.trials, MEASURE, spec.workers)
    rows = []
    for snr in spec.snr_grid:
        rows.extend(measure(spec.scenario.with_snr(snr), spec.detectors, thresholds,
                            spec.target_pf, spec.trials, spec.seed, cache))
    return rows


def roc_curve(scenario: ScenarioConfig, detectors: Sequence[Detector], pf_grid: Sequence[float],
              trials: int, seed: int, calibration_trials: int = 100_000,
              workers: int | None = None, thresholds: dict | None = None) -> list[MetricsRow]:
    """Calibrate at each target Pf, then measure; rows ordered by Pf, then detector.

    ``thresholds`` maps target Pf to a detector-to-thresholds dict and skips
    calibration for those targets.
    """
    if not pf_grid:
        raise ConfigurationError("Pf grid is empty")
    for pf in pf_grid:
        if not 0.0 < pf < 1.0:
            raise ConfigurationError(f"target Pf must lie in (0, 1), got {pf}")
    cal = StatsCache(seed, calibration_trials, CALIBRATE, workers)
    cache = StatsCache(seed, trials, MEASURE, workers)
    rows = []
    for pf in pf_grid:
        if thresholds is not None and pf in thresholds:
            th = thresholds[pf]
        else:
            th = {}
            for (sc, _, _), group in _group_by_scenario(scenario.with_offset(0.0), detectors).items():
                h0 = cal.get(Hypothesis.H0, sc, group)
                th.update({d: d.thresholds_from_h0(h0, pf) for d in group})
        rows.extend(measure(scenario, detectors, th, pf, trials, seed, cache))
    return rows


def noise_uncertainty_sweep(scenario: ScenarioConfig, detectors: Sequence[Detector],
                            offsets_db: Sequence[float], target_pf: float, trials: int, seed: int,
                            calibration_trials: int = 100_000, workers: int | None = None,
                            thresholds: dict | None = None) -> list[MetricsRow]:
    """Thresholds fixed at the nominal noise power; actual noise offset per row.

    All offsets reuse the same noise draws, so scale-invariant detectors
    reach identical decisions at every offset.
    """
    if not offsets_db:
        raise ConfigurationError("offset grid is empty")
    if thresholds is None:
        thresholds = calibrate_detectors(scenario, detectors, target_pf, calibration_trials,
                                         seed, workers)
    rows = []
    for off in offsets_db:
        rows.extend(measure(scenario.with_offset(float(off)), detectors, thresholds, target_pf,
                            trials, seed, StatsCache(seed, trials, MEASURE, workers)))
    return rows


def gamma_sweep(spec: SweepSpec, hypothesis: Hypothesis = Hypothesis.H1) -> list[MetricsRow]:
    """Γ = 1 + P(second stage) per SNR under ``hypothesis``; Pd or Pf filled accordingly."""
    hypothesis = Hypothesis(hypothesis)
    for d in spec.detectors:
        if not d.is_two_stage:
            raise ConfigurationError(f"{d.label} has no second stage")
    thresholds = spec.resolve_thresholds()
    cache = StatsCache(spec.seed, spec.trials, MEASURE, spec.workers)
    grid = spec.snr_grid if hypothesis is Hypothesis.H1 else spec.snr_grid[:1]
    rows = []
    for snr in grid:
        rows.extend(measure(spec.scenario.with_snr(snr), spec.detectors, thresholds,
                            spec.target_pf, spec.trials, spec.seed, cache, hypotheses=(hypothesis,)))
    return rows
