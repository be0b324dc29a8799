"""Batched, seed-addressed collection of detector statistics.

Trial ``t`` of user ``u`` always draws from ``trial_rng(seed, purpose,
truth, t, u)``, so results do not depend on chunking or thread count.
Scenarios that differ only in SNR, noise offset or frame length reuse the
same noise draws for a given key, which gives common random numbers for
paired comparisons.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .detectors import energy_statistic
from .entropy import entropy_rows
from .signal import FrameSource, Hypothesis, ScenarioConfig, trial_rng
from .spectral import amplitude, dft, power_density

THREADS_ENV = "ENTROPY_SENSING_THREADS"

MEASURE = 0
CALIBRATE = 1

OBSERVABLES = ("power", "amplitude", "energy")
CHUNK = 256


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        n = int(raw)
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1, got {raw!r}")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class TrialStats:
    """Per-trial statistics, each shaped ``(trials, users, frames)``."""

    power: np.ndarray | None
    amplitude: np.ndarray | None
    energy: np.ndarray | None
    gain: np.ndarray

    @property
    def trials(self) -> int:
        return self.gain.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        value = getattr(self, name)
        if value is None:
            raise KeyError(f"observable {name!r} was not collected")
        return value


def draw_samples(truth: Hypothesis, scenario: ScenarioConfig, seed: int, trials: range,
                 users: int = 1, frames: int = 1, purpose: int = MEASURE):
    """Raw samples ``(len(trials), users, frames, N)`` and gains ``(len(trials), users)``."""
    truth = Hypothesis(truth)
    n = scenario.frame_len
    out = np.empty((len(trials), users, frames, n))
    gains = np.empty((len(trials), users))
    for i, t in enumerate(trials):
        for u in range(users):
            src = FrameSource(truth, scenario, trial_rng(seed, purpose, int(truth), t, u))
            for f in range(frames):
                frame = next(src)
                out[i, u, f] = frame.samples
            gains[i, u] = frame.gain
    return out, gains


def _chunk_stats(args):
    truth, scenario, seed, trials, users, frames, purpose, bins, observables = args
    samples, gains = draw_samples(truth, scenario, seed, trials, users, frames, purpose)
    result = {"gain": gains}
    if "power" in observables or "amplitude" in observables:
        spec = dft(samples)
        if "power" in observables:
            result["power"] = entropy_rows(power_density(spec).values, bins)
        if "amplitude" in observables:
            result["amplitude"] = entropy_rows(amplitude(spec).values, bins)
    if "energy" in observables:
        result["energy"] = energy_statistic(samples)
    return result


def collect_stats(truth: Hypothesis, scenario: ScenarioConfig, trials: int, seed: int, *,
                  users: int = 1, frames: int = 1, bins: int = 15, purpose: int = MEASURE,
                  observables=("power",), workers: int | None = None) -> TrialStats:
    """Simulate ``trials`` sensing events and reduce each frame to statistics."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    unknown = set(observables) - set(OBSERVABLES)
    if unknown:
        raise ValueError(f"unknown observables {sorted(unknown)}")
    workers = default_workers() if workers is None else workers
    jobs = [
        (truth, scenario, seed, range(start, min(start + CHUNK, trials)), users, frames,
         purpose, bins, tuple(observables))
        for start in range(0, trials, CHUNK)
    ]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_stats, jobs))
    else:
        parts = [_chunk_stats(job) for job in jobs]

    def cat(name):
        if name not in parts[0]:
            return None
        return np.concatenate([p[name] for p in parts], axis=0)

    return TrialStats(power=cat("power"), amplitude=cat("amplitude"),
                      energy=cat("energy"), gain=cat("gain"))
