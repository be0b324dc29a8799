"""Decision fusion across cooperating sensors.

One-bit reports are combined with an n-out-of-K counting rule (OR, AND and
majority VOTING are special cases). Two-bit reports from the two-stage
detector are mapped to weights {2, 1, -1, -2} and summed; a zero sum is
broken by the count of positive reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .detectors import (
    Thresholds,
    TwoBitDecision,
    detect_entropy_power,
    entropy_rule,
    two_stage_detect,
    two_stage_rule,
    two_stage_two_bit,
)
from .signal import FrameSource, Hypothesis, ScenarioConfig


@dataclass(frozen=True)
class FusionRule:
    kind: str
    n: int | None = None

    KINDS = ("and", "or", "voting", "n-out-of-k", "two-bit")

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in self.KINDS:
            raise ValueError(f"unknown fusion rule {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "n-out-of-k" and (self.n is None or self.n < 1):
            raise ValueError("n-out-of-k needs n >= 1")

    @classmethod
    def parse(cls, text: str) -> "FusionRule":
        """Parse ``and``, ``or``, ``voting``, ``two-bit`` or ``<n>-out-of-k``."""
        text = text.strip().lower()
        if text.endswith("-out-of-k") and text[0].isdigit():
            return cls("n-out-of-k", int(text.split("-", 1)[0]))
        return cls(text)

    @property
    def is_two_bit(self) -> bool:
        return self.kind == "two-bit"

    @property
    def label(self) -> str:
        return f"{self.n}-out-of-k" if self.kind == "n-out-of-k" else self.kind

    def resolve_n(self, users: int) -> int:
        """Counting threshold for ``users`` one-bit reports."""
        if self.kind == "or":
            n = 1
        elif self.kind == "and":
            n = users
        elif self.kind == "voting":
            n = users // 2 + 1
        elif self.kind == "n-out-of-k":
            n = self.n
        else:
            raise ValueError("two-bit fusion has no counting threshold")
        if not 1 <= n <= users:
            raise ValueError(f"n={n} out of range for {users} users")
        return n


@dataclass(frozen=True)
class FusionResult:
    decision: Hypothesis
    aggregate: int


def map_two_bit_to_int(code: TwoBitDecision | str) -> int:
    if isinstance(code, str):
        code = TwoBitDecision.from_code(code)
    return int(TwoBitDecision(code))


def fuse_two_bit_array(weights) -> np.ndarray:
    """Fused H1 decisions for a ``(..., users)`` array of two-bit weights."""
    weights = np.asarray(weights)
    users = weights.shape[-1]
    z = weights.sum(axis=-1)
    positives = (weights > 0).sum(axis=-1)
    return (z > 0) | ((z == 0) & (positives > users / 2))


def fuse_counts_array(decisions, n: int) -> np.ndarray:
    """Fused H1 decisions for a ``(..., users)`` array of one-bit decisions."""
    return np.asarray(decisions).sum(axis=-1) >= n


def fuse_two_bit(reports: Sequence[TwoBitDecision | str]) -> FusionResult:
    if len(reports) == 0:
        raise ValueError("no reports to fuse")
    weights = np.array([map_two_bit_to_int(r) for r in reports])
    decision = bool(fuse_two_bit_array(weights))
    return FusionResult(Hypothesis(int(decision)), int(weights.sum()))


def fuse_n_out_of_k(decisions: Sequence[int | bool | Hypothesis], n: int) -> FusionResult:
    bits = np.array([int(d) for d in decisions])
    if bits.size == 0:
        raise ValueError("no decisions to fuse")
    if not 1 <= n <= bits.size:
        raise ValueError(f"n={n} out of range for {bits.size} decisions")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("one-bit decisions must be 0 or 1")
    return FusionResult(Hypothesis(int(bits.sum() >= n)), int(bits.sum()))


def fused_decisions(power: np.ndarray, rule: FusionRule, lam: float, delta0: float = 0.0,
                    local: str = "one-stage"):
    """Fused decisions from per-user power entropies ``(trials, users, frames)``.

    Returns ``(decision, second_stage)`` where ``second_stage`` flags, per
    trial and user, whether a local two-stage detector pulled a second frame.
    """
    users = power.shape[1]
    if rule.is_two_bit or local == "two-stage":
        decision, second, weight = two_stage_rule(power[..., 0], power[..., 1], lam, delta0)
        if rule.is_two_bit:
            return fuse_two_bit_array(weight), second
        return fuse_counts_array(decision, rule.resolve_n(users)), second
    if local != "one-stage":
        raise ValueError(f"unknown local detector {local!r}")
    decision = entropy_rule(power[..., 0], lam)
    return fuse_counts_array(decision, rule.resolve_n(users)), np.zeros(decision.shape, bool)


def run_cooperative_round(scenario: ScenarioConfig, users: int, rule: FusionRule,
                          th: Thresholds, bins: int, truth: Hypothesis,
                          rng, local: str = "one-stage") -> FusionResult:
    """One sensing round: independent local observations, then fusion.

    ``rng`` is either one generator, spawned into independent per-user
    streams, or a sequence holding one generator per user.
    """
    if users < 1:
        raise ValueError("users must be >= 1")
    if isinstance(rng, (list, tuple)):
        streams = list(rng)
        if len(streams) != users:
            raise ValueError("need one generator per user")
    else:
        streams = rng.spawn(users)
    if rule.is_two_bit:
        codes = [two_stage_two_bit(FrameSource(truth, scenario, r), th, bins) for r in streams]
        return fuse_two_bit(codes)
    if local == "two-stage":
        bits = [int(two_stage_detect(FrameSource(truth, scenario, r), th, bins).decision)
                for r in streams]
    else:
        bits = [int(detect_entropy_power(next(FrameSource(truth, scenario, r)), th.lam, bins).decision)
                for r in streams]
    return fuse_n_out_of_k(bits, rule.resolve_n(users))
