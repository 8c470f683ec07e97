"""Per-instance training weights: online bagging and its fairness-aware variants."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import ConfigError, POSITIVE, PROTECTED, UNPROTECTED, RandomSource

PLAIN = "plain"
FAIR = "fair"
CUSTOM = "custom"
OVERSAMPLE = "oversample"
OVER_AND_UNDER = "overunder"
MODES = (PLAIN, FAIR, CUSTOM, OVERSAMPLE, OVER_AND_UNDER)

# long-form aliases accepted from configs
_ALIASES = {"oversample_protected": OVERSAMPLE, "over_and_under": OVER_AND_UNDER}


@dataclass(frozen=True)
class SamplingPolicy:
    mode: str = FAIR
    lam: float = 6.0
    alpha: Optional[float] = None

    def __post_init__(self):
        mode = _ALIASES.get(self.mode, self.mode)
        object.__setattr__(self, "mode", mode)
        if mode not in MODES:
            raise ConfigError(f"unknown sampling mode {self.mode!r}")
        if self.lam <= 0:
            raise ConfigError("Poisson rate must be positive")
        if mode == CUSTOM and self.alpha is None:
            raise ConfigError("custom sampling needs alpha")
        if self.alpha is not None and self.alpha <= 0:
            raise ConfigError("alpha must be positive")

    def multiplier(self, group: int, label: int, disc: float) -> float:
        """Factor applied to the Poisson draw for an instance of (group, label)."""
        mode = self.mode
        if mode == PLAIN or label != POSITIVE:
            return 1.0
        if mode == FAIR:
            return disc if group == UNPROTECTED and disc > 0 else 1.0
        if mode == CUSTOM:
            return self.alpha if group == UNPROTECTED else 1.0
        if group == PROTECTED:
            return 1.0 + max(0.0, disc)
        if mode == OVER_AND_UNDER and disc > 0:
            return disc
        return 1.0


def poisson_weight(policy: SamplingPolicy, rng: RandomSource) -> int:
    return rng.poisson(policy.lam)


def fair_weight(policy: SamplingPolicy, instance, current_disc: float, k: float) -> float:
    """Down-weight unprotected positives by the current discrimination when it is positive."""
    if instance.group == UNPROTECTED and instance.label == POSITIVE and current_disc > 0:
        return current_disc * k
    return float(k)


def custom_weight(policy: SamplingPolicy, instance, k: float) -> float:
    alpha = policy.alpha
    if alpha is None or alpha <= 0:
        raise ConfigError("custom weighting needs alpha > 0")
    if instance.group == UNPROTECTED and instance.label == POSITIVE:
        return alpha * k
    return float(k)


def ablation_weight(policy: SamplingPolicy, instance, current_disc: float, k: float) -> float:
    if policy.mode not in (OVERSAMPLE, OVER_AND_UNDER):
        raise ConfigError(f"ablation weighting is undefined for mode {policy.mode!r}")
    return policy.multiplier(instance.group, instance.label, current_disc) * k


def instance_weight(policy: SamplingPolicy, instance, current_disc: float, k: float) -> float:
    return policy.multiplier(instance.group, instance.label, current_disc) * k
