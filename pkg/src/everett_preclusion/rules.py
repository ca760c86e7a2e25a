"""Existence indicators: zero preclusion and positive preclusion.

A positive rule precludes every outcome whose weight is *at most* its
threshold; the boundary itself is precluded. Surviving weights are never
renormalized.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidEps, LogWeightPositive, WeightOutOfRange

ZERO = "zero"
POSITIVE = "positive"

#: Nonzero weights below this are flagged as numerically indistinguishable from 0.
NEAR_ZERO = 1e-300
_LOG_NEAR_ZERO = math.log(NEAR_ZERO)
_SLACK = 1e-12


@dataclass(frozen=True)
class PreclusionRule:
    kind: str = ZERO
    eps_p: float | None = None
    eps_is_log10: bool = False

    def __post_init__(self):
        if self.kind == ZERO:
            if self.eps_p is not None:
                raise InvalidEps("the zero rule takes no threshold")
            return
        if self.kind != POSITIVE:
            raise InvalidEps(f"unknown rule kind {self.kind!r}")
        if self.eps_p is None or not math.isfinite(self.eps_p):
            raise InvalidEps("a positive rule needs a finite threshold")
        if self.eps_is_log10:
            if not self.eps_p < 0.0:
                raise InvalidEps(f"log10 threshold must be negative, got {self.eps_p!r}")
        elif not 0.0 < self.eps_p < 1.0:
            raise InvalidEps(f"threshold must satisfy 0 < eps < 1, got {self.eps_p!r}")

    @classmethod
    def zero(cls):
        return cls(ZERO)

    @classmethod
    def positive(cls, eps_p):
        return cls(POSITIVE, float(eps_p))

    @classmethod
    def positive_log10(cls, log10_eps):
        return cls(POSITIVE, float(log10_eps), eps_is_log10=True)

    @property
    def log_eps(self):
        """Natural log of the threshold; ``-inf`` for the zero rule."""
        if self.kind == ZERO:
            return -math.inf
        if self.eps_is_log10:
            return self.eps_p * math.log(10.0)
        return math.log(self.eps_p)

    @property
    def eps(self):
        """Threshold as a linear weight (may underflow to 0.0 for log10 input)."""
        if self.kind == ZERO:
            return 0.0
        return 10.0 ** self.eps_p if self.eps_is_log10 else self.eps_p

    def describe(self):
        d = {"kind": self.kind}
        if self.kind == POSITIVE:
            d["log10_eps" if self.eps_is_log10 else "eps"] = self.eps_p
        return d


@dataclass(frozen=True)
class ExistenceVerdict:
    exists: int
    weight: float
    log_weight: float
    near_zero: bool = False


def exists(weight, rule):
    """Existence verdict for an outcome of the given weight."""
    weight = float(weight)
    if not (-_SLACK <= weight <= 1.0 + _SLACK) or math.isnan(weight):
        raise WeightOutOfRange(f"weight {weight!r} outside [0, 1]")
    log_weight = math.log(weight) if weight > 0.0 else -math.inf
    if rule.kind == ZERO:
        return ExistenceVerdict(int(weight != 0.0), weight, log_weight, 0.0 < weight < NEAR_ZERO)
    if rule.eps_is_log10:
        alive = log_weight > rule.log_eps
    else:
        alive = weight > rule.eps_p
    return ExistenceVerdict(int(alive), weight, log_weight)


def exists_log(log_weight, rule):
    """Log-space twin of :func:`exists`, safe for weights far below 1e-308."""
    log_weight = float(log_weight)
    if log_weight > _SLACK or math.isnan(log_weight):
        raise LogWeightPositive(f"log-weight {log_weight!r} > 0")
    weight = math.exp(log_weight)
    if rule.kind == ZERO:
        alive = log_weight != -math.inf
        return ExistenceVerdict(int(alive), weight, log_weight, alive and log_weight < _LOG_NEAR_ZERO)
    return ExistenceVerdict(int(log_weight > rule.log_eps), weight, log_weight)


def survives_mask(log_weights, rule):
    """Vectorized existence bits for an array of log-weights."""
    lw = np.asarray(log_weights, dtype=np.float64)
    if np.any(lw > _SLACK) or np.any(np.isnan(lw)):
        raise LogWeightPositive("log-weights must be <= 0")
    return lw > rule.log_eps


def survivors(weights, rule):
    """Labels whose log-weight survives ``rule``.

    ``weights`` is an iterable of ``(label, log_weight)`` pairs or a mapping.
    """
    items = list(weights.items()) if hasattr(weights, "items") else list(weights)
    if not items:
        return set()
    labels, lws = zip(*items)
    mask = survives_mask(lws, rule)
    return {label for label, alive in zip(labels, mask) if alive}
