"""Branch weights for N identical two-state measurements.

Branches are coalesced by the count ``k`` of "1" results; entry ``k`` of an
ensemble carries the summed weight of all C(N, k) outcome sequences. Weights
are stored as natural logs so that N in the millions does not underflow.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidState, KOutOfRange, NTooLargeForOracle
from .weights import TOL

ORACLE_MAX_N = 20


@dataclass(frozen=True)
class QubitPreparation:
    """Single-system state ``c1|1> + c2|2>``; ``p`` is the weight of ``|1>``."""

    c1: complex
    c2: complex
    p: float

    def __init__(self, c1, c2, p=None):
        c1, c2 = complex(c1), complex(c2)
        norm = abs(c1) ** 2 + abs(c2) ** 2
        if abs(norm - 1.0) > TOL:
            raise InvalidState(f"|c1|^2 + |c2|^2 = {norm!r}, expected 1")
        if p is None:
            p = abs(c1) ** 2
        elif abs(p - abs(c1) ** 2) > TOL:
            raise InvalidState("p does not match |c1|^2")
        # sqrt round trips can overshoot [0, 1] by an ulp
        p = min(max(float(p), 0.0), 1.0)
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", c2)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_p(cls, p, phase=0.0):
        """Real-amplitude preparation that keeps ``p`` bit-exact."""
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise InvalidState(f"p = {p!r} outside [0, 1]")
        return cls(math.sqrt(p) * cmath.exp(1j * phase), math.sqrt(1.0 - p), p=p)


@dataclass(frozen=True)
class FrequencyBinning:
    """``m`` equal-width bins ``[j/m, (j+1)/m)``, the last one closed at 1."""

    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"bin count must be a positive integer, got {self.m!r}")

    @property
    def midpoints(self):
        return (np.arange(self.m) + 0.5) / self.m

    @property
    def edges(self):
        return np.arange(self.m + 1) / self.m

    def index(self, frequency):
        """Bin holding ``frequency``; a value on a boundary goes to the upper bin."""
        if not 0.0 <= frequency <= 1.0:
            raise ValueError(f"frequency {frequency!r} outside [0, 1]")
        return min(int(math.floor(frequency * self.m)), self.m - 1)

    def count_index(self, k, n):
        """Exact bin of the rational frequency ``k/n``."""
        return min(k * self.m // n, self.m - 1)


@dataclass(frozen=True, eq=False)
class BranchEnsemble:
    n: int
    p: float
    log_weights: np.ndarray

    @property
    def weights(self):
        return np.exp(self.log_weights)

    @property
    def frequencies(self):
        return np.arange(self.n + 1) / self.n

    def total_log_weight(self):
        return kernels.logsumexp(self.log_weights)


def branch_log_weight(n, k, p):
    """``ln[C(n,k) p^k (1-p)^(n-k)]``; ``-inf`` for impossible ``k``.

    Never forms factorials; the log-gamma difference is evaluated in the
    cancellation-free form used by :mod:`everett_preclusion.kernels`.
    """
    if not 0 <= k <= n:
        raise KOutOfRange(f"k = {k} outside [0, {n}]")
    return kernels.binomial_log_pmf_at(n, k, p)


def build_ensemble(prep, n):
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    lw = kernels.binomial_log_pmf(n, prep.p)
    lw.setflags(write=False)
    return BranchEnsemble(int(n), prep.p, lw)


def bin_weights(ensemble, binning):
    """``[(bin_index, log_weight), ...]`` for every bin, empty bins at ``-inf``."""
    lw = kernels.bin_logsumexp(ensemble.log_weights, binning.m)
    return [(j, float(v)) for j, v in enumerate(lw)]


def enumerate_sequences_oracle(prep, n):
    """Per-count weights by brute force over all 2**n outcome sequences.

    Independent of the log-gamma path; exists only to check it.
    """
    if n > ORACLE_MAX_N:
        raise NTooLargeForOracle(f"n = {n} > {ORACLE_MAX_N}")
    p = prep.p
    q = 1.0 - p
    # grow every sequence by one outcome at a time: weight and count of "1"s
    seq_w, seq_k = [1.0], [0]
    for _ in range(n):
        seq_w = [w * q for w in seq_w] + [w * p for w in seq_w]
        seq_k = seq_k + [k + 1 for k in seq_k]
    out = [0.0] * (n + 1)
    for w, k in zip(seq_w, seq_k):
        out[k] += w
    return out
