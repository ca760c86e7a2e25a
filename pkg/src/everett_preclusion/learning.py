"""A deliberately simple learning and lineage model.

A relative-frequency device trained on ``n_train`` systems ends up in one
Everett copy per surviving frequency bin, each with the bin midpoint as its
learned expectation ``p_hat``. Its surprise at a later ``n_prime``-system run
is the absolute frequency error ``|k/n_prime - p_hat|``.

Lineages are deterministic bookkeeping of evolutionary-history weight: each
generation the lineage's expectation is "met" when the observed frequency of
a batch of ``n_g`` systems lies within ``tolerance`` of ``p_hat``, and the
lineage's cumulative log-weight accrues the log-mass of that event. No
sampling is involved anywhere.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .ensemble import build_ensemble
from .errors import AllPrecluded, InvalidTolerance
from .rules import survives_mask
from .threshold import survivor_report

# frequencies like 0.35 - 0.3 come out one ulp above 0.05
_CONTAIN_SLACK = 1e-12


@dataclass(frozen=True)
class TrainedDevice:
    p_hat: float
    bin_index: int
    n_train: int
    binning: object
    surviving_copies: frozenset


def train_device(prep, n_train, binning, rule):
    """One device per surviving bin, ordered by bin index."""
    report = survivor_report(prep, n_train, binning, rule)
    if not report.surviving_bins:
        raise AllPrecluded(f"no copy of the device survives at n_train = {n_train}")
    mids = binning.midpoints
    return [
        TrainedDevice(float(mids[j]), j, int(n_train), binning, report.surviving_bins)
        for j in sorted(report.surviving_bins)
    ]


@dataclass(frozen=True)
class SurpriseEntry:
    k: int
    observed_frequency: float
    log_weight: float
    surprise: float


@dataclass(frozen=True)
class SurpriseDistribution:
    p_hat: float
    n_prime: int
    entries: tuple
    weighted_mean_surprise: float
    precluded_mass: float

    @property
    def surviving_mass(self):
        return float(sum(np.exp(e.log_weight) for e in self.entries))


def predict_surprise(p_hat, prep, n_prime, rule):
    """Surprise over the surviving branches of an ``n_prime``-system run.

    Weights are not renormalized after preclusion: the mean is the plain
    weighted sum over survivors, and the precluded mass is reported beside it.
    """
    if n_prime < 1:
        raise ValueError(f"n_prime must be >= 1, got {n_prime}")
    ens = build_ensemble(prep, n_prime)
    lw = ens.log_weights
    alive = survives_mask(lw, rule)
    freq = ens.frequencies
    surprise = np.abs(freq - p_hat)
    entries = tuple(
        SurpriseEntry(int(k), float(freq[k]), float(lw[k]), float(surprise[k])) for k in np.flatnonzero(alive)
    )
    mean = float(np.sum(np.exp(lw[alive]) * surprise[alive]))
    precluded = float(np.exp(kernels.logsumexp(lw[~alive])))
    return SurpriseDistribution(float(p_hat), int(n_prime), entries, mean, precluded)


@dataclass(frozen=True)
class Lineage:
    p_hat: float
    tolerance: float
    batch_size: int
    log_weight: float = 0.0

    def __post_init__(self):
        # tolerance 1 is allowed: it is the "every outcome meets expectations" lineage
        if not 0.0 < self.tolerance <= 1.0:
            raise InvalidTolerance(f"tolerance must lie in (0, 1], got {self.tolerance!r}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.log_weight > 0.0:
            raise ValueError("initial log_weight must be <= 0")


def expectation_met_counts(lineage):
    """Counts ``m`` with ``|m/n_g - p_hat| <= tolerance``."""
    m = np.arange(lineage.batch_size + 1)
    return np.flatnonzero(np.abs(m / lineage.batch_size - lineage.p_hat) <= lineage.tolerance + _CONTAIN_SLACK)


def generation_log_mass(prep, lineage):
    """Log-weight of one generation meeting the lineage's expectation."""
    lw = kernels.binomial_log_pmf(lineage.batch_size, prep.p)
    mass = kernels.logsumexp(lw[expectation_met_counts(lineage)])
    # a full interval sums to 1 up to roundoff; weight cannot grow
    return min(mass, 0.0)


@dataclass(frozen=True, eq=False)
class LineageOutcome:
    lineage: Lineage
    log_mass_per_generation: float
    generation_precluded: int | None
    log_weight_trace: np.ndarray

    @property
    def survived(self):
        return self.generation_precluded is None


def run_lineages(prep, lineages, generations, rule, jobs=1):
    """Trace every lineage for ``generations`` generations (numbered from 1).

    ``generation_precluded`` is the first generation whose cumulative weight
    fails ``rule``, or ``None`` if the lineage survives them all.
    """
    if generations < 1:
        raise ValueError(f"generations must be >= 1, got {generations}")
    g = np.arange(1, generations + 1)

    def one(lin):
        slope = generation_log_mass(prep, lin)
        # multiply rather than accumulate: the trace is exactly linear in g
        trace = lin.log_weight + g * slope
        dead = np.flatnonzero(~survives_mask(trace, rule))
        first = int(g[dead[0]]) if dead.size else None
        trace.setflags(write=False)
        return LineageOutcome(lin, slope, first, trace)

    lineages = list(lineages)
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            return list(pool.map(one, lineages))
    return [one(lin) for lin in lineages]
