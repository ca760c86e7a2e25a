"""Search for N_B: the measurement count past which positive preclusion leaves
only the Born-closest frequency bin(s) in existence.

Nothing guarantees that the single-survivor state, once reached, persists for
every larger N, so a candidate ``n`` is accepted only if the state holds on the
whole window ``[n, n + stability_window]``. Every evaluated ``n`` is kept in the
scan log, so non-monotonic flips stay visible.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .ensemble import bin_weights, build_ensemble
from .errors import AllPrecludedPersistent, InvalidEps, PreclusionError
from .rules import POSITIVE, PreclusionRule, survives_mask, survivors

DEFAULT_WINDOW = 32
LINEAR_LIMIT = 1000
GEOMETRIC_RATIO = 1.25
TIE_DECIMALS = 12

FOUND = "found"
NOT_FOUND = "not_found"
BORN_ON_BOUNDARY = "BornOnBoundary"
NON_MONOTONE = "NonMonotone"


def born_bins(p, binning):
    """Bins whose midpoint is closest to ``p``; two of them on an exact tie."""
    dist = np.round(np.abs(binning.midpoints - p), TIE_DECIMALS)
    return frozenset(int(j) for j in np.flatnonzero(dist == dist.min()))


@dataclass(frozen=True)
class SurvivorReport:
    n: int
    surviving_bins: frozenset
    born_bin_indices: frozenset
    is_theorem_state: bool
    bin_log_weights: tuple = ()


def _as_rule(eps):
    if isinstance(eps, PreclusionRule):
        return eps
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise InvalidEps(f"eps_p must satisfy 0 < eps_p < 1, got {eps!r}")
    return PreclusionRule.positive(eps)


def survivor_report(prep, n, binning, rule):
    """Build, bin and preclude the ``n``-measurement ensemble."""
    binned = bin_weights(build_ensemble(prep, n), binning)
    alive = frozenset(survivors(binned, rule))
    born = born_bins(prep.p, binning)
    return SurvivorReport(
        n=int(n),
        surviving_bins=alive,
        born_bin_indices=born,
        is_theorem_state=bool(alive) and alive <= born,
        bin_log_weights=tuple(lw for _, lw in binned),
    )


def count_survivors(prep, n, rule):
    """Per-count comparison mode: surviving ``k`` with no frequency binning."""
    lw = build_ensemble(prep, n).log_weights
    return {int(k) for k in np.flatnonzero(survives_mask(lw, rule))}


@dataclass(frozen=True)
class ScanEntry:
    n: int
    survivor_count: int
    is_theorem_state: bool


@dataclass(frozen=True)
class ThresholdResult:
    n_b: int | None
    status: str
    stability_window: int
    born_bins: frozenset
    flags: tuple = ()
    scan_log: tuple = ()
    #: one row of ``m`` bin log-weights per scan_log entry
    scan_log_weights: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def found(self):
        return self.n_b is not None


class _Scanner:
    """Evaluates (and caches) the theorem state at arbitrary ``n``."""

    def __init__(self, p, binning, rule, jobs=1):
        self.p = p
        self.m = binning.m
        self.log_eps = rule.log_eps
        born = born_bins(p, binning)
        self.born = born
        self.born_mask = np.zeros(self.m, dtype=bool)
        self.born_mask[list(born)] = True
        self.jobs = max(1, int(jobs))
        self.cache = {}

    def evaluate(self, ns):
        todo = np.array(sorted({int(n) for n in ns} - self.cache.keys()), dtype=np.int64)
        if todo.size == 0:
            return
        if self.jobs > 1 and todo.size > self.jobs:
            chunks = np.array_split(todo, self.jobs)
            with ThreadPoolExecutor(self.jobs) as pool:
                parts = list(pool.map(lambda c: kernels.bin_log_weight_matrix(c, self.p, self.m), chunks))
            mat = np.vstack(parts)
        else:
            mat = kernels.bin_log_weight_matrix(todo, self.p, self.m)
        alive = mat > self.log_eps
        counts = alive.sum(axis=1)
        theorem = (counts > 0) & ~np.any(alive & ~self.born_mask, axis=1)
        born_alive = np.any(alive & self.born_mask, axis=1)
        for i, n in enumerate(todo):
            self.cache[int(n)] = (int(counts[i]), bool(theorem[i]), bool(born_alive[i]), mat[i])

    def window_holds(self, n, window):
        ns = range(n, n + window + 1)
        self.evaluate(ns)
        return all(self.cache[k][1] for k in ns)

    def first_window_start(self, lo, hi, window):
        """Smallest start in [lo, hi] whose window holds, by exhaustive scan."""
        self.evaluate(range(lo, hi + window + 1))
        run = 0
        # walk downward from the top counting consecutive theorem states
        good_from = {}
        for k in range(hi + window, lo - 1, -1):
            run = run + 1 if self.cache[k][1] else 0
            good_from[k] = run
        for k in range(lo, hi + 1):
            if good_from[k] >= window + 1:
                return k
        return None


def _bisect(scanner, lo, hi, window):
    """Smallest start in (lo, hi] with a holding window, given it holds at hi
    and assuming it fails at lo; post-verified, walking back on violations."""
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if scanner.window_holds(mid, window):
            hi = mid
        else:
            lo = mid
    non_monotone = False
    while hi > 1 and scanner.window_holds(hi - 1, window):
        non_monotone = True
        hi -= 1
    return hi, non_monotone


def find_nb(prep, binning, eps_p, n_max, stability_window=DEFAULT_WINDOW, method="auto", jobs=1):
    """Smallest ``n <= n_max`` whose whole stability window is in the theorem state.

    ``method`` selects the scan order: ``"linear"`` evaluates every n,
    ``"auto"`` goes stride-1 up to 1000 and then probes geometrically with
    verified bisection, ``"bisect"`` bisects over the full range.
    """
    rule = _as_rule(eps_p)
    if rule.kind != POSITIVE:
        raise InvalidEps("find_nb needs a positive preclusion rule")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if stability_window < 0:
        raise ValueError(f"stability_window must be >= 0, got {stability_window}")
    w = int(stability_window)
    sc = _Scanner(prep.p, binning, rule, jobs=jobs)
    flags = []

    n_b = None
    if method == "linear":
        n_b = sc.first_window_start(1, n_max, w)
    elif method == "auto":
        top = min(n_max, LINEAR_LIMIT)
        n_b = sc.first_window_start(1, top, w)
        lo = top
        while n_b is None and lo < n_max:
            probe = min(n_max, max(lo + 1, math.ceil(lo * GEOMETRIC_RATIO)))
            if sc.window_holds(probe, w):
                n_b, walked = _bisect(sc, lo, probe, w)
                if walked:
                    flags.append(NON_MONOTONE)
            lo = probe
    elif method == "bisect":
        if sc.window_holds(1, w):
            n_b = 1
        elif sc.window_holds(n_max, w):
            n_b, walked = _bisect(sc, 1, n_max, w)
            if walked:
                flags.append(NON_MONOTONE)
    else:
        raise ValueError(f"unknown scan method {method!r}")

    ns = sorted(sc.cache)
    log = tuple(ScanEntry(n, sc.cache[n][0], sc.cache[n][1]) for n in ns)
    mat = np.array([sc.cache[n][3] for n in ns]) if ns else np.empty((0, binning.m))
    flipped = any(
        a.is_theorem_state and not b.is_theorem_state and b.n == a.n + 1 for a, b in zip(log, log[1:])
    )
    if flipped and NON_MONOTONE not in flags:
        flags.append(NON_MONOTONE)
    if len(sc.born) == 2:
        flags.append(BORN_ON_BOUNDARY)

    result = ThresholdResult(
        n_b=n_b,
        status=FOUND if n_b is not None else NOT_FOUND,
        stability_window=w,
        born_bins=sc.born,
        flags=tuple(flags),
        scan_log=log,
        scan_log_weights=mat,
    )
    if n_b is None and not any(sc.cache[n][2] for n in ns):
        err = AllPrecludedPersistent(
            f"the Born bin(s) {sorted(sc.born)} are precluded at every scanned n <= {ns[-1]}; "
            f"eps_p is too large for this binning"
        )
        err.result = result
        raise err
    return result


@dataclass(frozen=True)
class SweepRow:
    eps_p: float
    n_b: int | None
    status: str
    flags: tuple = ()
    error: str | None = None


def sweep_nb(prep, binning, eps_list, n_max, stability_window=DEFAULT_WINDOW, method="auto", jobs=1):
    """One :func:`find_nb` per threshold, rows in input order.

    Errors are recorded in their row instead of aborting the sweep.
    """
    eps_list = [float(e) for e in eps_list]
    if not eps_list:
        raise InvalidEps("eps list is empty")

    def row(eps):
        try:
            r = find_nb(prep, binning, eps, n_max, stability_window, method=method)
        except PreclusionError as exc:
            return SweepRow(eps, None, "error", error=f"{type(exc).__name__}: {exc}")
        return SweepRow(eps, r.n_b, r.status, r.flags)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            return list(pool.map(row, eps_list))
    return [row(e) for e in eps_list]


__all__ = [
    "SurvivorReport",
    "ThresholdResult",
    "ScanEntry",
    "SweepRow",
    "born_bins",
    "survivor_report",
    "count_survivors",
    "find_nb",
    "sweep_nb",
]
