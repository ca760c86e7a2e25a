"""Hot numeric kernels: binomial log-mass, per-bin log-sum-exp, scan matrices.

Every kernel exists twice, a numba-jitted loop (``*_numba``) and a vectorized
numpy version (``*_numpy``). The public names at the bottom of the module are
bound to one or the other according to :data:`everett_preclusion._jit.USE_NUMBA`.
Both versions agree to within a few ulps; they are not bitwise identical.

The binomial log-mass is not the naive ``lgamma(n+1) - lgamma(k+1) - ...``:
that difference cancels catastrophically (``lgamma(1e6 + 1)`` is about 1.3e7,
so its rounding error alone is ~1e-9). Instead the log-gamma difference is
split into Stirling remainders and a deviance term, following C. Loader,
"Fast and accurate computation of binomial probabilities" (2000), which keeps
the error relative to the log-mass itself.
"""

import math

import numpy as np

from ._jit import USE_NUMBA, njit

__all__ = [
    "binomial_log_pmf",
    "binomial_log_pmf_at",
    "bin_starts",
    "bin_logsumexp",
    "bin_log_weight_matrix",
    "logsumexp",
    "BACKEND",
]

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# log(n!) - log(sqrt(2 pi n) (n/e)^n) for n = 0..15 (entry 0 is unused)
_STIRLERR = np.array([
    0.0,
    0.08106146679532725821967026,
    0.04134069595540929409382208,
    0.02767792568499833914878929,
    0.02079067210376509311152277,
    0.01664469118982119216319487,
    0.01387612882307074799874573,
    0.01189670994589177009505572,
    0.01041126526197209649747857,
    0.009255462182712732917728637,
    0.008330563433362871256469319,
    0.007573675487951840794972024,
    0.006942840107209529865664153,
    0.006408994188004207068439631,
    0.005951370112758847735624416,
    0.00555473355196280137103869,
])
_S0, _S1, _S2, _S3, _S4 = 1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188


def _log_p_q(p):
    # log(1 - p) is exact-argument for p >= 0.5, so use it there; this also
    # makes log p == log(1 - p) bit-for-bit at p = 0.5.
    lp = math.log(p)
    lq = math.log(1.0 - p) if p >= 0.5 else math.log1p(-p)
    return lp, lq


_log_p_q_jit = njit(_log_p_q)


@njit
def _stirlerr(n):
    if n <= 15.0:
        return _STIRLERR[int(n)]
    nn = n * n
    if n > 500.0:
        return (_S0 - _S1 / nn) / n
    if n > 80.0:
        return (_S0 - (_S1 - _S2 / nn) / nn) / n
    if n > 35.0:
        return (_S0 - (_S1 - (_S2 - _S3 / nn) / nn) / nn) / n
    return (_S0 - (_S1 - (_S2 - (_S3 - _S4 / nn) / nn) / nn) / nn) / n


@njit
def _bd0(x, np_):
    """Deviance ``x log(x/np) + np - x`` without cancellation near x = np."""
    if abs(x - np_) < 0.1 * (x + np_):
        v = (x - np_) / (x + np_)
        s = (x - np_) * v
        ej = 2.0 * x * v
        v2 = v * v
        for j in range(1, 1000):
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
        return s
    r = x / np_
    # subnormal p: the ratio overflows, its log does not
    lr = math.log(r) if r < np.inf else math.log(x) - math.log(np_)
    return x * lr + np_ - x


@njit
def _log_pmf_at(n, k, p, lp, lq):
    if p == 0.0:
        return 0.0 if k == 0 else -np.inf
    if p == 1.0:
        return 0.0 if k == n else -np.inf
    if k == 0:
        return n * lq
    if k == n:
        return n * lp
    x = float(k)
    y = float(n - k)
    nf = float(n)
    # pairwise-symmetric sums keep the p = 1/2 ensemble exactly mirror-symmetric
    lc = _stirlerr(nf) - (_stirlerr(x) + _stirlerr(y)) - (_bd0(x, nf * p) + _bd0(y, nf * (1.0 - p)))
    lf = (math.log(x) + math.log(y)) - math.log(nf)
    return lc - (_HALF_LOG_2PI + 0.5 * lf)


@njit
def binomial_log_pmf_numba(n, p):
    out = np.empty(n + 1)
    lp, lq = (0.0, 0.0) if (p == 0.0 or p == 1.0) else _log_p_q_jit(p)
    for k in range(n + 1):
        out[k] = _log_pmf_at(n, k, p, lp, lq)
    return out


def _stirlerr_vec(n):
    n = np.asarray(n, dtype=np.float64)
    out = np.empty_like(n)
    small = n <= 15
    out[small] = _STIRLERR[n[small].astype(np.int64)]
    big = n[~small]
    nn = big * big
    out[~small] = np.select(
        [big > 500, big > 80, big > 35],
        [
            (_S0 - _S1 / nn) / big,
            (_S0 - (_S1 - _S2 / nn) / nn) / big,
            (_S0 - (_S1 - (_S2 - _S3 / nn) / nn) / nn) / big,
        ],
        (_S0 - (_S1 - (_S2 - (_S3 - _S4 / nn) / nn) / nn) / nn) / big,
    )
    return out


def _bd0_vec(x, np_):
    x = np.asarray(x, dtype=np.float64)
    np_ = np.asarray(np_, dtype=np.float64)
    near = np.abs(x - np_) < 0.1 * (x + np_)
    out = np.empty_like(x)
    xn, mn = x[near], np_[near]
    v = (xn - mn) / (xn + mn)
    s = (xn - mn) * v
    ej = 2.0 * xn * v
    v2 = v * v
    # |v| < 0.1 so the term ratio is below 1e-2; 12 terms reach full precision
    for j in range(1, 13):
        ej = ej * v2
        s = s + ej / (2 * j + 1)
    out[near] = s
    xf, mf = x[~near], np_[~near]
    with np.errstate(over="ignore"):
        r = xf / mf
    lr = np.where(np.isinf(r), np.log(xf) - np.log(mf), np.log(np.where(np.isinf(r), 1.0, r)))
    out[~near] = xf * lr + mf - xf
    return out


def binomial_log_pmf_numpy(n, p):
    if p == 0.0 or p == 1.0:
        out = np.full(n + 1, -np.inf)
        out[0 if p == 0.0 else n] = 0.0
        return out
    lp, lq = _log_p_q(p)
    out = np.empty(n + 1)
    out[0] = n * lq
    out[n] = n * lp
    if n > 1:
        x = np.arange(1, n, dtype=np.float64)
        y = n - x
        nf = float(n)
        lc = _stirlerr_vec(nf)[()] - (_stirlerr_vec(x) + _stirlerr_vec(y)) - (
            _bd0_vec(x, np.full_like(x, nf * p)) + _bd0_vec(y, np.full_like(y, nf * (1.0 - p)))
        )
        lf = (np.log(x) + np.log(y)) - math.log(nf)
        out[1:n] = lc - (_HALF_LOG_2PI + 0.5 * lf)
    return out


def bin_starts(n, m):
    """First count ``k`` of every frequency bin, plus a sentinel ``n + 1``.

    Bin ``j`` holds the counts with ``j/m <= k/n < (j+1)/m``; the last bin is
    closed at 1. Integer arithmetic, so boundary frequencies land exactly.
    """
    j = np.arange(m + 1, dtype=np.int64)
    starts = (j * n + m - 1) // m
    starts[m] = n + 1
    return starts


@njit
def _bin_starts_jit(n, m):
    starts = np.empty(m + 1, dtype=np.int64)
    for j in range(m):
        starts[j] = (j * n + m - 1) // m
    starts[m] = n + 1
    return starts


@njit
def bin_logsumexp_numba(log_w, m):
    n = log_w.shape[0] - 1
    starts = _bin_starts_jit(n, m)
    out = np.empty(m)
    for j in range(m):
        lo = starts[j]
        hi = starts[j + 1]
        mx = -np.inf
        for k in range(lo, hi):
            if log_w[k] > mx:
                mx = log_w[k]
        if mx == -np.inf:
            out[j] = -np.inf
            continue
        s = 0.0
        for k in range(lo, hi):
            s += math.exp(log_w[k] - mx)
        out[j] = mx + math.log(s)
    return out


def logsumexp(x):
    """``log(sum(exp(x)))`` of a 1-d array; ``-inf`` for empty or all ``-inf`` input."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return -np.inf
    mx = x.max()
    if mx == -np.inf:
        return -np.inf
    return float(mx + np.log(np.sum(np.exp(x - mx))))


def bin_logsumexp_numpy(log_w, m):
    n = log_w.shape[0] - 1
    starts = bin_starts(n, m)
    return np.array([logsumexp(log_w[starts[j]:starts[j + 1]]) for j in range(m)])


@njit
def bin_log_weight_matrix_numba(ns, p, m):
    out = np.empty((ns.shape[0], m))
    for i in range(ns.shape[0]):
        out[i, :] = bin_logsumexp_numba(binomial_log_pmf_numba(ns[i], p), m)
    return out


def bin_log_weight_matrix_numpy(ns, p, m):
    out = np.empty((len(ns), m))
    for i, n in enumerate(ns):
        out[i] = bin_logsumexp_numpy(binomial_log_pmf_numpy(int(n), p), m)
    return out


if USE_NUMBA:
    BACKEND = "numba"
    _pmf, _lse, _matrix = binomial_log_pmf_numba, bin_logsumexp_numba, bin_log_weight_matrix_numba
else:
    BACKEND = "numpy"
    _pmf, _lse, _matrix = binomial_log_pmf_numpy, bin_logsumexp_numpy, bin_log_weight_matrix_numpy


def binomial_log_pmf(n, p):
    """Array of ``ln[C(n,k) p^k (1-p)^(n-k)]`` for ``k = 0..n``."""
    return _pmf(int(n), float(p))


def binomial_log_pmf_at(n, k, p):
    """Single entry of :func:`binomial_log_pmf` (same arithmetic, scalar cost)."""
    p = float(p)
    lp, lq = (0.0, 0.0) if (p == 0.0 or p == 1.0) else _log_p_q(p)
    return float(_log_pmf_at(int(n), int(k), p, lp, lq))


def bin_logsumexp(log_w, m):
    """Coalesce per-count log-weights into ``m`` equal-width frequency bins."""
    return _lse(np.ascontiguousarray(log_w, dtype=np.float64), int(m))


def bin_log_weight_matrix(ns, p, m):
    """Row ``i`` holds the ``m`` bin log-weights for ``ns[i]`` measurements."""
    return _matrix(np.ascontiguousarray(ns, dtype=np.int64), float(p), int(m))
