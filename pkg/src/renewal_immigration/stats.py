"""Empirical-distribution machinery for the verification harness.

Samples are plain 1-D arrays (sorted internally); multivariate samples are
``(rows, coords)`` matrices.  Ties are resolved by treating empirical CDFs
as right-continuous step functions evaluated at merged order statistics,
which matters for the integer-valued process marginals.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import chi2 as _chi2

__all__ = [
    "TestResult",
    "ks_two_sample",
    "ks_one_sample",
    "energy_distance",
    "chisq_gof_counts",
    "kolmogorov_sf",
]

# Full pairwise energy statistics are exact up to this many combined rows;
# beyond it the inputs are subsampled (with a note in the result).
ENERGY_EXACT_ROWS = 20_000


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    n: int
    m: int | None
    method: str
    note: str = ""

    def to_dict(self):
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "n": self.n,
            "m": self.m,
            "method": self.method,
            "note": self.note,
        }


def kolmogorov_sf(x):
    """Survival function of the Kolmogorov distribution, Q(x) = 2 sum (-1)^{j-1} e^{-2 j^2 x^2}."""
    if x <= 0.05:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, 101):
        term = math.exp(-2.0 * j * j * x * x)
        total += sign * term
        if term < 1e-16 * max(total, 1e-300):
            break
        sign = -sign
    return min(max(2.0 * total, 0.0), 1.0)


def ks_two_sample(a, b):
    """Exact two-sample Kolmogorov-Smirnov distance with asymptotic p-value.

    The statistic is the sup distance between the two empirical CDFs,
    computed by a merge scan; the p-value uses the Kolmogorov asymptotics
    at scale ``sqrt(n m / (n + m))``, so decisions should rest on samples
    of at least ~50 points per side.
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    n, m = len(a), len(b)
    if n < 1 or m < 1:
        raise ValueError("both samples must be nonempty")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / n
    cdf_b = np.searchsorted(b, grid, side="right") / m
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    en = math.sqrt(n * m / (n + m))
    return TestResult(statistic=d, p_value=kolmogorov_sf(en * d), n=n, m=m, method="ks_two_sample")


def ks_one_sample(a, cdf):
    """One-sample KS distance of a sample against a CDF callable.

    ``cdf`` is evaluated on the sorted sample and must be nondecreasing with
    values in [0, 1]; a CDF that is identically 0 across the sample violates
    the precondition (the null puts no mass at or below the data).  The
    p-value is asymptotic, intended for n of at least ~50.
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    n = len(a)
    if n < 1:
        raise ValueError("sample must be nonempty")
    f = np.asarray(cdf(a), dtype=float)
    if f.shape != a.shape:
        f = np.array([float(cdf(x)) for x in a])
    if np.any(f < -1e-12) or np.any(f > 1.0 + 1e-12):
        raise ValueError("cdf values must lie in [0, 1]")
    if np.any(np.diff(f) < -1e-12):
        raise ValueError("cdf must be nondecreasing")
    if f[-1] <= 0.0:
        raise ValueError("cdf is 0 across the whole sample; null has no mass below the data")
    f = np.clip(f, 0.0, 1.0)
    i = np.arange(n)
    d_plus = float(np.max((i + 1) / n - f))
    d_minus = float(np.max(f - i / n))
    d = max(d_plus, d_minus)
    return TestResult(statistic=d, p_value=kolmogorov_sf(math.sqrt(n) * d), n=n, m=None, method="ks_one_sample")


def _as_matrix(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError("samples must be 1-D vectors or 2-D row matrices")
    return x


def energy_distance(a_matrix, b_matrix, n_permutations, rng):
    """Two-sample energy statistic with a permutation p-value.

    Statistic: ``2 E|A - B| - E|A - A'| - E|B - B'|`` with plug-in means over
    all row pairs (Euclidean distances, diagonal included), computed exactly
    up to ``ENERGY_EXACT_ROWS`` combined rows and on a subsample beyond.
    The permutation null shuffles row labels; the p-value counts the
    observed arrangement itself, so it is never below ``1/(n_permutations+1)``.
    """
    a = _as_matrix(a_matrix)
    b = _as_matrix(b_matrix)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"column counts differ: {a.shape[1]} vs {b.shape[1]}")
    if n_permutations < 19:
        raise ValueError("need at least 19 permutations for a meaningful p-value")
    note = ""
    total = len(a) + len(b)
    if total > ENERGY_EXACT_ROWS:
        keep_a = max(1, int(round(ENERGY_EXACT_ROWS * len(a) / total)))
        keep_b = ENERGY_EXACT_ROWS - keep_a
        a = a[rng.choice(len(a), size=keep_a, replace=False)]
        b = b[rng.choice(len(b), size=keep_b, replace=False)]
        note = f"subsampled to {keep_a}+{keep_b} rows from the caller's stream"
    n, m = len(a), len(b)
    z = np.vstack([a, b])
    big_n = n + m

    # Column 0 holds the observed labelling, the rest are permutations.
    labels = np.zeros((big_n, n_permutations + 1))
    labels[:n, 0] = 1.0
    for p in range(1, n_permutations + 1):
        labels[rng.permutation(big_n)[:n], p] = 1.0

    # Streamed pairwise distances: accumulate D @ labels and row sums
    # without materializing the full distance matrix.
    dx = np.zeros((big_n, n_permutations + 1))
    row_sums = np.zeros(big_n)
    block = max(1, int(2**24 // max(big_n, 1)))
    for lo in range(0, big_n, block):
        dblk = cdist(z[lo : lo + block], z)
        dx[lo : lo + block] = dblk @ labels
        row_sums[lo : lo + block] = dblk.sum(axis=1)

    grand = float(row_sums.sum())
    s_aa = np.einsum("ip,ip->p", labels, dx)
    r = labels.T @ row_sums
    s_ab = r - s_aa
    s_bb = grand - 2.0 * r + s_aa
    stats = 2.0 * s_ab / (n * m) - s_aa / (n * n) - s_bb / (m * m)
    observed = float(stats[0])
    p_value = float((1 + np.sum(stats[1:] >= observed)) / (n_permutations + 1))
    return TestResult(
        statistic=observed, p_value=p_value, n=n, m=m, method="energy_permutation", note=note
    )


def chisq_gof_counts(observed_counts, expected_probs, min_expected=5.0):
    """Pearson chi-square GOF on binned counts.

    Bins whose expected count falls below ``min_expected`` are pooled into a
    single tail bin before the statistic is formed.  An impossible bin
    (zero probability, positive count) yields ``statistic = inf`` and
    p-value 0.
    """
    obs = np.asarray(observed_counts, dtype=float)
    probs = np.asarray(expected_probs, dtype=float)
    if obs.shape != probs.shape or obs.ndim != 1:
        raise ValueError("observed counts and expected probs must be matching 1-D arrays")
    if np.any(obs < 0) or np.any(probs < 0):
        raise ValueError("counts and probabilities must be nonnegative")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError(f"expected probabilities must sum to 1, got {probs.sum()!r}")
    n = float(obs.sum())
    expected = n * probs
    pool = expected < min_expected
    obs_bins = list(obs[~pool])
    exp_bins = list(expected[~pool])
    if pool.any():
        obs_bins.append(float(obs[pool].sum()))
        exp_bins.append(float(expected[pool].sum()))
    if len(obs_bins) < 2:
        raise ValueError("all mass pooled into one bin; the test is undefined")
    obs_bins = np.array(obs_bins)
    exp_bins = np.array(exp_bins)
    impossible = (exp_bins == 0.0) & (obs_bins > 0.0)
    if impossible.any():
        stat = math.inf
        p = 0.0
    else:
        ok = exp_bins > 0.0
        stat = float(np.sum((obs_bins[ok] - exp_bins[ok]) ** 2 / exp_bins[ok]))
        p = float(_chi2.sf(stat, df=len(obs_bins) - 1))
    return TestResult(
        statistic=stat, p_value=p, n=int(n), m=None, method="chisq_gof", note=f"bins={len(obs_bins)}"
    )
