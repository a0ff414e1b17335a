"""Monte Carlo estimators and goodness-of-fit tests.

Every statistical contract in the package is phrased through two value
types: :class:`MCEstimate` (a mean with its standard error) and
:class:`TestResult` (a statistic, its p-value and a pass flag).  The
hypothesis tests are thin wrappers over :mod:`scipy.stats`; the
accumulator is a mergeable Welford reduction so that estimates computed
on separate streams can be combined exactly.
"""

from dataclasses import dataclass

import numpy as np
from scipy import stats as _st

from .errors import TooFewSamples

__all__ = [
    "MCEstimate",
    "TestResult",
    "Accumulator",
    "mc_mean",
    "estimate",
    "ks_test",
    "ks_two_sample",
    "chi2_test",
    "chi2_gof",
    "majority",
    "seeded",
    "DEFAULT_ALPHA",
    "MIN_KS_SAMPLES",
]

DEFAULT_ALPHA = 0.01
MIN_KS_SAMPLES = 100


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with standard error.

    For complex samples ``stderr`` is ``sqrt(E|X - mean|^2 / count)``, the
    radius scale of the (circular) error of the complex mean.
    """

    mean: complex
    stderr: float
    count: int

    def deviation(self, reference):
        """Distance to ``reference`` in units of the standard error."""
        gap = abs(self.mean - reference)
        if self.stderr == 0:
            return 0.0 if gap <= 1e-12 * max(1.0, abs(reference)) else np.inf
        return gap / self.stderr

    def within(self, reference, k=3.0, slack=0.0):
        """True when ``|mean - reference| <= k * stderr + slack`` (with a rounding floor)."""
        gap = abs(self.mean - reference)
        return bool(gap <= k * self.stderr + slack + 1e-12 * max(1.0, abs(reference)))

    def __repr__(self):
        return f"MCEstimate({self.mean:.6g} ± {self.stderr:.3g}, n={self.count})"


@dataclass(frozen=True)
class TestResult:
    statistic: float
    pvalue: float
    alpha: float = DEFAULT_ALPHA

    __test__ = False  # not a pytest class

    @property
    def passed(self):
        return bool(self.pvalue > self.alpha)

    def __bool__(self):
        return self.passed


class Accumulator:
    """Welford/Chan running mean and second moment, safe to merge."""

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def update(self, values):
        values = np.atleast_1d(np.asarray(values))
        if values.size == 0:
            return self
        other = Accumulator()
        other.count = values.size
        other.mean = values.mean()
        other.m2 = float(np.sum(np.abs(values - other.mean) ** 2))
        return self.merge(other)

    def merge(self, other):
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            return self
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean = self.mean + delta * (other.count / total)
        self.m2 = self.m2 + other.m2 + abs(delta) ** 2 * self.count * other.count / total
        self.count = total
        return self

    def result(self):
        if self.count == 0:
            raise TooFewSamples("no samples accumulated")
        if self.count == 1:
            return MCEstimate(self.mean, 0.0, 1)
        var = self.m2 / (self.count - 1)
        return MCEstimate(self.mean, float(np.sqrt(max(var, 0.0) / self.count)), self.count)


def estimate(values):
    """MCEstimate of a finished array of samples."""
    return Accumulator().update(values).result()


def mc_mean(stream, n):
    """Mean of the first ``n`` values drawn from ``stream``.

    ``stream`` is an iterable of scalars or of 1-D batches; batches are
    split so that exactly ``n`` values are consumed.
    """
    acc = Accumulator()
    need = int(n)
    for item in stream:
        block = np.atleast_1d(np.asarray(item)).ravel()
        if block.size > need:
            block = block[:need]
        acc.update(block)
        need -= block.size
        if need <= 0:
            break
    if need > 0:
        raise TooFewSamples(f"stream ended {need} values short of {n}")
    return acc.result()


def ks_test(samples, cdf, alpha=DEFAULT_ALPHA):
    """One-sample Kolmogorov-Smirnov test against a continuous ``cdf``.

    The p-value uses the exact distribution of the statistic for small
    samples and the Kolmogorov asymptotic law otherwise (scipy's ``auto``).
    At least ``MIN_KS_SAMPLES`` observations are required.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size < MIN_KS_SAMPLES:
        raise TooFewSamples(f"KS test needs >= {MIN_KS_SAMPLES} samples, got {x.size}")
    res = _st.kstest(x, cdf, method="auto")
    return TestResult(float(res.statistic), float(res.pvalue), alpha)


def ks_two_sample(a, b, alpha=DEFAULT_ALPHA):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if min(a.size, b.size) < MIN_KS_SAMPLES:
        raise TooFewSamples(f"KS test needs >= {MIN_KS_SAMPLES} samples per side")
    res = _st.ks_2samp(a, b)
    return TestResult(float(res.statistic), float(res.pvalue), alpha)


def _merge_small_bins(counts, expected, minimum):
    merged_c, merged_e = [], []
    acc_c = acc_e = 0.0
    for c, e in zip(counts, expected):
        acc_c += c
        acc_e += e
        if acc_e >= minimum:
            merged_c.append(acc_c)
            merged_e.append(acc_e)
            acc_c = acc_e = 0.0
    if acc_e > 0 or acc_c > 0:
        if merged_e:
            merged_c[-1] += acc_c
            merged_e[-1] += acc_e
        else:
            merged_c.append(acc_c)
            merged_e.append(acc_e)
    return np.array(merged_c), np.array(merged_e)


def chi2_test(counts, expected, alpha=DEFAULT_ALPHA, ddof=0, min_expected=5.0):
    """Pearson chi-square test of observed ``counts`` against ``expected`` counts.

    Adjacent bins are merged left to right until every merged bin expects
    at least ``min_expected`` observations.
    """
    counts = np.asarray(counts, dtype=float).ravel()
    expected = np.asarray(expected, dtype=float).ravel()
    if counts.shape != expected.shape:
        raise ValueError("counts and expected must have the same length")
    c, e = _merge_small_bins(counts, expected, min_expected)
    if c.size < 2:
        stat = float(np.sum((c - e) ** 2 / np.where(e > 0, e, 1.0)))
        return TestResult(stat, 1.0 if stat == 0 else 0.0, alpha)
    stat = float(np.sum((c - e) ** 2 / e))
    dof = c.size - 1 - ddof
    return TestResult(stat, float(_st.chi2.sf(stat, dof)), alpha)


def chi2_gof(counts, probabilities, alpha=DEFAULT_ALPHA, ddof=0):
    """Chi-square test of ``counts`` against a pmf given as ``probabilities``."""
    counts = np.asarray(counts, dtype=float).ravel()
    probs = np.asarray(probabilities, dtype=float).ravel()
    return chi2_test(counts, probs * counts.sum() / probs.sum(), alpha=alpha, ddof=ddof)


def majority(outcomes, needed=2):
    """``needed``-of-k vote over boolean outcomes (default 2 of 3 seeds)."""
    return sum(bool(o) for o in outcomes) >= needed


def seeded(check, seeds, needed=2):
    """Run ``check(seed)`` for each seed and apply :func:`majority`.

    Returns ``(passed, outcomes)`` where ``outcomes`` lists per-seed results.
    """
    outcomes = [check(s) for s in seeds]
    return majority(outcomes, needed), outcomes

