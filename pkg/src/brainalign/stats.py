"""Inferential helpers: correlation tests, one-sample t-tests, exact
sign-flip permutation tests, and hemisphere-difference analyses.

The t-distribution tail areas are computed here via the regularized
incomplete beta function (continued fraction, accurate to ~1e-10) so
the package carries no statistical dependency at runtime.
"""

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DataError, DegenerateVarianceError

EXACT_LIMIT = 20          # enumerate all 2^n sign flips up to here
MC_DRAWS = 100_000

_EPS = 1e-15
_TINY = 1e-300


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    n: int
    method: str
    sidedness: str


@dataclass(frozen=True)
class PairedSample:
    labels: tuple
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if len(self.labels) != len(set(self.labels)):
            raise DataError("paired sample labels not unique")
        if not (len(self.labels) == len(self.a) == len(self.b)):
            raise DataError("paired sample lengths differ")
        if len(self.labels) < 2:
            raise DataError("paired sample needs >= 2 units")

    def differences(self):
        return np.asarray(self.a, float) - np.asarray(self.b, float)


@dataclass(frozen=True)
class AsymmetrySeries:
    pair: tuple
    labels: tuple
    values: np.ndarray


class StatsRow(NamedTuple):
    analysis: str
    unit_axis: str
    statistic: float
    p: float
    n: int
    sidedness: str


# ---------------------------------------------------------------------------
# t distribution from scratch
# ---------------------------------------------------------------------------

def _betacf(a, b, x):
    # Lentz's continued fraction for the incomplete beta
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def betainc(a, b, x):
    """Regularized incomplete beta I_x(a, b), accurate to ~1e-10."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x outside [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        a * math.log(x)
        + b * math.log1p(-x)
        - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t, df):
    """P(|T_df| >= |t|)."""
    if df < 1:
        raise ValueError("df must be >= 1")
    t = float(t)
    return betainc(df / 2.0, 0.5, df / (df + t * t))


def t_cdf(t, df):
    half = 0.5 * t_two_sided_p(t, df)
    return 1.0 - half if t >= 0 else half


def t_ppf(q, df):
    """Quantile of the t distribution by bisection on :func:`t_cdf`."""
    if not 0.0 < q < 1.0:
        raise ValueError("q outside (0, 1)")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return -t_ppf(1.0 - q, df)
    lo, hi = 0.0, 2.0
    while t_cdf(hi, df) < q:
        hi *= 2.0
        if hi > 1e12:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, df) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# tests
# ---------------------------------------------------------------------------

def pearson(x, y):
    """Pearson r with a two-sided p from t = r sqrt((n-2)/(1-r^2)).

    Requires n >= 3 and non-constant inputs.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = len(x)
    if len(y) != n:
        raise DataError("length mismatch")
    if n < 3:
        raise DataError(f"need n >= 3, got {n}")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        raise DegenerateVarianceError("constant input to pearson")
    r = float(xc @ yc) / denom
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * math.sqrt((n - 2) / (1.0 - r * r))
        p = t_two_sided_p(t, n - 2)
    return TestResult(r, p, n, "pearson", "two")


def one_sample_ttest(d, mu0=0.0):
    """Two-sided one-sample t-test of mean(d) against mu0."""
    d = np.asarray(d, float)
    n = len(d)
    if n < 2:
        raise DataError(f"need n >= 2, got {n}")
    sd = d.std(ddof=1)
    if sd <= 0.0:
        raise DegenerateVarianceError("zero variance in t-test sample")
    t = (d.mean() - mu0) / (sd / math.sqrt(n))
    return TestResult(float(t), t_two_sided_p(t, n - 1), n, "ttest_1samp", "two")


def _flip_means(d, patterns):
    # pattern bit j set -> negate d[j]; pattern 0 is the identity
    n = len(d)
    bits = (patterns[:, None] >> np.arange(n)) & 1
    signs = 1.0 - 2.0 * bits
    return signs @ d / n


def sign_flip_permutation_test(d, sidedness="one", seed=0, method="auto"):
    """Sign-flip permutation test on mean(d).

    Enumerates all 2^n assignments exactly for n <= 20, otherwise draws
    100000 seeded random assignments (``method`` can force either
    branch). The observed (identity) assignment is always part of the
    count, so p is never 0; for the exact branch p is a multiple of
    2^-n.
    """
    if sidedness not in ("one", "two"):
        raise ValueError("sidedness must be 'one' or 'two'")
    if method not in ("auto", "exact", "mc"):
        raise ValueError("method must be 'auto', 'exact', or 'mc'")
    d = np.asarray(d, float)
    n = len(d)
    if n < 1:
        raise DataError("empty sample")
    if method == "exact" and n > 30:
        raise ValueError(f"exact enumeration of 2^{n} assignments refused")
    exact = method == "exact" or (method == "auto" and n <= EXACT_LIMIT)
    if exact:
        count, total = 0, 2 ** n
        observed = None
        for start in range(0, total, 1 << 16):
            patterns = np.arange(start, min(start + (1 << 16), total),
                                 dtype=np.int64)
            means = _flip_means(d, patterns)
            if observed is None:
                observed = means[0]
            if sidedness == "one":
                count += int(np.sum(means >= observed))
            else:
                count += int(np.sum(np.abs(means) >= abs(observed)))
        method = "sign_flip_exact"
    else:
        rng = np.random.default_rng(seed)
        signs = 1.0 - 2.0 * rng.integers(0, 2, size=(MC_DRAWS, n))
        signs[0] = 1.0  # identity assignment rides along
        means = signs @ d / n
        observed = means[0]
        if sidedness == "one":
            count = int(np.sum(means >= observed))
        else:
            count = int(np.sum(np.abs(means) >= abs(observed)))
        total = MC_DRAWS
        method = "sign_flip_mc"
    return TestResult(float(observed), count / total, n, method, sidedness)


# ---------------------------------------------------------------------------
# hemisphere differences
# ---------------------------------------------------------------------------

def _best_rho(rows):
    # peak rho across layers; ties keep the lower layer, which for the
    # value itself makes no difference
    return max(rows, key=lambda r: (r.rho, -r.layer)).rho


def lh_rh_asymmetry(rows, pairs, per="subject"):
    """Per-unit best-layer rho differences between paired ROIs.

    Parameters
    ----------
    rows : iterable
        Flat result rows with model/subject/roi/layer/rho attributes.
    pairs : list of (str, str)
        (left ROI key, right ROI key) pairs, e.g. ("LH_IFG", "RH_IFG").
    per : {"subject", "model"}
        Unit of analysis. "subject" requires a single model in ``rows``
        and yields one difference per subject; "model" averages each
        model's per-subject differences into one value per model.

    Returns
    -------
    dict mapping pair -> AsymmetrySeries (unit labels sorted).
    """
    if per not in ("subject", "model"):
        raise ValueError("per must be 'subject' or 'model'")
    rows = list(rows)
    by_cell = {}
    for r in rows:
        by_cell.setdefault((r.model, r.subject, r.roi), []).append(r)
    models = sorted({r.model for r in rows})
    if per == "subject" and len(models) != 1:
        raise DataError(f"per='subject' expects one model, got {len(models)}")

    out = {}
    for lh, rh in pairs:
        diffs_by_model = {}
        for model in models:
            subjects = sorted(
                {r.subject for r in rows if r.model == model}
            )
            subj_diffs = []
            for s in subjects:
                for roi in (lh, rh):
                    if (model, s, roi) not in by_cell:
                        raise DataError(
                            f"missing cell: model={model} subject={s} roi={roi}"
                        )
                subj_diffs.append(
                    _best_rho(by_cell[(model, s, lh)])
                    - _best_rho(by_cell[(model, s, rh)])
                )
            diffs_by_model[model] = subj_diffs
        if per == "subject":
            (only,) = models
            subjects = sorted({r.subject for r in rows if r.model == only})
            series = AsymmetrySeries(
                (lh, rh), tuple(subjects),
                np.array(diffs_by_model[only]),
            )
        else:
            series = AsymmetrySeries(
                (lh, rh), tuple(models),
                np.array([float(np.mean(diffs_by_model[m])) for m in models]),
            )
        out[(lh, rh)] = series
    return out


def asymmetry_performance_association(diffs, performance):
    """Pearson link between hemisphere differences and a per-unit score.

    ``performance`` maps unit label -> scalar; its label set must match
    each series exactly.
    """
    out = {}
    for pair, series in diffs.items():
        missing = [lb for lb in series.labels if lb not in performance]
        extra = [lb for lb in performance if lb not in series.labels]
        if missing or extra:
            raise DataError(
                f"unit label mismatch: missing={missing} extra={extra}"
            )
        scores = np.array([performance[lb] for lb in series.labels], float)
        out[pair] = pearson(series.values, scores)
    return out


def write_stats_tsv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(StatsRow._fields)
        for row in rows:
            writer.writerow(
                [row.analysis, row.unit_axis, repr(float(row.statistic)),
                 repr(float(row.p)), row.n, row.sidedness]
            )


def read_stats_tsv(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader)
        if tuple(header) != StatsRow._fields:
            raise DataError(f"{path}: unexpected header {header}")
        for rec in reader:
            rows.append(
                StatsRow(rec[0], rec[1], float(rec[2]), float(rec[3]),
                         int(rec[4]), rec[5])
            )
    return rows
