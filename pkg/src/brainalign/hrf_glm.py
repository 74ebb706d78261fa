"""Event-related GLM: canonical response kernel, design matrices, OLS,
contrast t-statistics, and single-trial beta extraction.

The response kernel is the SPM-default double gamma (peak delay 6 s,
undershoot delay 16 s, both dispersions 1 s, undershoot ratio 1/6,
32 s support), peak-normalized to 1. Event regressors are built as
boxcars on a fine internal grid, convolved with the kernel, then
resampled at scan times, so onsets need not align to the TR.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import gamma

from .errors import DataError, DegenerateVarianceError, SingularDesignError

PEAK_DELAY = 6.0
UNDERSHOOT_DELAY = 16.0
PEAK_DISP = 1.0
UNDERSHOOT_DISP = 1.0
UNDERSHOOT_RATIO = 1.0 / 6.0
KERNEL_LENGTH = 32.0

FINE_DT = 0.1

# singular values below RANK_RTOL * largest count as zero
RANK_RTOL = 1e-10

INTERCEPT_LABEL = "intercept"


@dataclass(frozen=True)
class HrfKernel:
    dt: float
    samples: np.ndarray


@dataclass(frozen=True)
class DesignMatrix:
    values: np.ndarray
    column_labels: tuple

    @property
    def shape(self):
        return self.values.shape

    def column_index(self, label):
        return self.column_labels.index(label)


@dataclass(frozen=True)
class GlmFit:
    betas: np.ndarray   # P x V
    sigma2: np.ndarray  # V
    dof: int


@dataclass(frozen=True)
class BetaMap:
    values: np.ndarray  # trials x voxels, rows in event-table order
    trial_ids: tuple


def canonical_hrf(dt=FINE_DT):
    """Double-gamma response kernel sampled at ``0, dt, ..., 32`` seconds.

    Parameters
    ----------
    dt : float
        Sampling step in seconds, 0 < dt <= 2.

    Returns
    -------
    HrfKernel
        ``samples[0] == 0`` and ``samples.max() == 1``.
    """
    if not 0 < dt <= 2:
        raise ValueError(f"dt must be in (0, 2], got {dt}")
    t = np.arange(round(KERNEL_LENGTH / dt) + 1) * dt
    peak = gamma.pdf(t, PEAK_DELAY / PEAK_DISP, scale=PEAK_DISP)
    undershoot = gamma.pdf(t, UNDERSHOOT_DELAY / UNDERSHOOT_DISP,
                           scale=UNDERSHOOT_DISP)
    h = peak - UNDERSHOOT_RATIO * undershoot
    return HrfKernel(dt=dt, samples=h / h.max())


def polynomial_drift(n_scans, order):
    """Legendre drift columns of degree 1..order over the scan axis.

    Degree 0 is omitted; the intercept is always added by
    :func:`build_design_matrix` itself.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    x = np.linspace(-1.0, 1.0, n_scans)
    cols = [np.polynomial.legendre.Legendre.basis(k)(x)
            for k in range(1, order + 1)]
    return np.column_stack(cols)


def _fine_boxcar(events, n_fine, dt):
    """Accumulated unit boxcars on the fine grid; duration 0 -> impulse."""
    box = np.zeros(n_fine)
    for ev in events:
        start = int(round(ev.onset / dt))
        n_samp = max(1, int(round(ev.duration / dt)))
        box[start:start + n_samp] += 1.0
    return box


def _fine_grid_size(events, n_scans, tr, dt):
    end = n_scans * tr
    for ev in events:
        end = max(end, ev.onset + ev.duration)
    return int(np.ceil(end / dt)) + 1


def _resample(fine_signal, dt, n_scans, tr):
    scan_times = np.arange(n_scans) * tr
    fine_times = np.arange(len(fine_signal)) * dt
    return np.interp(scan_times, fine_times, fine_signal)


def _validate_onsets(events, n_scans, tr):
    limit = n_scans * tr
    for ev in events:
        if ev.onset >= limit:
            raise DataError(
                f"trial {ev.trial_id!r}: onset {ev.onset} at or beyond "
                f"scan end {limit}"
            )


def _as_nuisance(nuisance, n_scans):
    if nuisance is None:
        return np.empty((n_scans, 0))
    nu = np.atleast_2d(np.asarray(nuisance, dtype=float))
    if nu.shape[0] != n_scans:
        raise DataError(
            f"nuisance has {nu.shape[0]} rows, expected {n_scans}"
        )
    return nu


def build_design_matrix(events, n_scans, tr, nuisance=None, dt=FINE_DT):
    """Design matrix with one convolved column per condition.

    Columns are ordered: conditions (sorted by name), user nuisance
    regressors (passed through unchanged), then an intercept. A design
    with no events and no nuisance columns is rejected, as is any
    condition column that is identically zero.

    Parameters
    ----------
    events : EventTable
    n_scans : int
        Number of scans T; rows of the result.
    tr : float
        Repetition time in seconds.
    nuisance : array_like of shape (T, M), optional
    dt : float
        Internal convolution grid step.

    Returns
    -------
    DesignMatrix
    """
    if tr <= 0:
        raise ValueError(f"tr must be positive, got {tr}")
    if n_scans < 1:
        raise ValueError("n_scans must be >= 1")
    _validate_onsets(events, n_scans, tr)
    nu = _as_nuisance(nuisance, n_scans)
    if len(events) == 0 and nu.shape[1] == 0:
        raise DataError("no events and no nuisance columns: unusable design")

    kernel = canonical_hrf(dt).samples
    n_fine = _fine_grid_size(events, n_scans, tr, dt)
    cols, labels = [], []
    for cond in events.conditions() if len(events) else []:
        sub = [ev for ev in events if ev.condition == cond]
        box = _fine_boxcar(sub, n_fine, dt)
        col = _resample(np.convolve(box, kernel), dt, n_scans, tr)
        if not np.any(col):
            raise DataError(f"condition {cond!r}: regressor is all zero")
        cols.append(col)
        labels.append(cond)
    for m in range(nu.shape[1]):
        cols.append(nu[:, m])
        labels.append(f"nuisance{m}")
    cols.append(np.ones(n_scans))
    labels.append(INTERCEPT_LABEL)
    return DesignMatrix(np.column_stack(cols), tuple(labels))


def _values(X):
    return X.values if isinstance(X, DesignMatrix) else np.asarray(X, float)


def ols_fit(X, Y):
    """Ordinary least squares via the normal equations.

    beta = (X'X)^-1 X'Y, per-voxel residual variance with
    dof = T - rank(X). Rank-deficient designs raise
    :class:`SingularDesignError`; there is no pseudo-inverse fallback.
    """
    Xv = _values(X)
    Y = np.asarray(Y, float)
    if Y.ndim == 1:
        Y = Y[:, None]
    T, P = Xv.shape
    if Y.shape[0] != T:
        raise DataError(f"Y has {Y.shape[0]} rows, design has {T}")
    svals = np.linalg.svd(Xv, compute_uv=False)
    rank = int(np.sum(svals > RANK_RTOL * svals[0]))
    if rank < P:
        raise SingularDesignError(
            f"design rank {rank} < {P} columns (tol {RANK_RTOL:g} * s_max)"
        )
    dof = T - rank
    if dof < 1:
        raise DataError(f"no residual degrees of freedom: T={T}, rank={rank}")
    XtX = Xv.T @ Xv
    betas = np.linalg.solve(XtX, Xv.T @ Y)
    resid = Y - Xv @ betas
    sigma2 = np.einsum("tv,tv->v", resid, resid) / dof
    return GlmFit(betas=betas, sigma2=sigma2, dof=dof)


def t_statistics(fit, X, c):
    """Contrast t-values: c'beta / sqrt(sigma2 * c'(X'X)^-1 c) per voxel.

    A zero contrast yields zeros; zero residual variance anywhere is an
    error rather than a division yielding infinities.
    """
    Xv = _values(X)
    c = np.asarray(c, float)
    P = Xv.shape[1]
    if c.shape != (P,):
        raise ValueError(f"contrast length {c.shape} does not match P={P}")
    n_zero = int(np.sum(fit.sigma2 <= 0))
    if n_zero:
        raise DegenerateVarianceError(
            f"{n_zero} voxel(s) with zero residual variance"
        )
    if not np.any(c):
        return np.zeros(fit.betas.shape[1])
    XtX = Xv.T @ Xv
    quad = float(c @ np.linalg.solve(XtX, c))
    if quad <= 0:
        raise SingularDesignError("contrast quadratic form not positive")
    return (c @ fit.betas) / np.sqrt(fit.sigma2 * quad)


def lss_betas(events, Y, tr, nuisance=None, dt=FINE_DT):
    """Single-trial betas, one separate fit per trial.

    Each trial i is fit with its own regressor plus a second regressor
    merging every other trial, alongside nuisance columns and an
    intercept; row i of the result is the estimate for trial i's own
    regressor. With a single trial this reduces to a plain OLS fit on
    the one-regressor design.

    Returns
    -------
    BetaMap
        Rows follow event-table order.
    """
    Y = np.asarray(Y, float)
    if Y.ndim == 1:
        Y = Y[:, None]
    n_scans = Y.shape[0]
    if len(events) == 0:
        raise DataError("empty event table")
    _validate_onsets(events, n_scans, tr)
    nu = _as_nuisance(nuisance, n_scans)

    kernel = canonical_hrf(dt).samples
    n_fine = _fine_grid_size(events, n_scans, tr, dt)
    # integer-valued accumulation keeps this exactly order-independent
    merged = _fine_boxcar(events, n_fine, dt)

    rows = []
    for ev in events:
        own_box = _fine_boxcar([ev], n_fine, dt)
        own = _resample(np.convolve(own_box, kernel), dt, n_scans, tr)
        if len(events) == 1:
            cols = [own]
            labels = ["trial"]
        else:
            others = _resample(
                np.convolve(merged - own_box, kernel), dt, n_scans, tr
            )
            cols = [own, others]
            labels = ["trial", "others"]
        for m in range(nu.shape[1]):
            cols.append(nu[:, m])
            labels.append(f"nuisance{m}")
        cols.append(np.ones(n_scans))
        labels.append(INTERCEPT_LABEL)
        design = DesignMatrix(np.column_stack(cols), tuple(labels))
        try:
            fit = ols_fit(design, Y)
        except SingularDesignError as exc:
            raise SingularDesignError(
                f"trial {ev.trial_id!r}: {exc}"
            ) from exc
        rows.append(fit.betas[0])
    return BetaMap(values=np.vstack(rows),
                   trial_ids=tuple(ev.trial_id for ev in events))
