"""Layer-wise cross-validated ridge encoding.

For each (subject, ROI) cell and each layer, a ridge model maps
embeddings to the ROI response under K-fold CV; the layer score rho_l
is the mean across folds of the Pearson correlation between held-out
responses and predictions. Regularization strength is picked per
(layer, fold) by a nested grid search over the training rows.

Scaling policy: features and targets are z-scored inside each fold with
statistics taken from the training rows only, applied unchanged to the
held-out rows. A leakage-prone whole-matrix variant is available via
``global_z=True`` for replication of pipelines that scaled up front.
"""

import csv
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg as sla

from .errors import DataError, DegenerateVarianceError, NumericalError, SingularDesignError
from .stats import t_ppf

DEFAULT_ALPHA_GRID = (1e-3, 1e-2, 1e-1, 1.0, 10.0)
DEFAULT_K = 5
INNER_FOLDS = 5

RESULT_COLUMNS = ("model", "subject", "roi", "layer", "rho", "alpha")


@dataclass(frozen=True)
class EmbeddingTensor:
    """Sentence embeddings, one row per sentence: values[n, l, d]."""

    model_id: str
    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.ndim != 3:
            raise DataError(f"embedding tensor must be N x L x D, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DataError("embedding tensor has non-finite entries")

    @property
    def n_sentences(self):
        return self.values.shape[0]

    @property
    def n_layers(self):
        return self.values.shape[1]

    @property
    def dim(self):
        return self.values.shape[2]


@dataclass(frozen=True)
class FoldSplit:
    k: int
    assignment: np.ndarray
    seed: object

    def test_indices(self, fold):
        return np.flatnonzero(self.assignment == fold)

    def train_indices(self, fold):
        return np.flatnonzero(self.assignment != fold)


@dataclass(frozen=True)
class RidgeSolution:
    beta: np.ndarray
    alpha: float
    train_idx: np.ndarray = None
    test_idx: np.ndarray = None


@dataclass(frozen=True)
class LayerScores:
    """Per-layer scores for one (subject, roi) cell."""

    rho: np.ndarray          # (L,)
    fold_corrs: np.ndarray   # (L, K)
    fold_alphas: np.ndarray  # (L, K)


@dataclass
class EncodingResult:
    model_id: str
    cells: dict  # (subject, roi_key) -> LayerScores

    def n_layers(self):
        return next(iter(self.cells.values())).rho.shape[0]


class ResultRow(NamedTuple):
    model: str
    subject: str
    roi: str
    layer: int
    rho: float
    alpha: float


def zscore(v):
    """Center and scale to unit population SD.

    Constant input raises rather than silently returning zeros.
    """
    v = np.asarray(v, float)
    if v.ndim != 1 or len(v) < 2:
        raise DataError("zscore expects a vector of length >= 2")
    sd = v.std()
    if sd <= 1e-12:
        raise DegenerateVarianceError("constant input to zscore")
    return (v - v.mean()) / sd


def make_folds(n, k, seed):
    """Seeded shuffle then contiguous chunks; sizes differ by <= 1."""
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= K <= N, got K={k}, N={n}")
    perm = np.random.default_rng(seed).permutation(n)
    assignment = np.empty(n, dtype=np.int64)
    for fold, chunk in enumerate(np.array_split(perm, k)):
        assignment[chunk] = fold
    return FoldSplit(k=k, assignment=assignment, seed=seed)


def ridge_fit(Xtr, ytr, alpha, train_idx=None, test_idx=None):
    """Closed-form ridge weights via an SPD solve of X'X + alpha I.

    alpha = 0 is the OLS limit and requires full column rank; there is
    no pseudo-inverse fallback.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    Xtr = np.asarray(Xtr, float)
    ytr = np.asarray(ytr, float)
    gram = Xtr.T @ Xtr
    gram[np.diag_indices_from(gram)] += alpha
    try:
        cho = sla.cho_factor(gram, lower=True, check_finite=False)
        beta = sla.cho_solve(cho, Xtr.T @ ytr, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularDesignError(
            f"ridge system not positive definite at alpha={alpha}"
        ) from exc
    if not np.all(np.isfinite(beta)):
        raise NumericalError("non-finite ridge coefficients")
    return RidgeSolution(beta=beta, alpha=float(alpha),
                         train_idx=train_idx, test_idx=test_idx)


def _pearson_or_zero(a, b):
    # correlation for scoring; a constant side yields 0 with a warning
    a = a - a.mean()
    b = b - b.mean()
    denom = np.sqrt((a @ a) * (b @ b))
    if denom == 0.0:
        warnings.warn("constant vector in fold correlation; scoring 0",
                      RuntimeWarning, stacklevel=3)
        return 0.0
    return float(np.clip((a @ b) / denom, -1.0, 1.0))


def _column_stats(block):
    # per-column mean/scale over rows; constant columns get scale 1 so
    # they center to zero instead of dividing by ~0
    mean = block.mean(axis=0)
    sd = block.std(axis=0)
    return mean, np.where(sd > 1e-12, sd, 1.0)


def _fit_and_score(X_tr, y_tr, X_te, y_te, alpha):
    sol = ridge_fit(X_tr, y_tr, alpha)
    return _pearson_or_zero(y_te, X_te @ sol.beta)


def layerwise_encode(emb, response, k=DEFAULT_K, alpha_grid=DEFAULT_ALPHA_GRID,
                     seed=0, global_z=False):
    """Score every layer of one embedding tensor against one ROI response.

    Parameters
    ----------
    emb : EmbeddingTensor or sentences x layers x dim array
    response : RoiResponse or array of length N
    k : int
        Outer fold count; requires N >= 2K.
    alpha_grid : sequence of float
        Candidates for the nested search; ties go to the larger alpha.
    seed : int
        Drives the outer and inner fold shuffles.
    global_z : bool
        Scale once over all rows instead of per training fold.

    Returns
    -------
    LayerScores
    """
    y = np.asarray(getattr(response, "values", response), float)
    X = np.asarray(getattr(emb, "values", emb), float)
    if X.ndim != 3:
        raise DataError(f"embedding tensor must be 3-d, got shape {X.shape}")
    n, n_layers, _ = X.shape
    seed = _to_int_seed(seed)
    if len(y) != n:
        raise DataError(f"response length {len(y)} != sentence count {n}")
    if not alpha_grid:
        raise ValueError("alpha_grid is empty")
    if n < 2 * k:
        raise DataError(f"need N >= 2K for K-fold CV, got N={n}, K={k}")
    grid = sorted(float(a) for a in alpha_grid)

    if global_z:
        y_mean, y_sd = y.mean(), y.std()
        if y_sd <= 1e-12:
            raise DegenerateVarianceError("constant response vector")
        y = (y - y_mean) / y_sd
        mean, scale = _column_stats(X.reshape(n, -1))
        X = ((X.reshape(n, -1) - mean) / scale).reshape(X.shape)

    folds = make_folds(n, k, seed)
    fold_corrs = np.empty((n_layers, k))
    fold_alphas = np.empty((n_layers, k))
    for fold in range(k):
        tr = folds.train_indices(fold)
        te = folds.test_indices(fold)
        X_tr, X_te = X[tr], X[te]
        y_tr, y_te = y[tr], y[te]
        if not global_z:
            if y_tr.std() <= 1e-12:
                raise DegenerateVarianceError(
                    f"response constant within training fold {fold}"
                )
            zy = zscore(y_tr)
            mean, scale = _column_stats(X_tr.reshape(len(tr), -1))
            X_tr = ((X_tr.reshape(len(tr), -1) - mean) / scale).reshape(X_tr.shape)
            X_te = ((X_te.reshape(len(te), -1) - mean) / scale).reshape(X_te.shape)
        else:
            zy = y_tr

        # nested grid search over the training rows, shared fold plan
        # across layers; every inner fit re-scales from its own rows
        inner_k = min(INNER_FOLDS, len(tr) // 2)
        if inner_k >= 2:
            inner = make_folds(len(tr), inner_k, [seed, fold + 1])
            inner_scores = np.zeros((n_layers, len(grid)))
            for j in range(inner.k):
                itr = inner.train_indices(j)
                ite = inner.test_indices(j)
                for l in range(n_layers):
                    Xi_tr, Xi_te = X_tr[itr, l, :], X_tr[ite, l, :]
                    yi_tr, yi_te = zy[itr], zy[ite]
                    if not global_z:
                        if yi_tr.std() <= 1e-12:
                            raise DegenerateVarianceError(
                                "response constant within an inner training fold"
                            )
                        m, s = _column_stats(Xi_tr)
                        Xi_tr = (Xi_tr - m) / s
                        Xi_te = (Xi_te - m) / s
                        yi_tr = (yi_tr - yi_tr.mean()) / yi_tr.std()
                    for a, alpha in enumerate(grid):
                        inner_scores[l, a] += _fit_and_score(
                            Xi_tr, yi_tr, Xi_te, yi_te, alpha
                        )
            chosen = [
                grid[max(range(len(grid)),
                         key=lambda a: (inner_scores[l, a], grid[a]))]
                for l in range(n_layers)
            ]
        else:
            # training fold too small to split again; take the most
            # regularized candidate instead of guessing
            chosen = [grid[-1]] * n_layers

        for l in range(n_layers):
            alpha = chosen[l]
            sol = ridge_fit(X_tr[:, l, :], zy, alpha, train_idx=tr, test_idx=te)
            fold_corrs[l, fold] = _pearson_or_zero(y_te, X_te[:, l, :] @ sol.beta)
            fold_alphas[l, fold] = alpha

    rho = np.clip(fold_corrs.mean(axis=1), -1.0, 1.0)
    return LayerScores(rho=rho, fold_corrs=fold_corrs, fold_alphas=fold_alphas)


def _to_int_seed(seed):
    if isinstance(seed, (int, np.integer)):
        return int(seed)
    raise ValueError(f"seed must be an integer, got {type(seed).__name__}")


def best_layer(scores):
    """Index of the peak layer score and whether the peak was tied.

    Ties resolve to the lower index.
    """
    rho = np.asarray(getattr(scores, "rho", scores), float)
    if rho.size == 0:
        raise ValueError("no layers")
    idx = int(np.argmax(rho))
    tied = int(np.sum(rho == rho[idx])) > 1
    return idx, tied


def modal_alpha(fold_alphas):
    """Most frequent alpha across folds; frequency ties go larger."""
    values, counts = np.unique(np.asarray(fold_alphas, float), return_counts=True)
    order = max(range(len(values)), key=lambda i: (counts[i], values[i]))
    return float(values[order])


def mean_ci(values, level=0.95):
    """Mean and symmetric t-based confidence interval across units."""
    values = np.asarray(values, float)
    n = len(values)
    if n < 2:
        raise DataError("confidence interval undefined for a single unit")
    m = float(values.mean())
    if np.ptp(values) == 0.0:
        # identical inputs collapse exactly, with no rounding residue
        # from the mean subtraction
        return m, m, m
    se = float(values.std(ddof=1)) / np.sqrt(n)
    half = float(t_ppf(0.5 + level / 2.0, n - 1) * se)
    return m, m - half, m + half


def layer_curve_summary(result, level=0.95):
    """Across-subject mean and CI per (roi, layer).

    Returns rows sorted by (roi, layer); every (roi, layer) group needs
    at least two subjects.
    """
    groups = {}
    for (subject, roi_key), scores in result.cells.items():
        for layer, rho in enumerate(scores.rho):
            groups.setdefault((roi_key, layer), []).append(float(rho))
    rows = []
    for (roi_key, layer) in sorted(groups):
        m, lo, hi = mean_ci(groups[(roi_key, layer)], level)
        rows.append(
            {
                "model": result.model_id,
                "roi": roi_key,
                "layer": layer,
                "mean": m,
                "ci_low": lo,
                "ci_high": hi,
                "n": len(groups[(roi_key, layer)]),
            }
        )
    return rows


# ---------------------------------------------------------------------------
# flat result table
# ---------------------------------------------------------------------------

def result_rows(result):
    """Flatten an EncodingResult into sorted ResultRow records.

    The per-row alpha is the modal fold alpha for that layer.
    """
    rows = []
    for (subject, roi_key), scores in result.cells.items():
        for layer in range(scores.rho.shape[0]):
            rows.append(
                ResultRow(
                    model=result.model_id,
                    subject=subject,
                    roi=roi_key,
                    layer=layer,
                    rho=float(scores.rho[layer]),
                    alpha=modal_alpha(scores.fold_alphas[layer]),
                )
            )
    return sorted(rows)


def write_results_tsv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for r in rows:
            writer.writerow(
                [r.model, r.subject, r.roi, r.layer, repr(r.rho), repr(r.alpha)]
            )


def read_results_tsv(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader, None)
        if header is None or tuple(header) != RESULT_COLUMNS:
            raise DataError(f"{path}: unexpected header {header}")
        for rec in reader:
            rows.append(
                ResultRow(rec[0], rec[1], rec[2], int(rec[3]),
                          float(rec[4]), float(rec[5]))
            )
    return rows
