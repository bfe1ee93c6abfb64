"""Gender-inference classifiers over sparse rating features.

All four learners are implemented here rather than delegated to an ML
library: L2-regularized logistic regression (L-BFGS), linear SVM (dual
coordinate descent), AdaBoost over decision stumps (sparse-aware exact
threshold search), and gradient-boosted depth-bounded trees on logistic
loss with second-order leaf weights.  Every fit is deterministic given
(data, config, seed).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from numba import njit

from .features import ClassWeights, balanced_weights, make_stratified_kfold
from .optim import minimize_lbfgs

KINDS = ("lr", "svm", "adaboost", "gbt")

MODEL_FORMAT = "gs-audit/model-v1"


@dataclass(frozen=True)
class FitConfig:
    C: float = 1.0
    max_iterations: int = 1000
    tol: float = 1e-6
    seed: int = 0
    rounds: int = 50
    depth: int = 3
    learning_rate: float = 0.3
    reg_lambda: float = 1.0

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.depth < 1:
            raise ValueError("depth must be at least 1")

    def to_dict(self) -> dict:
        return {
            "C": self.C,
            "max_iterations": self.max_iterations,
            "tol": self.tol,
            "seed": self.seed,
            "rounds": self.rounds,
            "depth": self.depth,
            "learning_rate": self.learning_rate,
            "reg_lambda": self.reg_lambda,
        }


def default_config(kind: str) -> FitConfig:
    if kind == "gbt":
        return FitConfig(rounds=100, depth=3, learning_rate=0.3)
    if kind == "adaboost":
        return FitConfig(rounds=50)
    return FitConfig()


def default_grid(kind: str) -> list[FitConfig]:
    if kind in ("lr", "svm"):
        return [FitConfig(C=c) for c in (0.01, 0.1, 1.0, 10.0)]
    base = default_config(kind)
    return [replace(base, rounds=r) for r in (50, 100)]


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    kind: str  # "logistic" | "hinge"
    converged: bool
    iterations: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.weights)) or not np.isfinite(self.bias):
            raise ValueError("model parameters must be finite")


@dataclass(frozen=True)
class Stump:
    feature: int
    threshold: float
    polarity: int  # predicts polarity where value > threshold, else -polarity
    alpha: float


@dataclass(frozen=True)
class StumpEnsemble:
    stumps: tuple[Stump, ...]
    train_errors: tuple[float, ...]  # weighted error of each accepted stump

    def __post_init__(self):
        if not self.stumps:
            raise ValueError("ensemble must contain at least one stump")


@dataclass(frozen=True)
class TreeSplit:
    feature: int
    threshold: float  # value <= threshold routes left


@dataclass(frozen=True)
class Tree:
    """Complete-binary-tree layout: node i has children 2i+1 / 2i+2."""

    splits: dict[int, TreeSplit]
    leaf_values: dict[int, float]
    depth: int


@dataclass(frozen=True)
class BoostedTrees:
    trees: tuple[Tree, ...]
    base_score: float
    learning_rate: float
    train_loss: tuple[float, ...] = field(default=())  # per-round training loss


def _as_csr(matrix) -> sp.csr_matrix:
    X = matrix.X if hasattr(matrix, "X") else matrix
    X = sp.csr_matrix(X, dtype=np.float64)
    if np.isnan(X.data).any():
        raise ValueError("NaN in feature matrix")
    return X

def _signed(labels: np.ndarray) -> np.ndarray:
    labels = np.asarray(labels)
    u = set(np.unique(labels).tolist())
    if not u <= {0, 1}:
        raise ValueError("labels must be 0 (female) / 1 (male)")
    return np.where(labels == 1, 1.0, -1.0)


def _check_two_classes(labels: np.ndarray) -> None:
    labels = np.asarray(labels)
    if (labels == 1).sum() == 0 or (labels == 0).sum() == 0:
        raise ValueError("both classes must be present")


# ---------------------------------------------------------------------------
# logistic regression


def fit_logistic(
    matrix, labels: np.ndarray, weights: ClassWeights, config: FitConfig
) -> LinearModel:
    """Class-weighted logistic loss + ||w||^2 / (2C); bias unpenalized.

    Converged means the gradient infinity norm fell below
    ``config.tol * max(1, initial gradient infinity norm)``.
    """
    X = _as_csr(matrix)
    _check_two_classes(labels)
    if X.shape[0] != len(np.asarray(labels)):
        raise ValueError("row count must match label count")
    y = _signed(labels)
    c = weights.per_sample(labels)
    n, d = X.shape
    inv_c = 1.0 / config.C

    def objective(theta: np.ndarray) -> tuple[float, np.ndarray]:
        w, b = theta[:d], theta[d]
        z = y * (X @ w + b)
        value = float(np.dot(c, np.logaddexp(0.0, -z))) + 0.5 * inv_c * float(w @ w)
        # d/dz logaddexp(0,-z) = -sigmoid(-z)
        r = -c * y / (1.0 + np.exp(z))
        grad = np.empty(d + 1)
        grad[:d] = X.T @ r + inv_c * w
        grad[d] = r.sum()
        return value, grad

    res = minimize_lbfgs(
        objective,
        np.zeros(d + 1),
        max_iterations=config.max_iterations,
        tol=config.tol,
    )
    return LinearModel(
        weights=res.x[:d],
        bias=float(res.x[d]),
        kind="logistic",
        converged=res.converged,
        iterations=res.iterations,
    )


def logistic_loss_grad(
    X, labels: np.ndarray, weights: ClassWeights, C: float, w: np.ndarray, b: float
) -> tuple[float, np.ndarray, float]:
    """Objective value and analytic gradient at (w, b); used for audits."""
    X = _as_csr(X)
    y = _signed(labels)
    c = weights.per_sample(labels)
    z = y * (X @ w + b)
    value = float(np.dot(c, np.logaddexp(0.0, -z))) + 0.5 / C * float(w @ w)
    r = -c * y / (1.0 + np.exp(z))
    return value, X.T @ r + w / C, float(r.sum())


# ---------------------------------------------------------------------------
# linear SVM (dual coordinate descent, L1 hinge)


@njit(cache=True)
def _svm_epoch(indptr, indices, data, y, alpha, w, upper, qii, order):  # pragma: no cover
    max_pg = 0.0
    for t in range(order.shape[0]):
        i = order[t]
        s = w[w.shape[0] - 1]  # implicit constant bias feature
        for k in range(indptr[i], indptr[i + 1]):
            s += data[k] * w[indices[k]]
        g = y[i] * s - 1.0
        if alpha[i] == 0.0:
            pg = min(g, 0.0)
        elif alpha[i] == upper[i]:
            pg = max(g, 0.0)
        else:
            pg = g
        a = abs(pg)
        if a > max_pg:
            max_pg = a
        if pg != 0.0:
            old = alpha[i]
            new = min(max(old - g / qii[i], 0.0), upper[i])
            if new != old:
                alpha[i] = new
                delta = (new - old) * y[i]
                for k in range(indptr[i], indptr[i + 1]):
                    w[indices[k]] += delta * data[k]
                w[w.shape[0] - 1] += delta
    return max_pg


def fit_linear_svm(
    matrix, labels: np.ndarray, weights: ClassWeights, config: FitConfig
) -> LinearModel:
    """Class-weighted hinge loss + ||w||^2 / (2C), solved in the dual.

    The bias is carried as an implicit unit feature (so it is regularized
    with the weights); coordinate order is reshuffled each epoch from the
    config seed, making the fit deterministic.
    """
    X = _as_csr(matrix)
    _check_two_classes(labels)
    if X.shape[0] != len(np.asarray(labels)):
        raise ValueError("row count must match label count")
    y = _signed(labels)
    n, d = X.shape
    # primal argmin of  sum_i c_i*hinge + ||w||^2/(2C)  ==  C*c_i box bounds in the dual
    upper = config.C * weights.per_sample(labels)
    qii = np.asarray(X.multiply(X).sum(axis=1)).ravel() + 1.0  # +1 for the bias feature

    alpha = np.zeros(n)
    w = np.zeros(d + 1)
    rng = np.random.default_rng(config.seed)
    converged = False
    epoch = 0
    for epoch in range(1, config.max_iterations + 1):
        order = rng.permutation(n).astype(np.int64)
        max_pg = _svm_epoch(X.indptr, X.indices, X.data, y, alpha, w, upper, qii, order)
        if max_pg <= config.tol:
            converged = True
            break
    return LinearModel(
        weights=w[:d].copy(),
        bias=float(w[d]),
        kind="hinge",
        converged=converged,
        iterations=epoch,
    )


def hinge_objective(X, labels, weights: ClassWeights, C: float, w, b) -> float:
    X = _as_csr(X)
    y = _signed(labels)
    c = weights.per_sample(labels)
    margins = 1.0 - y * (X @ w + b)
    return float(np.dot(c, np.maximum(margins, 0.0))) + 0.5 / C * (float(w @ w) + b * b)


# ---------------------------------------------------------------------------
# decision stumps + AdaBoost


class _StumpIndex:
    """Per-column value-sorted view of a sparse matrix for threshold search.

    Each column gets a virtual entry at value 0 standing for all of its
    zero rows, so candidate thresholds cover the implicit zero mass too.
    """

    def __init__(self, X: sp.csr_matrix):
        Xc = X.tocsc()
        n, d = Xc.shape
        self.n_rows, self.n_cols = n, d
        nnz_cols = np.repeat(np.arange(d), np.diff(Xc.indptr))

        # augment with one virtual (value 0, row -1) entry per column
        values = np.concatenate([Xc.data, np.zeros(d)])
        rows = np.concatenate([Xc.indices.astype(np.int64), np.full(d, -1, dtype=np.int64)])
        cols = np.concatenate([nnz_cols, np.arange(d)])
        order = np.lexsort((rows, values, cols))  # by column, then value; virtual first on ties
        self.values = values[order]
        self.rows = rows[order]
        self.cols = cols[order]
        counts = np.bincount(self.cols, minlength=d)
        self.seg_start = np.concatenate([[0], np.cumsum(counts)])
        self.virt_pos = np.flatnonzero(self.rows == -1)[np.argsort(self.cols[self.rows == -1])]

        self.nnz_rows = Xc.indices.astype(np.int64)
        self.nnz_cols = nnz_cols

        # candidate split positions: segment boundaries plus every position
        # whose value strictly exceeds its predecessor within the segment
        pos_list, thr_list, col_list, end_list = [], [], [], []
        for j in range(d):
            a, b = int(self.seg_start[j]), int(self.seg_start[j + 1])
            v = self.values[a:b]
            pos_list.append(a)
            thr_list.append(v[0] - 1.0)
            col_list.append(j)
            end_list.append(b)
            interior = a + 1 + np.flatnonzero(v[1:] > v[:-1])
            for p in interior:
                pos_list.append(int(p))
                thr_list.append(0.5 * (self.values[p - 1] + self.values[p]))
                col_list.append(j)
                end_list.append(b)
            pos_list.append(b)
            thr_list.append(v[-1] + 1.0)
            col_list.append(j)
            end_list.append(b)
        self.cand_pos = np.array(pos_list, dtype=np.int64)
        self.cand_thr = np.array(thr_list)
        self.cand_col = np.array(col_list, dtype=np.int64)
        self.cand_end = np.array(end_list, dtype=np.int64)

    def best_stump(self, dist: np.ndarray, y: np.ndarray) -> tuple[Stump, float]:
        """Minimum weighted-error stump under distribution ``dist`` (sums to 1)."""
        u = dist * y
        total = float(u.sum())
        col_u = np.bincount(self.nnz_cols, weights=u[self.nnz_rows], minlength=self.n_cols)

        u_aug = np.where(self.rows >= 0, u[np.clip(self.rows, 0, None)], 0.0)
        u_aug[self.virt_pos] = total - col_u  # zero-row mass of each column
        csum = np.concatenate([[0.0], np.cumsum(u_aug)])

        above = csum[self.cand_end] - csum[self.cand_pos]
        err_plus = 0.5 * (1.0 + total) - above
        err = np.minimum(err_plus, 1.0 - err_plus)
        best = int(np.argmin(err))
        polarity = 1 if err_plus[best] <= 1.0 - err_plus[best] else -1
        stump = Stump(
            feature=int(self.cand_col[best]),
            threshold=float(self.cand_thr[best]),
            polarity=polarity,
            alpha=0.0,
        )
        return stump, float(err[best])

    def apply(self, stump: Stump) -> np.ndarray:
        """Stump predictions (+-1) on the indexed training matrix."""
        j = stump.feature
        a, b = int(self.seg_start[j]), int(self.seg_start[j + 1])
        # find the split position from the threshold
        p = a + int(np.searchsorted(self.values[a:b], stump.threshold, side="right"))
        h = np.full(self.n_rows, -stump.polarity, dtype=np.float64)
        seg_rows = self.rows[p:b]
        real = seg_rows[seg_rows >= 0]
        if int(self.virt_pos[j]) >= p:  # zero rows sit above the threshold
            h[:] = stump.polarity
            below = self.rows[a:p]
            h[below[below >= 0]] = -stump.polarity
        else:
            h[real] = stump.polarity
        return h


def fit_adaboost(
    matrix, labels: np.ndarray, weights: ClassWeights, rounds: int = 50, seed: int = 0
) -> StumpEnsemble:
    """Discrete AdaBoost over best-threshold decision stumps.

    The starting sample distribution is scaled by the class weights; each
    round fits the lowest weighted-error stump, with stage weight
    ``0.5 * ln((1 - err) / err)``.  Stops early on err >= 0.5 or err == 0.
    """
    X = _as_csr(matrix)
    _check_two_classes(labels)
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    y = _signed(labels)
    index = _StumpIndex(X)

    dist = weights.per_sample(labels).astype(np.float64)
    dist /= dist.sum()
    stumps: list[Stump] = []
    errors: list[float] = []
    for _ in range(rounds):
        stump, err = index.best_stump(dist, y)
        err = max(err, 0.0)
        if err >= 0.5:
            break
        if err <= 1e-12:  # perfect stump up to cumsum float dust
            stumps.append(replace(stump, alpha=0.5 * np.log((1.0 - 1e-16) / 1e-16)))
            errors.append(err)
            break
        alpha = 0.5 * np.log((1.0 - err) / err)
        stumps.append(replace(stump, alpha=alpha))
        errors.append(err)
        h = index.apply(stump)
        dist = dist * np.exp(-alpha * y * h)
        dist /= dist.sum()
    if not stumps:
        # no stump beats chance on this distribution: keep the best one with
        # zero stage weight so the ensemble is well-formed (scores all 0)
        stump, err = index.best_stump(dist, y)
        stumps.append(stump)
        errors.append(err)
    return StumpEnsemble(stumps=tuple(stumps), train_errors=tuple(errors))


# ---------------------------------------------------------------------------
# gradient-boosted trees (logistic loss, second-order leaf weights)

_MAX_BINS = 64


class _BinnedColumns:
    """Quantile-binned view of a sparse matrix for histogram split search."""

    def __init__(self, X: sp.csr_matrix):
        Xc = X.tocsc()
        n, d = Xc.shape
        self.n_rows, self.n_cols = n, d
        self.nnz_rows = Xc.indices.astype(np.int64)
        self.nnz_cols = np.repeat(np.arange(d), np.diff(Xc.indptr))

        self.thresholds: list[np.ndarray] = []
        bin_ids = np.zeros(Xc.nnz, dtype=np.int64)
        self.zero_bin = np.zeros(d, dtype=np.int64)
        for j in range(d):
            a, b = int(Xc.indptr[j]), int(Xc.indptr[j + 1])
            vals = Xc.data[a:b]
            distinct = np.unique(vals)
            if distinct.size <= _MAX_BINS - 1:
                thr = distinct
            else:
                qs = np.quantile(vals, np.linspace(0, 1, _MAX_BINS - 1))
                thr = np.unique(qs)
            self.thresholds.append(thr)
            bin_ids[a:b] = np.searchsorted(thr, vals, side="left")
            self.zero_bin[j] = int(np.searchsorted(thr, 0.0, side="left"))
        self.nnz_bin = bin_ids
        self.n_bins = _MAX_BINS + 1  # bin id can equal len(thr)
        self.col_bin_key = self.nnz_cols * self.n_bins + self.nnz_bin

    def column_dense(self, Xc: sp.csc_matrix, j: int) -> np.ndarray:
        return np.asarray(Xc[:, [j]].todense()).ravel()


def _grow_tree(
    binned: _BinnedColumns,
    Xc: sp.csc_matrix,
    g: np.ndarray,
    h: np.ndarray,
    depth: int,
    reg_lambda: float,
) -> tuple[Tree, np.ndarray]:
    """One regression tree on gradients/hessians; returns (tree, leaf node of each row)."""
    n, d = binned.n_rows, binned.n_cols
    n_bins = binned.n_bins
    node = np.zeros(n, dtype=np.int64)
    splittable = {0}
    splits: dict[int, TreeSplit] = {}

    for level in range(depth):
        if not splittable:
            break
        level_nodes = sorted(splittable)
        node_slot = {nid: k for k, nid in enumerate(level_nodes)}
        n_slots = len(level_nodes)

        slot_of_row = np.full(n, -1, dtype=np.int64)
        for nid, k in node_slot.items():
            slot_of_row[node == nid] = k
        active = slot_of_row[binned.nnz_rows] >= 0
        key = (
            slot_of_row[binned.nnz_rows[active]] * (d * n_bins)
            + binned.col_bin_key[active]
        )
        size = n_slots * d * n_bins
        g_hist = np.bincount(key, weights=g[binned.nnz_rows[active]], minlength=size)
        h_hist = np.bincount(key, weights=h[binned.nnz_rows[active]], minlength=size)
        g_hist = g_hist.reshape(n_slots, d, n_bins)
        h_hist = h_hist.reshape(n_slots, d, n_bins)

        row_mask = slot_of_row >= 0
        g_tot = np.bincount(slot_of_row[row_mask], weights=g[row_mask], minlength=n_slots)
        h_tot = np.bincount(slot_of_row[row_mask], weights=h[row_mask], minlength=n_slots)

        # implicit zero-valued rows: whatever mass is missing from the
        # non-zero histogram belongs to each column's zero bin
        g_zero = g_tot[:, None] - g_hist.sum(axis=2)
        h_zero = h_tot[:, None] - h_hist.sum(axis=2)
        slots = np.arange(n_slots)[:, None]
        cols = np.arange(d)[None, :]
        g_hist[slots, cols, binned.zero_bin[None, :]] += g_zero
        h_hist[slots, cols, binned.zero_bin[None, :]] += h_zero

        gl = np.cumsum(g_hist, axis=2)[:, :, :-1]  # left mass at split after bin k
        hl = np.cumsum(h_hist, axis=2)[:, :, :-1]
        gr = g_tot[:, None, None] - gl
        hr = h_tot[:, None, None] - hl
        parent = (g_tot**2) / (h_tot + reg_lambda)
        gain = 0.5 * (gl**2 / (hl + reg_lambda) + gr**2 / (hr + reg_lambda)
                      - parent[:, None, None])
        # splits beyond a column's real threshold list are meaningless
        for j in range(d):
            k = len(binned.thresholds[j])
            gain[:, j, k:] = -np.inf

        next_splittable: set[int] = set()
        n_split_pos = gain.shape[2]
        for nid, k in node_slot.items():
            flat = int(np.argmax(gain[k]))
            best_gain = float(gain[k].ravel()[flat])
            if not np.isfinite(best_gain) or best_gain <= 1e-12:
                continue
            j, bin_k = divmod(flat, n_split_pos)
            threshold = float(binned.thresholds[j][bin_k])
            splits[nid] = TreeSplit(feature=int(j), threshold=threshold)
            rows = np.flatnonzero(node == nid)
            go_right = binned.column_dense(Xc, int(j))[rows] > threshold
            node[rows[go_right]] = 2 * nid + 2
            node[rows[~go_right]] = 2 * nid + 1
            if level + 1 < depth:
                next_splittable.update((2 * nid + 1, 2 * nid + 2))
        splittable = next_splittable

    leaf_values: dict[int, float] = {}
    for nid in np.unique(node):
        rows = node == nid
        g_sum = float(g[rows].sum())
        h_sum = float(h[rows].sum())
        leaf_values[int(nid)] = -g_sum / (h_sum + reg_lambda)
    tree = Tree(splits=splits, leaf_values=leaf_values, depth=depth)
    return tree, node


def _tree_leaf_of(tree: Tree, Xc: sp.csc_matrix) -> np.ndarray:
    n = Xc.shape[0]
    node = np.zeros(n, dtype=np.int64)
    for _ in range(tree.depth):
        moved = False
        for nid, split in tree.splits.items():
            rows = np.flatnonzero(node == nid)
            if rows.size == 0:
                continue
            vals = np.asarray(Xc[:, [split.feature]].todense()).ravel()[rows]
            right = vals > split.threshold
            node[rows[right]] = 2 * nid + 2
            node[rows[~right]] = 2 * nid + 1
            moved = True
        if not moved:
            break
    return node


def fit_boosted_trees(
    matrix, labels: np.ndarray, weights: ClassWeights, config: FitConfig
) -> BoostedTrees:
    """Gradient boosting on class-weighted logistic loss.

    Leaf weights use the second-order rule -G / (H + lambda); the base score
    is the weighted prior log-odds, so a zero-round model predicts the
    weighted class prior for every row.
    """
    X = _as_csr(matrix)
    _check_two_classes(labels)
    if config.rounds < 0:
        raise ValueError("rounds must be non-negative")
    labels = np.asarray(labels)
    c = weights.per_sample(labels)
    y01 = (labels == 1).astype(np.float64)

    prior = float(np.dot(c, y01) / c.sum())
    base = float(np.log(prior / (1.0 - prior)))
    margin = np.full(X.shape[0], base)

    binned = _BinnedColumns(X)
    Xc = X.tocsc()
    trees: list[Tree] = []
    losses: list[float] = []

    def weighted_loss() -> float:
        # logistic loss written on the margin to stay finite for large scores
        return float(np.dot(c, np.logaddexp(0.0, margin) - y01 * margin))

    losses.append(weighted_loss())
    for _ in range(config.rounds):
        p = 1.0 / (1.0 + np.exp(-margin))
        g = c * (p - y01)
        h = np.maximum(c * p * (1.0 - p), 1e-16)
        tree, leaf_of_row = _grow_tree(binned, Xc, g, h, config.depth, config.reg_lambda)
        trees.append(tree)
        values = np.array([tree.leaf_values[int(nid)] for nid in leaf_of_row])
        margin = margin + config.learning_rate * values
        losses.append(weighted_loss())
    return BoostedTrees(
        trees=tuple(trees),
        base_score=base,
        learning_rate=config.learning_rate,
        train_loss=tuple(losses),
    )


# ---------------------------------------------------------------------------
# prediction + dispatch


def predict_scores(model, matrix) -> np.ndarray:
    """Real-valued score per row: probability of the male class for logistic
    and boosted trees, signed margin for hinge/stump models."""
    X = _as_csr(matrix)
    if isinstance(model, LinearModel):
        if X.shape[1] != model.weights.shape[0]:
            raise ValueError(
                f"feature count {X.shape[1]} does not match model ({model.weights.shape[0]})"
            )
        margin = X @ model.weights + model.bias
        if model.kind == "logistic":
            return 1.0 / (1.0 + np.exp(-margin))
        return margin
    if isinstance(model, StumpEnsemble):
        needed = max(s.feature for s in model.stumps)
        if X.shape[1] <= needed:
            raise ValueError(f"feature count {X.shape[1]} too small for stump on {needed}")
        Xc = X.tocsc()
        score = np.zeros(X.shape[0])
        for s in model.stumps:
            col = np.asarray(Xc[:, [s.feature]].todense()).ravel()
            h = np.where(col > s.threshold, s.polarity, -s.polarity)
            score += s.alpha * h
        return score
    if isinstance(model, BoostedTrees):
        margin = np.full(X.shape[0], model.base_score)
        Xc = X.tocsc()
        for tree in model.trees:
            leaves = _tree_leaf_of(tree, Xc)
            margin += model.learning_rate * np.array(
                [tree.leaf_values[int(nid)] for nid in leaves]
            )
        return 1.0 / (1.0 + np.exp(-margin))
    raise TypeError(f"unknown model type {type(model).__name__}")


def predict_classes(model, matrix) -> np.ndarray:
    scores = predict_scores(model, matrix)
    if isinstance(model, LinearModel) and model.kind == "hinge":
        return (scores >= 0.0).astype(np.uint8)
    if isinstance(model, StumpEnsemble):
        return (scores >= 0.0).astype(np.uint8)
    return (scores >= 0.5).astype(np.uint8)


def fit(kind: str, matrix, labels, weights: ClassWeights, config: FitConfig):
    if kind == "lr":
        return fit_logistic(matrix, labels, weights, config)
    if kind == "svm":
        return fit_linear_svm(matrix, labels, weights, config)
    if kind == "adaboost":
        return fit_adaboost(matrix, labels, weights, rounds=config.rounds, seed=config.seed)
    if kind == "gbt":
        return fit_boosted_trees(matrix, labels, weights, config)
    raise ValueError(f"unknown classifier kind {kind!r}; expected one of {KINDS}")


def model_converged(model) -> bool:
    return model.converged if isinstance(model, LinearModel) else True


# ---------------------------------------------------------------------------
# grid search


@dataclass(frozen=True)
class GridSearchResult:
    best: FitConfig
    mean_scores: tuple[float, ...]  # aligned to the grid, NaN for failed configs
    failures: tuple[str, ...]


def grid_search(
    matrix,
    labels: np.ndarray,
    kind: str,
    grid: Sequence[FitConfig],
    inner_k: int = 3,
    seed: int = 0,
    objective: str = "auc",
) -> GridSearchResult:
    """Pick the grid config with the best mean inner-CV objective.

    Ties break toward smaller C, then grid order.  A config whose fit raises
    is disqualified and recorded, not fatal (unless every config fails).
    """
    from .eval import auc  # deferred: eval builds on this module

    if objective != "auc":
        raise ValueError("only the AUC objective is supported")
    if not grid:
        raise ValueError("grid must be non-empty")
    X = _as_csr(matrix)
    labels = np.asarray(labels)
    plan = make_stratified_kfold(labels, inner_k, seed)

    means = np.full(len(grid), np.nan)
    failures: list[str] = []
    for gi, config in enumerate(grid):
        scores = []
        try:
            for fold in range(inner_k):
                train_idx, test_idx = plan.fold_indices(fold)
                w = balanced_weights(labels[train_idx])
                model = fit(kind, X[train_idx], labels[train_idx], w, config)
                scores.append(auc(predict_scores(model, X[test_idx]), labels[test_idx]))
            means[gi] = float(np.mean(scores))
        except (ValueError, FloatingPointError) as exc:
            failures.append(f"config {gi}: {exc}")
    if np.all(np.isnan(means)):
        raise ValueError("every grid config failed: " + "; ".join(failures))

    # sort key: score desc, then C asc, then grid order
    best_idx = 0
    best_key = None
    for gi, config in enumerate(grid):
        if np.isnan(means[gi]):
            continue
        key = (-means[gi], config.C, gi)
        if best_key is None or key < best_key:
            best_key = key
            best_idx = gi
    return GridSearchResult(
        best=grid[best_idx], mean_scores=tuple(means.tolist()), failures=tuple(failures)
    )


# ---------------------------------------------------------------------------
# serialization


def model_to_dict(model, config: FitConfig | None = None) -> dict:
    doc: dict = {"format": MODEL_FORMAT}
    if config is not None:
        doc["config"] = config.to_dict()
    if isinstance(model, LinearModel):
        doc.update(
            model_type="linear",
            kind=model.kind,
            weights=model.weights.tolist(),
            bias=model.bias,
            converged=model.converged,
            iterations=model.iterations,
        )
    elif isinstance(model, StumpEnsemble):
        doc.update(
            model_type="stump_ensemble",
            stumps=[
                {"feature": s.feature, "threshold": s.threshold,
                 "polarity": s.polarity, "alpha": s.alpha}
                for s in model.stumps
            ],
            train_errors=list(model.train_errors),
        )
    elif isinstance(model, BoostedTrees):
        doc.update(
            model_type="boosted_trees",
            base_score=model.base_score,
            learning_rate=model.learning_rate,
            trees=[
                {
                    "depth": t.depth,
                    "splits": {str(k): {"feature": s.feature, "threshold": s.threshold}
                               for k, s in t.splits.items()},
                    "leaf_values": {str(k): v for k, v in t.leaf_values.items()},
                }
                for t in model.trees
            ],
        )
    else:
        raise TypeError(f"unknown model type {type(model).__name__}")
    return doc


def model_from_dict(doc: dict):
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model document format {doc.get('format')!r}")
    mt = doc["model_type"]
    if mt == "linear":
        return LinearModel(
            weights=np.array(doc["weights"]),
            bias=float(doc["bias"]),
            kind=doc["kind"],
            converged=bool(doc["converged"]),
            iterations=int(doc["iterations"]),
        )
    if mt == "stump_ensemble":
        return StumpEnsemble(
            stumps=tuple(
                Stump(s["feature"], s["threshold"], s["polarity"], s["alpha"])
                for s in doc["stumps"]
            ),
            train_errors=tuple(doc["train_errors"]),
        )
    if mt == "boosted_trees":
        return BoostedTrees(
            trees=tuple(
                Tree(
                    splits={int(k): TreeSplit(v["feature"], v["threshold"])
                            for k, v in t["splits"].items()},
                    leaf_values={int(k): float(v) for k, v in t["leaf_values"].items()},
                    depth=int(t["depth"]),
                )
                for t in doc["trees"]
            ),
            base_score=float(doc["base_score"]),
            learning_rate=float(doc["learning_rate"]),
        )
    raise ValueError(f"unknown model_type {mt!r}")


def save_model(model, path, config: FitConfig | None = None) -> None:
    from pathlib import Path

    Path(path).write_text(json.dumps(model_to_dict(model, config), indent=2), encoding="utf-8")


def load_model(path):
    from pathlib import Path

    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
