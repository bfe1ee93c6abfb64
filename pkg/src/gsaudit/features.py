"""Classifier input construction: sparse rating matrix, optional stereotype
degree columns, L2 row normalization, balanced class weights, and seeded
stratified splits."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .corpus import RatingCorpus
from .stereotype import StereotypeModel, all_alignment_degrees

#: Movie ids at most this large index matrix columns directly by id (column
#: j holds movie id j+1, matching the id-range width of compact catalogs).
#: Larger / sparse id spaces fall back to dense sorted-id column mapping.
ID_RANGE_LIMIT = 100_000


@dataclass(frozen=True)
class ClassWeights:
    weight_male: float
    weight_female: float

    def __post_init__(self):
        if self.weight_male <= 0 or self.weight_female <= 0:
            raise ValueError("class weights must be positive")

    def per_sample(self, labels: np.ndarray) -> np.ndarray:
        """Expand to one weight per row (labels: 1 = male, 0 = female)."""
        labels = np.asarray(labels)
        return np.where(labels == 1, self.weight_male, self.weight_female)


def balanced_weights(labels: np.ndarray) -> ClassWeights:
    """Balanced heuristic: weight_c = N / (2 * N_c)."""
    labels = np.asarray(labels)
    n = labels.size
    n_male = int((labels == 1).sum())
    n_female = n - n_male
    if n_male == 0 or n_female == 0:
        raise ValueError("both classes must be present to balance weights")
    return ClassWeights(weight_male=n / (2.0 * n_male), weight_female=n / (2.0 * n_female))


@dataclass(frozen=True)
class FeatureMatrix:
    """Sparse user-by-feature matrix, row-aligned to gender labels.

    Columns are movie ratings (0 = unrated), plus two trailing raw degree
    columns (d_male, d_female) when built with a stereotype model.
    """

    X: sp.csr_matrix
    labels: np.ndarray  # 1 = male, 0 = female, per row
    user_ids: np.ndarray
    movie_column_ids: np.ndarray  # movie id of each rating column, in order
    gs_augmented: bool
    normalized: bool
    column_scheme: str  # "id_range" | "dense"

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_cols(self) -> int:
        return self.X.shape[1]

    def column_labels(self) -> list[str]:
        cols = [f"movie:{int(m)}" for m in self.movie_column_ids]
        if self.gs_augmented:
            cols += ["d_male", "d_female"]
        return cols

    def subset(self, rows: np.ndarray) -> "FeatureMatrix":
        rows = np.asarray(rows)
        return replace(
            self,
            X=self.X[rows],
            labels=self.labels[rows],
            user_ids=self.user_ids[rows],
        )


def build_matrix(
    corpus: RatingCorpus,
    model: StereotypeModel | None = None,
    mode: str = "cardinality",
) -> FeatureMatrix:
    """Build the user-by-movie rating matrix, degree-augmented when a model is given.

    Degree columns hold raw counts and are appended before any normalization,
    so a later :func:`l2_normalize_rows` scales the whole feature vector.
    """
    if corpus.n_users == 0:
        raise ValueError("cannot build features for an empty corpus")

    movie_ids = np.array(sorted(m.movie_id for m in corpus.movies), dtype=np.int64)
    max_id = int(movie_ids[-1]) if movie_ids.size else 0
    if movie_ids.size and 1 <= int(movie_ids[0]) and max_id <= ID_RANGE_LIMIT:
        scheme = "id_range"
        n_movie_cols = max_id
        cols = corpus.ratings.movie_ids - 1
        column_ids = np.arange(1, max_id + 1, dtype=np.int64)
    else:
        scheme = "dense"
        n_movie_cols = movie_ids.size
        cols = np.searchsorted(movie_ids, corpus.ratings.movie_ids)
        column_ids = movie_ids

    rows = corpus.user_positions(corpus.ratings.user_ids)
    data = corpus.ratings.values.astype(np.float64)
    X = sp.csr_matrix((data, (rows, cols)), shape=(corpus.n_users, n_movie_cols))

    if model is not None:
        degrees = all_alignment_degrees(corpus, model, mode).astype(np.float64)
        X = sp.hstack([X, sp.csr_matrix(degrees)], format="csr")

    X.sum_duplicates()
    X.eliminate_zeros()
    return FeatureMatrix(
        X=X,
        labels=corpus.gender_labels(),
        user_ids=np.array([u.user_id for u in corpus.users], dtype=np.int64),
        movie_column_ids=column_ids,
        gs_augmented=model is not None,
        normalized=False,
        column_scheme=scheme,
    )


def l2_normalize_rows(fm: FeatureMatrix) -> FeatureMatrix:
    """Scale every non-zero row to unit Euclidean norm; zero rows stay zero."""
    X = fm.X.tocsr(copy=True)
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    X = sp.diags(scale) @ X
    return replace(fm, X=X.tocsr(), normalized=True)


def build_normalized_features(
    corpus: RatingCorpus,
    model: StereotypeModel | None = None,
    mode: str = "cardinality",
    gs_scaling: str = "unit",
) -> FeatureMatrix:
    """Classifier-ready features: unit-norm rows, degree columns optional.

    ``gs_scaling`` controls how the two degree columns join the ratings:

    * ``"unit"`` (default): rating block and degree block are each scaled to
      unit norm, then the joined row is normalized.  Both signal channels
      keep a user-independent scale.
    * ``"raw"``: raw degree counts are appended first and the whole row is
      normalized once.  Degrees grow with a user's rating count, so for
      active users they absorb most of the row norm and mute the rating
      block; kept for comparison runs.
    """
    if gs_scaling not in ("unit", "raw"):
        raise ValueError("gs_scaling must be 'unit' or 'raw'")
    if model is None:
        return l2_normalize_rows(build_matrix(corpus, None))
    if gs_scaling == "raw":
        return l2_normalize_rows(build_matrix(corpus, model, mode=mode))
    rating = l2_normalize_rows(build_matrix(corpus, None))
    degrees = all_alignment_degrees(corpus, model, mode).astype(np.float64)
    norms = np.sqrt((degrees * degrees).sum(axis=1))
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    joined = sp.hstack([rating.X, sp.csr_matrix(degrees * scale[:, None])], format="csr")
    fm = replace(rating, X=joined, gs_augmented=True, normalized=False)
    return l2_normalize_rows(fm)


@dataclass(frozen=True)
class SplitPlan:
    """Per-row partition assignment for an experiment.

    holdout: assignments hold 0 (train) / 1 (test).
    stratified_kfold: assignments hold the test-fold index of each row.
    """

    kind: str  # "holdout" | "stratified_kfold"
    assignments: np.ndarray
    seed: int
    test_fraction: float | None = None
    k: int | None = None

    def holdout_indices(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind != "holdout":
            raise ValueError("not a holdout plan")
        return np.flatnonzero(self.assignments == 0), np.flatnonzero(self.assignments == 1)

    def fold_indices(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        if self.kind != "stratified_kfold":
            raise ValueError("not a k-fold plan")
        return np.flatnonzero(self.assignments != fold), np.flatnonzero(self.assignments == fold)


def _class_shuffled(labels: np.ndarray, value: int, rng: np.random.Generator) -> np.ndarray:
    idx = np.flatnonzero(np.asarray(labels) == value)
    rng.shuffle(idx)
    return idx


def make_holdout_split(labels: np.ndarray, test_fraction: float, seed: int) -> SplitPlan:
    """Stratified holdout: round(test_fraction * N_c) test rows per class."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    assignments = np.zeros(labels.size, dtype=np.int64)
    for value in (1, 0):
        idx = _class_shuffled(labels, value, rng)
        n_test = int(round(test_fraction * idx.size))
        assignments[idx[:n_test]] = 1
    return SplitPlan("holdout", assignments, seed, test_fraction=test_fraction)


def make_split(
    labels: np.ndarray,
    kind: str,
    seed: int,
    test_fraction: float = 0.2,
    k: int = 10,
) -> SplitPlan:
    """Dispatch to the holdout or stratified k-fold plan by name."""
    if kind == "holdout":
        return make_holdout_split(labels, test_fraction, seed)
    if kind == "stratified_kfold":
        return make_stratified_kfold(labels, k, seed)
    raise ValueError(f"unknown split kind {kind!r}")


def make_stratified_kfold(labels: np.ndarray, k: int, seed: int) -> SplitPlan:
    """Per-class shuffle with round-robin fold assignment (class ratio within
    one sample of the global ratio in every fold)."""
    if k < 2:
        raise ValueError("k must be at least 2")
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    assignments = np.zeros(labels.size, dtype=np.int64)
    offset = 0  # continue the round-robin across classes so remainder
    for value in (1, 0):  # members spread over different folds
        idx = _class_shuffled(labels, value, rng)
        if idx.size < k:
            raise ValueError(f"class {value} has fewer members ({idx.size}) than k={k}")
        assignments[idx] = (offset + np.arange(idx.size)) % k
        offset = (offset + idx.size) % k
    return SplitPlan("stratified_kfold", assignments, seed, k=k)


def dump_matrix(fm: FeatureMatrix, out_dir: Path | str) -> None:
    """Write sparse triplets (row, col, value) and per-row labels for external checks."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    coo = fm.X.tocoo()
    with (out / "matrix.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "col", "value"])
        for r, c, v in zip(coo.row, coo.col, coo.data):
            w.writerow([int(r), int(c), repr(float(v))])
    with (out / "labels.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "user_id", "label"])
        for i, (uid, lab) in enumerate(zip(fm.user_ids, fm.labels)):
            w.writerow([i, int(uid), int(lab)])
