import csv

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gsaudit.corpus import (
    FEMALE,
    MALE,
    GenreVocabulary,
    MovieRecord,
    RatingCorpus,
    RatingTable,
    UserRecord,
)
from gsaudit.features import (
    ClassWeights,
    FeatureMatrix,
    balanced_weights,
    build_matrix,
    build_normalized_features,
    dump_matrix,
    l2_normalize_rows,
    make_holdout_split,
    make_stratified_kfold,
)
from gsaudit.stereotype import default_model


def one_user_corpus():
    return RatingCorpus(
        users=[UserRecord(1, MALE)],
        movies=[MovieRecord(5, "T", frozenset({"Action", "War", "Drama"}))],
        ratings=RatingTable([1], [5], [4], [0]),
        vocabulary=GenreVocabulary(),
    )


def small_matrix(values) -> FeatureMatrix:
    X = sp.csr_matrix(np.asarray(values, dtype=float))
    return FeatureMatrix(
        X=X,
        labels=np.zeros(X.shape[0], dtype=np.uint8),
        user_ids=np.arange(X.shape[0]),
        movie_column_ids=np.arange(1, X.shape[1] + 1),
        gs_augmented=False,
        normalized=False,
        column_scheme="id_range",
    )


def test_gs_augmented_row_hand_example():
    fm = build_matrix(one_user_corpus(), default_model())
    assert fm.n_cols == 5 + 2  # id-range columns 1..5 plus two degree columns
    row = fm.X.toarray()[0]
    assert row[4] == 4.0  # movie id 5 -> column 4, rating value
    assert row[5] == 2.0 and row[6] == 1.0  # d_male, d_female
    assert fm.X.nnz == 3


def test_rating_columns_unchanged_by_augmentation(small_corpus):
    plain = build_matrix(small_corpus, None)
    augmented = build_matrix(small_corpus, default_model())
    assert augmented.n_cols == plain.n_cols + 2
    diff = (augmented.X[:, : plain.n_cols] - plain.X)
    assert diff.nnz == 0


def test_dense_columns_for_catalog_scale_ids():
    corpus = RatingCorpus(
        users=[UserRecord(1, MALE), UserRecord(2, FEMALE)],
        movies=[MovieRecord(1_800_000_111, "A", frozenset({"Drama"})),
                MovieRecord(1_900_000_222, "B", frozenset({"Action"}))],
        ratings=RatingTable([1, 2], [1_800_000_111, 1_900_000_222], [5, 2], [0, 0]),
        vocabulary=GenreVocabulary(),
    )
    fm = build_matrix(corpus, None)
    assert fm.column_scheme == "dense"
    assert fm.n_cols == 2
    assert fm.X[0, 0] == 5.0 and fm.X[1, 1] == 2.0


def test_l2_normalize_three_four_five():
    fm = l2_normalize_rows(small_matrix([[3.0, 4.0]]))
    assert np.allclose(fm.X.toarray(), [[0.6, 0.8]])
    assert fm.normalized


def test_l2_normalize_keeps_zero_rows():
    fm = l2_normalize_rows(small_matrix([[0.0, 0.0], [2.0, 0.0]]))
    out = fm.X.toarray()
    assert np.all(out[0] == 0.0)
    assert np.allclose(out[1], [1.0, 0.0])


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (3, 6),
              elements=st.one_of(st.just(0.0), st.floats(0.25, 5.0))))
def test_l2_normalize_unit_norm_and_idempotent(values):
    fm = small_matrix(values)
    once = l2_normalize_rows(fm)
    norms = np.linalg.norm(once.X.toarray(), axis=1)
    for i, row in enumerate(values):
        if np.any(row != 0):
            assert abs(norms[i] - 1.0) <= 1e-9
        else:
            assert norms[i] == 0.0
    twice = l2_normalize_rows(once)
    assert np.max(np.abs(twice.X.toarray() - once.X.toarray())) <= 1e-9


def test_balanced_weights_formula():
    labels = np.array([1] * 4331 + [0] * 1709)
    w = balanced_weights(labels)
    assert w.weight_male == pytest.approx(6040 / (2 * 4331))
    assert w.weight_female == pytest.approx(6040 / (2 * 1709))
    assert round(w.weight_male, 4) == 0.6973
    assert round(w.weight_female, 4) == 1.7671


def test_balanced_weights_even_and_ninety_ten():
    even = balanced_weights(np.array([1, 1, 0, 0]))
    assert (even.weight_male, even.weight_female) == (1.0, 1.0)
    skew = balanced_weights(np.array([1] * 90 + [0] * 10))
    assert skew.weight_male == pytest.approx(0.5556, abs=1e-4)
    assert skew.weight_female == pytest.approx(5.0)


def test_balanced_weights_single_class_rejected():
    with pytest.raises(ValueError, match="both classes"):
        balanced_weights(np.ones(5, dtype=int))


@settings(max_examples=30, deadline=None)
@given(n_male=st.integers(1, 60), n_female=st.integers(1, 60))
def test_weighted_count_identity(n_male, n_female):
    labels = np.array([1] * n_male + [0] * n_female)
    w = balanced_weights(labels)
    assert w.weight_male * n_male + w.weight_female * n_female == pytest.approx(len(labels))
    if n_male > n_female:
        assert w.weight_female > w.weight_male
    elif n_female > n_male:
        assert w.weight_male > w.weight_female


def test_holdout_split_stratified_counts():
    labels = np.array([1] * 70 + [0] * 30)
    plan = make_holdout_split(labels, 0.2, seed=5)
    train, test = plan.holdout_indices()
    assert test.size == 20 and train.size == 80
    assert labels[test].sum() == 14  # 0.2 * 70 males
    assert (labels[test] == 0).sum() == 6
    assert np.array_equal(np.sort(np.concatenate([train, test])), np.arange(100))


def test_holdout_determinism_and_validation():
    labels = np.array([1] * 10 + [0] * 10)
    a = make_holdout_split(labels, 0.3, seed=9)
    b = make_holdout_split(labels, 0.3, seed=9)
    assert np.array_equal(a.assignments, b.assignments)
    c = make_holdout_split(labels, 0.3, seed=10)
    assert not np.array_equal(a.assignments, c.assignments)
    with pytest.raises(ValueError):
        make_holdout_split(labels, 1.5, seed=0)


def test_stratified_kfold_ml1m_shape():
    labels = np.array([1] * 4331 + [0] * 1709)
    plan = make_stratified_kfold(labels, 10, seed=0)
    for fold in range(10):
        _, test = plan.fold_indices(fold)
        assert test.size == 604
        assert labels[test].sum() in (433, 434)
        assert (labels[test] == 0).sum() in (170, 171)
    # every row in exactly one test fold
    counts = np.bincount(plan.assignments, minlength=10)
    assert counts.sum() == 6040


def test_stratified_kfold_small_class_error():
    labels = np.array([1] * 10 + [0] * 2)
    with pytest.raises(ValueError, match="fewer members"):
        make_stratified_kfold(labels, 3, seed=0)


def test_dump_matrix_round_trip(tmp_path):
    fm = build_matrix(one_user_corpus(), default_model())
    dump_matrix(fm, tmp_path)
    with (tmp_path / "matrix.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    rebuilt = np.zeros((fm.n_rows, fm.n_cols))
    for r in rows:
        rebuilt[int(r["row"]), int(r["col"])] = float(r["value"])
    assert np.array_equal(rebuilt, fm.X.toarray())
    with (tmp_path / "labels.csv").open() as fh:
        labels = list(csv.DictReader(fh))
    assert [int(r["label"]) for r in labels] == fm.labels.tolist()


def test_build_normalized_features_unit_scaling(small_corpus):
    fm = build_normalized_features(small_corpus, default_model(), gs_scaling="unit")
    dense = fm.X.toarray()
    norms = np.linalg.norm(dense, axis=1)
    nz = norms > 0
    assert np.allclose(norms[nz], 1.0, atol=1e-9)
    # both blocks carry equal weight for users with ratings and degrees
    rating_norm = np.linalg.norm(dense[:, :-2], axis=1)
    degree_norm = np.linalg.norm(dense[:, -2:], axis=1)
    both = (rating_norm > 0) & (degree_norm > 0)
    assert both.any()
    assert np.allclose(rating_norm[both], degree_norm[both], atol=1e-9)


def test_build_normalized_features_raw_scaling(small_corpus):
    fm = build_normalized_features(small_corpus, default_model(), gs_scaling="raw")
    norms = np.linalg.norm(fm.X.toarray(), axis=1)
    assert np.allclose(norms[norms > 0], 1.0, atol=1e-9)
    with pytest.raises(ValueError, match="gs_scaling"):
        build_normalized_features(small_corpus, default_model(), gs_scaling="bogus")


def test_class_weights_validation():
    with pytest.raises(ValueError):
        ClassWeights(0.0, 1.0)
    w = ClassWeights(0.5, 2.0)
    per = w.per_sample(np.array([1, 0, 1]))
    assert per.tolist() == [0.5, 2.0, 0.5]


def test_full_matrix_shapes(ml1m_corpus):
    plain = build_matrix(ml1m_corpus, None)
    assert plain.X.shape == (6040, 3952)  # movie-id-indexed columns
    assert plain.X.nnz == 1_000_209
    assert plain.column_scheme == "id_range"
    augmented = build_matrix(ml1m_corpus, default_model())
    assert augmented.X.shape == (6040, 3954)


def test_make_split_dispatcher():
    from gsaudit.features import make_split

    labels = np.array([1] * 30 + [0] * 10)
    holdout = make_split(labels, "holdout", seed=2, test_fraction=0.25)
    assert holdout.kind == "holdout"
    assert holdout.holdout_indices()[1].size == 10
    kfold = make_split(labels, "stratified_kfold", seed=2, k=5)
    assert kfold.kind == "stratified_kfold"
    assert np.bincount(kfold.assignments, minlength=5).sum() == 40
    with pytest.raises(ValueError, match="split kind"):
        make_split(labels, "bootstrap", seed=2)
