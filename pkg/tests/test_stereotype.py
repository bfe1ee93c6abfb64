import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsaudit.corpus import (
    FEMALE,
    MALE,
    GenreVocabulary,
    UnknownIdError,
    MovieRecord,
    RatingCorpus,
    RatingTable,
    UserRecord,
)
from gsaudit.stereotype import (
    StereotypeModel,
    alignment_degrees,
    all_alignment_degrees,
    default_model,
    model_from_config,
    prevalence,
)


def make_corpus(users, movies, pairs):
    """users: [(id, gender)], movies: [(id, genres)], pairs: [(uid, mid)]."""
    return RatingCorpus(
        users=[UserRecord(u, g) for u, g in users],
        movies=[MovieRecord(m, f"T{m}", frozenset(gs)) for m, gs in movies],
        ratings=RatingTable([p[0] for p in pairs], [p[1] for p in pairs],
                            [3] * len(pairs), [0] * len(pairs)),
        vocabulary=GenreVocabulary(),
    )


def test_default_model_sets():
    model = default_model()
    assert model.male_genres == {"Action", "Adventure", "Comedy", "Crime", "Horror", "War"}
    assert model.female_genres == {"Animation", "Drama", "Family", "Romance"}
    assert len(model.male_genres) == 6 and len(model.female_genres) == 4
    assert not model.male_genres & model.female_genres
    assert "Documentary" not in model.male_genres | model.female_genres


def test_model_requires_disjoint_nonempty():
    with pytest.raises(ValueError, match="disjoint"):
        StereotypeModel(frozenset({"Action"}), frozenset({"Action", "Drama"}))
    with pytest.raises(ValueError, match="non-empty"):
        StereotypeModel(frozenset(), frozenset({"Drama"}))


def test_model_config_round_trip(tmp_path):
    path = tmp_path / "model.json"
    path.write_text('{"male_genres": ["Action", "War"], "female_genres": ["Drama"]}')
    model = model_from_config(path)
    assert model.male_genres == {"Action", "War"}
    assert model.female_genres == {"Drama"}


def test_degrees_hand_example():
    # one rated movie tagged {Action, War, Drama}: two male tags, one female
    corpus = make_corpus([(1, MALE)], [(7, {"Action", "War", "Drama"})], [(1, 7)])
    deg = alignment_degrees(corpus, default_model(), 1)
    assert (deg.d_male, deg.d_female) == (2, 1)


def test_degrees_zero_cases():
    corpus = make_corpus([(1, MALE), (2, FEMALE)], [(7, {"Documentary"})], [(2, 7)])
    assert alignment_degrees(corpus, default_model(), 1) == alignment_degrees(
        corpus, default_model(), 1)
    no_ratings = alignment_degrees(corpus, default_model(), 1)
    assert (no_ratings.d_male, no_ratings.d_female) == (0, 0)
    neutral_only = alignment_degrees(corpus, default_model(), 2)
    assert (neutral_only.d_male, neutral_only.d_female) == (0, 0)


def test_degrees_unknown_user():
    corpus = make_corpus([(1, MALE)], [(7, {"Drama"})], [(1, 7)])
    with pytest.raises(UnknownIdError, match="99"):
        alignment_degrees(corpus, default_model(), 99)


def test_item_count_mode_caps_per_item():
    corpus = make_corpus([(1, MALE)], [(7, {"Action", "War", "Drama"})], [(1, 7)])
    card = alignment_degrees(corpus, default_model(), 1, mode="cardinality")
    item = alignment_degrees(corpus, default_model(), 1, mode="item-count")
    assert (card.d_male, card.d_female) == (2, 1)
    assert (item.d_male, item.d_female) == (1, 1)


def test_mode_validation():
    corpus = make_corpus([(1, MALE)], [(7, {"Drama"})], [(1, 7)])
    with pytest.raises(ValueError, match="mode"):
        all_alignment_degrees(corpus, default_model(), mode="bogus")


def test_prevalence_two_user_hand_example():
    # Female with (d_m=3, d_f=1) misaligned; Male with (2, 0) aligned: K=1
    corpus = make_corpus(
        [(1, FEMALE), (2, MALE)],
        [(10, {"Action", "War", "Crime"}), (11, {"Drama"}), (12, {"Action", "Comedy"})],
        [(1, 10), (1, 11), (2, 12)],
    )
    deg = all_alignment_degrees(corpus, default_model())
    assert deg.tolist() == [[3, 1], [2, 0]]
    report = prevalence(corpus, default_model())
    assert report.misaligned_count == 1
    assert report.aligned_percent == 50.0
    assert report.female_misaligned == 1 and report.male_misaligned == 0


def test_prevalence_all_aligned():
    corpus = make_corpus(
        [(1, MALE), (2, FEMALE)],
        [(10, {"Action"}), (11, {"Romance"})],
        [(1, 10), (2, 11)],
    )
    report = prevalence(corpus, default_model())
    assert report.misaligned_count == 0
    assert report.aligned_percent == 100.0


def test_prevalence_ties_are_aligned():
    corpus = make_corpus(
        [(1, MALE), (2, FEMALE)],
        [(10, {"Action", "Drama"})],
        [(1, 10), (2, 10)],
    )
    report = prevalence(corpus, default_model())
    assert report.tie_count == 2
    assert report.misaligned_count == 0
    assert report.aligned_percent == 100.0


def test_prevalence_empty_corpus_rejected():
    corpus = RatingCorpus([], [], RatingTable([], [], [], []), GenreVocabulary())
    with pytest.raises(ValueError, match="empty"):
        prevalence(corpus, default_model())


def test_monotonicity_adding_male_genre_rating():
    movies = [(10, {"Action", "War"}), (11, {"Drama"})]
    before = make_corpus([(1, MALE)], movies, [(1, 11)])
    after = make_corpus([(1, MALE)], movies, [(1, 11), (1, 10)])
    d0 = alignment_degrees(before, default_model(), 1)
    d1 = alignment_degrees(after, default_model(), 1)
    assert d1.d_male >= d0.d_male
    assert d1.d_female == d0.d_female


@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_bound_swap_and_determinism_properties(data):
    genre_pool = sorted(default_model().male_genres | default_model().female_genres
                        | {"Documentary", "Western"})
    n_users = data.draw(st.integers(2, 8))
    n_movies = data.draw(st.integers(1, 6))
    users = [(i + 1, data.draw(st.sampled_from([MALE, FEMALE]))) for i in range(n_users)]
    movies = []
    for j in range(n_movies):
        genres = data.draw(st.sets(st.sampled_from(genre_pool), min_size=1, max_size=3))
        movies.append((j + 1, genres))
    pairs = sorted(data.draw(st.sets(
        st.tuples(st.integers(1, n_users), st.integers(1, n_movies)),
        min_size=1, max_size=24)))
    corpus = make_corpus(users, movies, pairs)
    model = default_model()

    degrees = all_alignment_degrees(corpus, model)
    # bound: d_m + d_f never exceeds the total genre tags over rated items
    for pos, (u, _) in enumerate(users):
        total_tags = sum(len(corpus.movies[corpus.movie_position(m)].genres)
                         for uu, m in pairs if uu == u)
        assert degrees[pos].sum() <= total_tags

    # swapping the model swaps the degree columns
    swapped = all_alignment_degrees(corpus, model.swapped())
    assert np.array_equal(swapped, degrees[:, ::-1])

    # complement identity: misaligned(swapped) == U - misaligned - ties, so
    # u(swapped) == 100 - u + 100 * ties / U
    rep = prevalence(corpus, model)
    rep_swapped = prevalence(corpus, model.swapped())
    assert rep_swapped.misaligned_count == rep.total_users - rep.misaligned_count - rep.tie_count
    expected_aligned = 100.0 - rep.aligned_percent + 100.0 * rep.tie_count / rep.total_users
    assert rep_swapped.aligned_percent == pytest.approx(expected_aligned, abs=1e-9)

    # determinism
    again = prevalence(corpus, model)
    assert again == rep


def test_prevalence_report_json_fields(small_corpus):
    report = prevalence(small_corpus, default_model())
    doc = report.to_dict()
    assert doc["total_users"] == small_corpus.n_users
    assert doc["per_gender"]["male"]["total"] + doc["per_gender"]["female"]["total"] \
        == small_corpus.n_users
    assert 0.0 <= doc["aligned_percent"] <= 100.0
    assert doc["misaligned_count"] == report.misaligned_count
