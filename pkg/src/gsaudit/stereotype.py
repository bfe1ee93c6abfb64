"""Stereotype genre model, per-user alignment degrees, and corpus prevalence.

A :class:`StereotypeModel` names two disjoint genre sets presumed preferred
by men and by women.  For each user we count how much of their rated-movie
genre mass falls in each set (``d_male`` / ``d_female``), then aggregate a
corpus-level prevalence figure: the share of users whose dominant degree
matches their recorded gender.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import RatingCorpus

#: Degree aggregation modes.  "cardinality" sums intersection sizes over
#: rated items (a movie tagged with two male-set genres contributes 2);
#: "item-count" counts rated items with any intersection (it contributes 1).
MODES = ("cardinality", "item-count")


@dataclass(frozen=True)
class StereotypeModel:
    male_genres: frozenset[str]
    female_genres: frozenset[str]

    def __post_init__(self):
        if not self.male_genres or not self.female_genres:
            raise ValueError("both genre sets must be non-empty")
        overlap = self.male_genres & self.female_genres
        if overlap:
            raise ValueError(f"genre sets must be disjoint; overlap: {sorted(overlap)}")

    def swapped(self) -> "StereotypeModel":
        return StereotypeModel(self.female_genres, self.male_genres)

    def to_dict(self) -> dict:
        return {
            "male_genres": sorted(self.male_genres),
            "female_genres": sorted(self.female_genres),
        }


def default_model() -> StereotypeModel:
    """Survey-backed default: genres with a significant gender skew."""
    return StereotypeModel(
        male_genres=frozenset({"Action", "Adventure", "Comedy", "Crime", "Horror", "War"}),
        female_genres=frozenset({"Animation", "Drama", "Family", "Romance"}),
    )


def model_from_config(path: Path | str) -> StereotypeModel:
    """Load a model from a JSON config with male_genres / female_genres lists."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return StereotypeModel(
        male_genres=frozenset(data["male_genres"]),
        female_genres=frozenset(data["female_genres"]),
    )


@dataclass(frozen=True)
class AlignmentDegrees:
    user_id: int
    d_male: int
    d_female: int


@dataclass(frozen=True)
class PrevalenceReport:
    total_users: int
    misaligned_count: int
    aligned_percent: float
    tie_count: int
    mode: str
    male_total: int
    female_total: int
    male_misaligned: int
    female_misaligned: int
    male_ties: int
    female_ties: int

    def to_dict(self) -> dict:
        return {
            "total_users": self.total_users,
            "misaligned_count": self.misaligned_count,
            "aligned_percent": self.aligned_percent,
            "tie_count": self.tie_count,
            "mode": self.mode,
            "per_gender": {
                "male": {
                    "total": self.male_total,
                    "misaligned": self.male_misaligned,
                    "ties": self.male_ties,
                },
                "female": {
                    "total": self.female_total,
                    "misaligned": self.female_misaligned,
                    "ties": self.female_ties,
                },
            },
        }


def _per_movie_set_counts(
    corpus: RatingCorpus, model: StereotypeModel, mode: str
) -> tuple[np.ndarray, np.ndarray]:
    """Per movie-position contribution to (d_male, d_female) for one rating."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    m = np.zeros(corpus.n_movies, dtype=np.float64)
    f = np.zeros(corpus.n_movies, dtype=np.float64)
    for pos, movie in enumerate(corpus.movies):
        cm = len(movie.genres & model.male_genres)
        cf = len(movie.genres & model.female_genres)
        if mode == "item-count":
            cm = 1 if cm else 0
            cf = 1 if cf else 0
        m[pos] = cm
        f[pos] = cf
    return m, f


def all_alignment_degrees(
    corpus: RatingCorpus, model: StereotypeModel, mode: str = "cardinality"
) -> np.ndarray:
    """(n_users, 2) integer array of (d_male, d_female), aligned to user order.

    Every rated item counts, regardless of its rating value.
    """
    per_m, per_f = _per_movie_set_counts(corpus, model, mode)
    out = np.zeros((corpus.n_users, 2), dtype=np.int64)
    if len(corpus.ratings) == 0:
        return out
    upos = corpus.user_positions(corpus.ratings.user_ids)
    mpos = corpus.movie_positions(corpus.ratings.movie_ids)
    out[:, 0] = np.bincount(upos, weights=per_m[mpos], minlength=corpus.n_users).astype(np.int64)
    out[:, 1] = np.bincount(upos, weights=per_f[mpos], minlength=corpus.n_users).astype(np.int64)
    return out


def alignment_degrees(
    corpus: RatingCorpus,
    model: StereotypeModel,
    user_id: int,
    mode: str = "cardinality",
) -> AlignmentDegrees:
    """Degrees for a single user; raises for unknown user ids."""
    corpus.user_position(user_id)  # raises UnknownIdError if missing
    per_m, per_f = _per_movie_set_counts(corpus, model, mode)
    mask = corpus.ratings.user_ids == user_id
    if not mask.any():
        return AlignmentDegrees(user_id, 0, 0)
    mpos = corpus.movie_positions(corpus.ratings.movie_ids[mask])
    return AlignmentDegrees(user_id, int(per_m[mpos].sum()), int(per_f[mpos].sum()))


def prevalence(
    corpus: RatingCorpus, model: StereotypeModel, mode: str = "cardinality"
) -> PrevalenceReport:
    """Share of users whose dominant degree matches their gender.

    Misaligned = female with d_male > d_female, or male with d_male < d_female.
    Ties (d_male == d_female) fail both strict inequalities and therefore
    count as aligned; the tie count is reported so their effect is auditable.
    """
    if corpus.n_users == 0:
        raise ValueError("prevalence undefined for an empty corpus")
    degrees = all_alignment_degrees(corpus, model, mode)
    is_male = corpus.gender_labels().astype(bool)
    d_m, d_f = degrees[:, 0], degrees[:, 1]

    ties = d_m == d_f
    mis = (~is_male & (d_m > d_f)) | (is_male & (d_m < d_f))
    k = int(mis.sum())
    u = corpus.n_users
    return PrevalenceReport(
        total_users=u,
        misaligned_count=k,
        aligned_percent=(1.0 - k / u) * 100.0,
        tie_count=int(ties.sum()),
        mode=mode,
        male_total=int(is_male.sum()),
        female_total=int((~is_male).sum()),
        male_misaligned=int((mis & is_male).sum()),
        female_misaligned=int((mis & ~is_male).sum()),
        male_ties=int((ties & is_male).sum()),
        female_ties=int((ties & ~is_male).sum()),
    )
