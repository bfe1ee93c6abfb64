"""Synthetic rating-corpus generators.

The two public movie-rating datasets this toolkit audits are
license-restricted and cannot ship with the code, so these generators write
format-identical substitutes to disk: a MovieLens-1M style ``.dat`` root
with the same headline statistics (user/gender/movie/rating counts) and a
small Yahoo-style interchange fixture carrying that catalog's raw genre
vocabulary quirks.

The ML1M-style generator plants two gender signals:

* a per-user genre tilt (gender-shifted mean) that drives the stereotype
  alignment degrees and prevalence, and
* per-movie idiosyncratic gender propensities, orthogonal to genre, which
  give classifiers signal beyond the stereotype aggregate.

Default tilt/propensity scales are calibrated so prevalence and attack
strength land near the values observed on the real corpus.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

#: Raw ML1M genre vocabulary (pre-aliasing) with approximate catalog shares.
RAW_ML1M_GENRES: tuple[tuple[str, float], ...] = (
    ("Drama", 0.36),
    ("Comedy", 0.27),
    ("Action", 0.11),
    ("Thriller", 0.11),
    ("Romance", 0.105),
    ("Horror", 0.078),
    ("Adventure", 0.065),
    ("Sci-Fi", 0.062),
    ("Children's", 0.057),
    ("Crime", 0.048),
    ("War", 0.032),
    ("Documentary", 0.029),
    ("Musical", 0.026),
    ("Mystery", 0.024),
    ("Animation", 0.024),
    ("Fantasy", 0.015),
    ("Western", 0.015),
    ("Film-Noir", 0.010),
)

_MALE_TAGS = {"Action", "Adventure", "Comedy", "Crime", "Horror", "War"}
_FEMALE_TAGS = {"Animation", "Drama", "Children's", "Romance"}  # Children's == Family

_ACCENTED_WORDS = ("Café", "Niño", "Château", "Señorita", "Göteborg", "Fiancée")


@dataclass(frozen=True)
class SynthConfig:
    """Knobs of the ML1M-style generator; defaults are calibrated."""

    n_users: int = 6040
    n_males: int = 4331
    n_movie_records: int = 3883
    max_movie_id: int = 3952
    n_ratings: int = 1_000_209
    min_user_ratings: int = 20
    max_user_ratings: int = 2000
    seed: int = 20240501

    male_tilt_mean: float = -0.04
    female_tilt_mean: float = -0.45
    tilt_sd: float = 0.20
    idiosyncrasy_sd: float = 0.02
    popularity_log_sd: float = 1.3
    activity_log_mean: float = 4.56
    activity_log_sd: float = 0.95


def _movie_genres(rng: np.random.Generator, n_movies: int) -> list[list[str]]:
    names = [g for g, _ in RAW_ML1M_GENRES]
    weights = np.array([w for _, w in RAW_ML1M_GENRES])
    weights = weights / weights.sum()
    # guarantee every raw genre occurs at least once
    out: list[list[str]] = [[name] for name in names]
    n_tags = rng.choice([1, 2, 3, 4], size=n_movies - len(names), p=[0.55, 0.30, 0.13, 0.02])
    for k in n_tags:
        picks = rng.choice(len(names), size=int(k), replace=False, p=weights)
        out.append([names[i] for i in sorted(picks)])
    rng.shuffle(out)
    return out


def _user_activity(rng: np.random.Generator, config: SynthConfig) -> np.ndarray:
    raw = rng.lognormal(config.activity_log_mean, config.activity_log_sd, config.n_users)
    counts = np.clip(np.round(raw), config.min_user_ratings, config.max_user_ratings)
    counts = counts.astype(np.int64)
    # nudge to the exact rating total while respecting the per-user bounds
    diff = config.n_ratings - int(counts.sum())
    step = 1 if diff > 0 else -1
    while diff != 0:
        idx = rng.integers(0, config.n_users, size=abs(diff))
        for i in idx:
            lo, hi = config.min_user_ratings, min(config.max_user_ratings, config.n_movie_records)
            if lo <= counts[i] + step <= hi:
                counts[i] += step
                diff -= step
                if diff == 0:
                    break
    return counts


def generate_ml1m_tables(
    config: SynthConfig = SynthConfig(),
) -> tuple[list[tuple[int, str]], list[tuple[int, str, str]], np.ndarray]:
    """Build the synthetic tables in memory.

    Returns (users, movies, ratings): users as (id, gender token), movies as
    (id, title, raw pipe-joined genres), ratings as an (n, 4) int array of
    (user_id, movie_id, rating, timestamp) grouped by user.
    """
    rng = np.random.default_rng(config.seed)

    genders = np.array(["M"] * config.n_males + ["F"] * (config.n_users - config.n_males))
    rng.shuffle(genders)
    users = [(uid, str(genders[uid - 1])) for uid in range(1, config.n_users + 1)]

    # movie ids 1..max with a few gaps, so max id exceeds the record count
    all_ids = np.arange(2, config.max_movie_id, dtype=np.int64)
    drop = rng.choice(all_ids, size=config.max_movie_id - config.n_movie_records, replace=False)
    movie_ids = np.setdiff1d(np.arange(1, config.max_movie_id + 1, dtype=np.int64), drop)
    genre_lists = _movie_genres(rng, config.n_movie_records)

    movies = []
    for mid, genres in zip(movie_ids, genre_lists):
        year = int(rng.integers(1919, 2001))
        if rng.random() < 0.03:
            word = _ACCENTED_WORDS[int(rng.integers(0, len(_ACCENTED_WORDS)))]
            title = f"{word} Story {mid} ({year})"
        else:
            title = f"Feature {mid} ({year})"
        movies.append((int(mid), title, "|".join(genres)))

    # movie-side factors for the selection model
    tilt = np.array(
        [sum(g in _MALE_TAGS for g in gl) - sum(g in _FEMALE_TAGS for g in gl)
         for gl in genre_lists],
        dtype=np.float64,
    )
    log_pop = rng.normal(0.0, config.popularity_log_sd, config.n_movie_records)
    idio = rng.normal(0.0, config.idiosyncrasy_sd, config.n_movie_records)

    counts = _user_activity(rng, config)
    is_male = genders == "M"
    beta = np.where(
        is_male,
        rng.normal(config.male_tilt_mean, config.tilt_sd, config.n_users),
        rng.normal(config.female_tilt_mean, config.tilt_sd, config.n_users),
    )
    sign = np.where(is_male, 1.0, -1.0)

    rating_probs = np.array([0.05, 0.10, 0.26, 0.35, 0.24])
    rows = np.empty((config.n_ratings, 4), dtype=np.int64)
    pos = 0
    for u in range(config.n_users):
        n_u = int(counts[u])
        keys = log_pop + beta[u] * tilt + sign[u] * idio
        keys = keys + rng.gumbel(size=config.n_movie_records)  # weighted sample w/o replacement
        picked = np.argpartition(-keys, n_u - 1)[:n_u]
        values = rng.choice(5, size=n_u, p=rating_probs) + 1
        stamps = rng.integers(956_700_000, 1_046_000_000, size=n_u)
        rows[pos : pos + n_u, 0] = u + 1
        rows[pos : pos + n_u, 1] = movie_ids[np.sort(picked)]
        rows[pos : pos + n_u, 2] = values
        rows[pos : pos + n_u, 3] = stamps
        pos += n_u
    assert pos == config.n_ratings
    return users, movies, rows


def write_ml1m_root(root: Path | str, config: SynthConfig = SynthConfig()) -> Path:
    """Write users.dat / movies.dat / ratings.dat in the MovieLens-1M layout."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    users, movies, ratings = generate_ml1m_tables(config)
    rng = np.random.default_rng(config.seed + 1)

    ages = (1, 18, 25, 35, 45, 50, 56)
    with (root / "users.dat").open("w", encoding="ascii") as fh:
        for uid, gender in users:
            age = ages[int(rng.integers(0, len(ages)))]
            occ = int(rng.integers(0, 21))
            zipc = f"{int(rng.integers(0, 100000)):05d}"
            fh.write(f"{uid}::{gender}::{age}::{occ}::{zipc}\n")

    with (root / "movies.dat").open("w", encoding="latin-1") as fh:
        for mid, title, genres in movies:
            fh.write(f"{mid}::{title}::{genres}\n")

    with (root / "ratings.dat").open("w", encoding="ascii") as fh:
        for uid, mid, value, stamp in ratings:
            fh.write(f"{uid}::{mid}::{value}::{stamp}\n")
    return root


# ---------------------------------------------------------------------------
# Yahoo-style interchange fixture


#: Raw Yahoo-style tokens and the share of fixture movies carrying each.
_YAHOO_RAW_GENRES: tuple[tuple[str, float], ...] = (
    ("Drama", 0.22),
    ("Comedy", 0.18),
    ("Action", 0.10),
    ("Thriller", 0.07),
    ("Suspense", 0.07),
    ("Romance", 0.08),
    ("Horror", 0.05),
    ("Adventure", 0.05),
    ("Kids", 0.04),
    ("Music", 0.03),
    ("Musical", 0.02),
    ("Performing Art", 0.02),
    ("Gangster", 0.03),
    ("Crime", 0.03),
    ("Animation", 0.03),
    ("Sci-Fi", 0.03),
    ("Western", 0.02),
    ("Documentary", 0.02),
    ("Mystery", 0.01),
)


def write_yahoo_style_root(
    root: Path | str,
    seed: int = 7,
    n_users: int = 240,
    n_movies: int = 180,
    male_share: float = 0.71,
) -> Path:
    """Write a small interchange-format fixture with raw Yahoo-style tokens.

    Includes the conversion-table cases: aliased genre pairs, removed
    "Adult Audience" items, unresolved "Miscellaneous"/"Features"
    placeholders, and movies with no genre information at all.  Movie ids
    are catalog-scale (nine digits, sparse), not compact.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    names = [g for g, _ in _YAHOO_RAW_GENRES]
    weights = np.array([w for _, w in _YAHOO_RAW_GENRES])
    weights = weights / weights.sum()

    movie_ids = 1_800_000_000 + np.sort(rng.choice(99_999_999, size=n_movies, replace=False))
    movies = []
    for i, mid in enumerate(movie_ids):
        if i % 29 == 7:
            genres = "Adult Audience"  # removed together with its ratings
        elif i % 29 == 14:
            genres = "Miscellaneous" if i % 2 else "Features"  # needs an override
        elif i % 29 == 21:
            genres = ""  # no genre information in the source
        else:
            k = int(rng.integers(1, 4))
            picks = rng.choice(len(names), size=k, replace=False, p=weights)
            genres = "|".join(names[j] for j in sorted(picks))
        movies.append((int(mid), f"Yahoo Feature {i} (199{i % 10})", genres))

    n_males = int(round(male_share * n_users))
    genders = ["Male"] * n_males + ["Female"] * (n_users - n_males)
    rng.shuffle(genders)

    with (root / "users.csv").open("w", encoding="utf-8", newline="") as fh:
        fh.write("user_id,gender\n")
        for uid in range(1, n_users + 1):
            fh.write(f"{uid},{genders[uid - 1]}\n")
    with (root / "movies.csv").open("w", encoding="utf-8", newline="") as fh:
        fh.write("movie_id,title,genres\n")
        for mid, title, genres in movies:
            fh.write(f"{mid},{title},{genres}\n")
    with (root / "ratings.csv").open("w", encoding="utf-8", newline="") as fh:
        fh.write("user_id,movie_id,rating,timestamp\n")
        for uid in range(1, n_users + 1):
            n_r = int(rng.integers(5, 40))
            picks = rng.choice(n_movies, size=min(n_r, n_movies), replace=False)
            for j in sorted(picks):
                value = int(rng.integers(1, 6))
                stamp = int(rng.integers(1_000_000_000, 1_100_000_000))
                fh.write(f"{uid},{int(movie_ids[j])},{value},{stamp}\n")
    return root
