"""Rating-corpus ingestion and genre normalization.

Parses MovieLens-1M style ``.dat`` roots and the neutral interchange CSV
format into a validated, immutable :class:`RatingCorpus`.  Genre tokens are
passed through an alias map on ingest so differently-spelled source
vocabularies (e.g. "Children's", "Gangster", "Suspense") collapse onto one
canonical genre list.
"""

from __future__ import annotations

import csv
import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

logger = logging.getLogger(__name__)

MALE = "M"
FEMALE = "F"

#: Alias target meaning "drop this genre tag" (and any movie left tagless).
REMOVE = "__REMOVE__"
#: Alias target meaning "cannot be resolved mechanically; needs a per-movie
#: override" (the source data carries placeholder tags, not real genres).
UNRESOLVED = "__UNRESOLVED__"

#: Canonical genre universe: the normalized vocabulary every corpus maps into.
CANONICAL_GENRES: tuple[str, ...] = (
    "Action",
    "Adventure",
    "Animation",
    "Biography",
    "Comedy",
    "Crime",
    "Documentary",
    "Drama",
    "Family",
    "Fantasy",
    "Film-Noir",
    "History",
    "Horror",
    "Musical",
    "Mystery",
    "Romance",
    "Sci-Fi",
    "Sports",
    "Thriller",
    "War",
    "Western",
)


class IngestError(ValueError):
    """Fatal problem in raw input data (missing file, malformed line, ...)."""


class UnknownGenreError(IngestError):
    """A raw genre token has no canonical target in the vocabulary."""


class UnknownIdError(KeyError):
    """Unknown user or movie id."""


@dataclass(frozen=True)
class GenreVocabulary:
    """Canonical genre list plus a raw-token alias map.

    ``aliases`` keys are lower-cased raw tokens; targets are canonical genre
    names or the :data:`REMOVE` / :data:`UNRESOLVED` sentinels.  Tokens that
    match a canonical genre case-insensitively resolve to themselves, so the
    alias map only needs the non-identity conversions.
    """

    genres: tuple[str, ...] = CANONICAL_GENRES
    aliases: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        seen = {g.lower() for g in self.genres}
        if len(seen) != len(self.genres):
            raise ValueError("canonical genre names must be case-insensitively unique")
        for raw, target in self.aliases.items():
            if target not in (REMOVE, UNRESOLVED) and target not in self.genres:
                raise ValueError(f"alias target {target!r} (for {raw!r}) is not canonical")

    def resolve(self, token: str) -> str:
        """Map a raw genre token to its canonical genre or a sentinel.

        Raises :class:`UnknownGenreError` for tokens outside the vocabulary.
        """
        key = token.strip().lower()
        if key in self.aliases:
            return self.aliases[key]
        for g in self.genres:
            if g.lower() == key:
                return g
        raise UnknownGenreError(f"unknown genre token {token!r}")

    def with_aliases(self, extra: Mapping[str, str]) -> "GenreVocabulary":
        merged = dict(self.aliases)
        merged.update({k.strip().lower(): v for k, v in extra.items()})
        return GenreVocabulary(self.genres, merged)


def ml1m_vocabulary() -> GenreVocabulary:
    """Default vocabulary for MovieLens-1M roots: Children's folds into Family."""
    return GenreVocabulary(aliases={"children's": "Family"})


def yahoo_alias_map() -> GenreVocabulary:
    """Conversion table for raw Yahoo!Movie genre tokens.

    "Miscellaneous" and "Features" are placeholder tags, not genres; they
    resolve to :data:`UNRESOLVED` and require a per-movie override file
    (lookups against an external catalog).  "Adult Audience" marks non-movie
    video items and is removed together with any item it leaves tagless.
    """
    return GenreVocabulary(
        aliases={
            "music": "Musical",
            "musical": "Musical",
            "performing art": "Musical",
            "suspense": "Thriller",
            "kids": "Family",
            "gangster": "Crime",
            "adult audience": REMOVE,
            "miscellaneous": UNRESOLVED,
            "features": UNRESOLVED,
        }
    )


def load_genre_map(path: Path | str) -> dict[str, str]:
    """Parse a ``raw,canonical`` per-line alias file (canonical may be __REMOVE__)."""
    out: dict[str, str] = {}
    path = Path(path)
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise IngestError(f"{path.name}:{lineno}: expected 'raw,canonical'")
        out[parts[0].strip().lower()] = parts[1].strip()
    return out


def load_override_map(path: Path | str) -> dict[int, list[str]]:
    """Parse a per-movie genre override CSV: ``movie_id,Genre1|Genre2``."""
    out: dict[int, list[str]] = {}
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].strip().startswith("#"):
                continue
            if len(row) != 2:
                raise IngestError(f"{path.name}:{lineno}: expected 'movie_id,genres'")
            try:
                mid = int(row[0])
            except ValueError as exc:
                raise IngestError(f"{path.name}:{lineno}: bad movie id {row[0]!r}") from exc
            out[mid] = [g for g in row[1].split("|") if g.strip()]
    return out


@dataclass(frozen=True)
class UserRecord:
    user_id: int
    gender: str  # MALE or FEMALE


@dataclass(frozen=True)
class MovieRecord:
    movie_id: int
    title: str
    genres: frozenset[str]


@dataclass(frozen=True)
class RatingTriple:
    user_id: int
    movie_id: int
    rating: int
    timestamp: int


class RatingTable:
    """Columnar store for rating triples (cheap at a million rows)."""

    __slots__ = ("user_ids", "movie_ids", "values", "timestamps")

    def __init__(self, user_ids, movie_ids, values, timestamps):
        self.user_ids = np.asarray(user_ids, dtype=np.int64)
        self.movie_ids = np.asarray(movie_ids, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.int64)
        self.timestamps = np.asarray(timestamps, dtype=np.int64)
        n = len(self.user_ids)
        if not (len(self.movie_ids) == len(self.values) == len(self.timestamps) == n):
            raise ValueError("rating columns must have equal length")

    def __len__(self) -> int:
        return len(self.user_ids)

    def __getitem__(self, i: int) -> RatingTriple:
        return RatingTriple(
            int(self.user_ids[i]),
            int(self.movie_ids[i]),
            int(self.values[i]),
            int(self.timestamps[i]),
        )

    def __iter__(self) -> Iterator[RatingTriple]:
        for i in range(len(self)):
            yield self[i]


@dataclass
class IngestReport:
    """What the loader changed or dropped while normalizing."""

    alias_applications: dict[str, int] = field(default_factory=dict)
    removed_genre_tags: int = 0
    dropped_movies: list[int] = field(default_factory=list)
    dropped_ratings: int = 0
    duplicate_ratings: int = 0
    overrides_applied: int = 0

    def to_dict(self) -> dict:
        return {
            "alias_applications": dict(self.alias_applications),
            "removed_genre_tags": self.removed_genre_tags,
            "dropped_movies": list(self.dropped_movies),
            "dropped_ratings": self.dropped_ratings,
            "duplicate_ratings": self.duplicate_ratings,
            "overrides_applied": self.overrides_applied,
        }


class RatingCorpus:
    """Validated, immutable view of one rating dataset.

    Construction checks referential integrity (every rating resolves to a
    known user and movie), rating range, id uniqueness, and that every user
    carries a binary gender label.
    """

    def __init__(
        self,
        users: list[UserRecord],
        movies: list[MovieRecord],
        ratings: RatingTable,
        vocabulary: GenreVocabulary,
        provenance: dict | None = None,
        ingest_report: IngestReport | None = None,
    ):
        self.users = list(users)
        self.movies = list(movies)
        self.ratings = ratings
        self.vocabulary = vocabulary
        self.provenance = dict(provenance or {})
        self.ingest_report = ingest_report or IngestReport()

        self._user_pos = {u.user_id: i for i, u in enumerate(self.users)}
        self._movie_pos = {m.movie_id: i for i, m in enumerate(self.movies)}
        self._validate()

    def _validate(self) -> None:
        if len(self._user_pos) != len(self.users):
            raise IngestError("duplicate user ids")
        if len(self._movie_pos) != len(self.movies):
            raise IngestError("duplicate movie ids")
        for u in self.users:
            if u.gender not in (MALE, FEMALE):
                raise IngestError(f"user {u.user_id}: gender must be binary M/F")
        vocab_set = set(self.vocabulary.genres)
        for m in self.movies:
            if not m.genres <= vocab_set:
                raise IngestError(f"movie {m.movie_id}: genres outside vocabulary")
        if len(self.ratings) > 0:
            vals = self.ratings.values
            if vals.min() < 1 or vals.max() > 5:
                bad = int(np.argmax((vals < 1) | (vals > 5)))
                raise IngestError(f"rating out of range 1..5 at triple {bad}")
            for uid in np.unique(self.ratings.user_ids):
                if int(uid) not in self._user_pos:
                    raise IngestError(f"rating references unknown user id {int(uid)}")
            for mid in np.unique(self.ratings.movie_ids):
                if int(mid) not in self._movie_pos:
                    raise IngestError(f"rating references unknown movie id {int(mid)}")
            pairs = self.ratings.user_ids * (self.ratings.movie_ids.max() + 1) + self.ratings.movie_ids
            if len(np.unique(pairs)) != len(pairs):
                raise IngestError("duplicate (user, movie) rating pairs")

    # -- id lookups -------------------------------------------------------

    def user_position(self, user_id: int) -> int:
        try:
            return self._user_pos[user_id]
        except KeyError:
            raise UnknownIdError(f"unknown user id {user_id}") from None

    def movie_position(self, movie_id: int) -> int:
        try:
            return self._movie_pos[movie_id]
        except KeyError:
            raise UnknownIdError(f"unknown movie id {movie_id}") from None

    def user_positions(self, user_ids: np.ndarray) -> np.ndarray:
        """Vectorized user_id -> row-position mapping (ids must all resolve)."""
        ids = np.array([u.user_id for u in self.users], dtype=np.int64)
        order = np.argsort(ids)
        idx = np.searchsorted(ids[order], user_ids)
        return order[idx]

    def movie_positions(self, movie_ids: np.ndarray) -> np.ndarray:
        ids = np.array([m.movie_id for m in self.movies], dtype=np.int64)
        order = np.argsort(ids)
        idx = np.searchsorted(ids[order], movie_ids)
        return order[idx]

    # -- summary properties -----------------------------------------------

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_movies(self) -> int:
        return len(self.movies)

    @property
    def max_movie_id(self) -> int:
        return max(m.movie_id for m in self.movies) if self.movies else 0

    def gender_counts(self) -> tuple[int, int]:
        males = sum(1 for u in self.users if u.gender == MALE)
        return males, len(self.users) - males

    def gender_labels(self) -> np.ndarray:
        """Per-user labels aligned to ``users`` order: 1 = male, 0 = female."""
        return np.array([1 if u.gender == MALE else 0 for u in self.users], dtype=np.uint8)

    def genres_present(self) -> frozenset[str]:
        out: set[str] = set()
        for m in self.movies:
            out |= m.genres
        return frozenset(out)


@dataclass(frozen=True)
class CorpusStats:
    """Headline dataset numbers.

    ``density_percent`` is computed against the movie-id range
    (``max_movie_id``), which is the convention used when quoting matrix
    density for id-indexed rating matrices; ``density_percent_distinct``
    uses the distinct movie-record count instead.  Both are 2-decimal
    percentages.
    """

    users: int
    male: int
    female: int
    movies: int
    max_movie_id: int
    ratings: int
    genres: int
    density_percent: float
    density_percent_distinct: float
    male_percent: float
    female_percent: float

    def to_dict(self) -> dict:
        return {
            "users": self.users,
            "male": self.male,
            "female": self.female,
            "movies": self.movies,
            "max_movie_id": self.max_movie_id,
            "ratings": self.ratings,
            "genres": self.genres,
            "density_percent": self.density_percent,
            "density_percent_distinct": self.density_percent_distinct,
            "male_percent": self.male_percent,
            "female_percent": self.female_percent,
        }


def corpus_stats(corpus: RatingCorpus) -> CorpusStats:
    males, females = corpus.gender_counts()
    n_r = len(corpus.ratings)
    n_u = corpus.n_users
    by_max = 100.0 * n_r / (n_u * corpus.max_movie_id) if n_u and corpus.max_movie_id else 0.0
    by_distinct = 100.0 * n_r / (n_u * corpus.n_movies) if n_u and corpus.n_movies else 0.0
    return CorpusStats(
        users=n_u,
        male=males,
        female=females,
        movies=corpus.n_movies,
        max_movie_id=corpus.max_movie_id,
        ratings=n_r,
        genres=len(corpus.genres_present()),
        density_percent=round(by_max, 2),
        density_percent_distinct=round(by_distinct, 2),
        male_percent=round(100.0 * males / n_u, 1) if n_u else 0.0,
        female_percent=round(100.0 * females / n_u, 1) if n_u else 0.0,
    )


# ---------------------------------------------------------------------------
# shared normalization helpers


def _normalize_gender(token: str, where: str) -> str:
    t = token.strip().lower()
    if t in ("m", "male"):
        return MALE
    if t in ("f", "female"):
        return FEMALE
    raise IngestError(f"{where}: gender token {token!r} not in {{M, F, Male, Female}}")


def _resolve_genres(
    raw_tokens: list[str],
    vocabulary: GenreVocabulary,
    report: IngestReport,
    where: str,
) -> tuple[frozenset[str], bool]:
    """Apply the alias map to one movie's raw tokens.

    Returns (canonical genre set, has_unresolved).  Unknown tokens raise.
    """
    out: set[str] = set()
    unresolved = False
    for tok in raw_tokens:
        tok = tok.strip()
        if not tok:
            continue
        try:
            target = vocabulary.resolve(tok)
        except UnknownGenreError as exc:
            raise UnknownGenreError(f"{where}: {exc}") from None
        if target == REMOVE:
            report.removed_genre_tags += 1
            continue
        if target == UNRESOLVED:
            unresolved = True
            continue
        if target != tok:
            report.alias_applications[tok] = report.alias_applications.get(tok, 0) + 1
        out.add(target)
    return frozenset(out), unresolved


def _dedupe_last_wins(
    user_ids: list[int], movie_ids: list[int], values: list[int], timestamps: list[int],
    report: IngestReport,
) -> RatingTable:
    """Collapse duplicate (user, movie) pairs, keeping the last occurrence."""
    seen: dict[tuple[int, int], int] = {}
    dups = 0
    for i, key in enumerate(zip(user_ids, movie_ids)):
        if key in seen:
            dups += 1
        seen[key] = i
    if dups:
        logger.warning("dropping %d duplicate (user, movie) ratings (keeping last)", dups)
        report.duplicate_ratings = dups
        keep = sorted(seen.values())
        user_ids = [user_ids[i] for i in keep]
        movie_ids = [movie_ids[i] for i in keep]
        values = [values[i] for i in keep]
        timestamps = [timestamps[i] for i in keep]
    return RatingTable(user_ids, movie_ids, values, timestamps)


def _drop_tagless_movies(
    movies: list[MovieRecord],
    flagged: set[int],
    ratings: RatingTable,
    report: IngestReport,
) -> tuple[list[MovieRecord], RatingTable]:
    """Drop movies whose genre set became empty via REMOVE/UNRESOLVED, with their ratings."""
    if not flagged:
        return movies, ratings
    report.dropped_movies.extend(sorted(flagged))
    movies = [m for m in movies if m.movie_id not in flagged]
    mask = ~np.isin(ratings.movie_ids, np.array(sorted(flagged), dtype=np.int64))
    report.dropped_ratings += int((~mask).sum())
    return movies, RatingTable(
        ratings.user_ids[mask], ratings.movie_ids[mask],
        ratings.values[mask], ratings.timestamps[mask],
    )


def _file_sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _require_file(root: Path, name: str) -> Path:
    p = root / name
    if not p.is_file():
        raise IngestError(f"missing input file: {p}")
    return p


# ---------------------------------------------------------------------------
# MovieLens-1M layout


def load_ml1m(
    root: Path | str,
    vocabulary: GenreVocabulary | None = None,
    overrides: Mapping[int, list[str]] | None = None,
) -> RatingCorpus:
    """Load a MovieLens-1M style root (users.dat / movies.dat / ratings.dat).

    Files are ``::``-delimited; movies.dat is Latin-1 (titles carry non-ASCII
    bytes), the others plain ASCII.  Genders map M/F; genre tokens pass
    through the vocabulary's alias map (default: Children's -> Family).
    """
    root = Path(root)
    vocabulary = vocabulary or ml1m_vocabulary()
    report = IngestReport()

    users_path = _require_file(root, "users.dat")
    movies_path = _require_file(root, "movies.dat")
    ratings_path = _require_file(root, "ratings.dat")

    users: list[UserRecord] = []
    with users_path.open(encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("::")
            if len(parts) != 5:
                raise IngestError(f"users.dat:{lineno}: expected 5 '::' fields")
            try:
                uid = int(parts[0])
            except ValueError as exc:
                raise IngestError(f"users.dat:{lineno}: bad user id {parts[0]!r}") from exc
            users.append(UserRecord(uid, _normalize_gender(parts[1], f"users.dat:{lineno}")))

    movies: list[MovieRecord] = []
    flagged: set[int] = set()
    with movies_path.open(encoding="latin-1") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("::")
            if len(parts) != 3:
                raise IngestError(f"movies.dat:{lineno}: expected 3 '::' fields")
            try:
                mid = int(parts[0])
            except ValueError as exc:
                raise IngestError(f"movies.dat:{lineno}: bad movie id {parts[0]!r}") from exc
            raw = parts[2].split("|") if parts[2] else []
            if overrides and mid in overrides:
                raw = list(overrides[mid])
                report.overrides_applied += 1
            genres, unresolved = _resolve_genres(raw, vocabulary, report, f"movies.dat:{lineno}")
            if not genres and (unresolved or raw):
                flagged.add(mid)  # nothing left after REMOVE/UNRESOLVED
                continue
            movies.append(MovieRecord(mid, parts[1], genres))

    u_ids: list[int] = []
    m_ids: list[int] = []
    vals: list[int] = []
    stamps: list[int] = []
    with ratings_path.open(encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("::")
            if len(parts) != 4:
                raise IngestError(f"ratings.dat:{lineno}: expected 4 '::' fields")
            try:
                uid, mid, r, ts = int(parts[0]), int(parts[1]), int(parts[2]), int(parts[3])
            except ValueError as exc:
                raise IngestError(f"ratings.dat:{lineno}: non-integer field") from exc
            if not 1 <= r <= 5:
                raise IngestError(f"ratings.dat:{lineno}: rating {r} outside 1..5")
            u_ids.append(uid)
            m_ids.append(mid)
            vals.append(r)
            stamps.append(ts)
    if not u_ids:
        raise IngestError("ratings.dat: no rating records")

    ratings = _dedupe_last_wins(u_ids, m_ids, vals, stamps, report)
    movies, ratings = _drop_tagless_movies(movies, flagged, ratings, report)
    if len(ratings) == 0:
        raise IngestError("no rating records remain after dropping flagged movies")

    provenance = {
        "format": "ml1m",
        "root": str(root),
        "hashes": {
            "users.dat": _file_sha256(users_path),
            "movies.dat": _file_sha256(movies_path),
            "ratings.dat": _file_sha256(ratings_path),
        },
    }
    return RatingCorpus(users, movies, ratings, vocabulary, provenance, report)


# ---------------------------------------------------------------------------
# interchange CSV layout


def load_interchange(
    path: Path | str,
    vocabulary: GenreVocabulary | None = None,
    overrides: Mapping[int, list[str]] | None = None,
) -> RatingCorpus:
    """Load the neutral interchange format: a directory of three CSV files.

    users.csv: ``user_id,gender``; movies.csv: ``movie_id,title,genres``
    (pipe-separated genres); ratings.csv: ``user_id,movie_id,rating,timestamp``.
    UTF-8 with a header row.  Semantics match :func:`load_ml1m`.
    """
    root = Path(path)
    vocabulary = vocabulary or GenreVocabulary()
    report = IngestReport()

    users_path = _require_file(root, "users.csv")
    movies_path = _require_file(root, "movies.csv")
    ratings_path = _require_file(root, "ratings.csv")

    def rows(p: Path, expected: list[str]):
        with p.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != expected:
                raise IngestError(f"{p.name}: expected header {','.join(expected)!r}")
            yield from ((lineno, row) for lineno, row in enumerate(reader, 2))

    users: list[UserRecord] = []
    for lineno, row in rows(users_path, ["user_id", "gender"]):
        if len(row) != 2:
            raise IngestError(f"users.csv:{lineno}: expected 2 fields")
        try:
            uid = int(row[0])
        except ValueError as exc:
            raise IngestError(f"users.csv:{lineno}: bad user id {row[0]!r}") from exc
        users.append(UserRecord(uid, _normalize_gender(row[1], f"users.csv:{lineno}")))

    movies: list[MovieRecord] = []
    flagged: set[int] = set()
    for lineno, row in rows(movies_path, ["movie_id", "title", "genres"]):
        if len(row) != 3:
            raise IngestError(f"movies.csv:{lineno}: expected 3 fields")
        try:
            mid = int(row[0])
        except ValueError as exc:
            raise IngestError(f"movies.csv:{lineno}: bad movie id {row[0]!r}") from exc
        raw = row[2].split("|") if row[2] else []
        if overrides and mid in overrides:
            raw = list(overrides[mid])
            report.overrides_applied += 1
        genres, unresolved = _resolve_genres(raw, vocabulary, report, f"movies.csv:{lineno}")
        if not genres and (unresolved or raw):
            flagged.add(mid)
            continue
        movies.append(MovieRecord(mid, row[1], genres))

    u_ids: list[int] = []
    m_ids: list[int] = []
    vals: list[int] = []
    stamps: list[int] = []
    for lineno, row in rows(ratings_path, ["user_id", "movie_id", "rating", "timestamp"]):
        if len(row) != 4:
            raise IngestError(f"ratings.csv:{lineno}: expected 4 fields")
        try:
            uid, mid, r, ts = int(row[0]), int(row[1]), int(row[2]), int(row[3])
        except ValueError as exc:
            raise IngestError(f"ratings.csv:{lineno}: non-integer field") from exc
        if not 1 <= r <= 5:
            raise IngestError(f"ratings.csv:{lineno}: rating {r} outside 1..5")
        u_ids.append(uid)
        m_ids.append(mid)
        vals.append(r)
        stamps.append(ts)
    if not u_ids:
        raise IngestError("ratings.csv: no rating records")

    ratings = _dedupe_last_wins(u_ids, m_ids, vals, stamps, report)
    movies, ratings = _drop_tagless_movies(movies, flagged, ratings, report)
    if len(ratings) == 0:
        raise IngestError("no rating records remain after dropping flagged movies")

    provenance = {
        "format": "interchange",
        "root": str(root),
        "hashes": {
            "users.csv": _file_sha256(users_path),
            "movies.csv": _file_sha256(movies_path),
            "ratings.csv": _file_sha256(ratings_path),
        },
    }
    return RatingCorpus(users, movies, ratings, vocabulary, provenance, report)


def export_interchange(corpus: RatingCorpus, out_dir: Path | str) -> None:
    """Write a corpus back out in the interchange CSV layout."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "users.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["user_id", "gender"])
        for u in corpus.users:
            w.writerow([u.user_id, u.gender])
    with (out / "movies.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["movie_id", "title", "genres"])
        for m in corpus.movies:
            w.writerow([m.movie_id, m.title, "|".join(sorted(m.genres))])
    with (out / "ratings.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["user_id", "movie_id", "rating", "timestamp"])
        r = corpus.ratings
        for i in range(len(r)):
            w.writerow([int(r.user_ids[i]), int(r.movie_ids[i]),
                        int(r.values[i]), int(r.timestamps[i])])
