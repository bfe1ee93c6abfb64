"""Survey-side inference: which genre preferences predict gender.

Multivariate binary logistic regression over 21 categorical genre-preference
predictors, dummy-coded against a "No" reference level.  Emits per-term
coefficients, standard errors, odds ratios, Wald 95% intervals and p-values,
plus deviance / Pearson chi-square goodness-of-fit over covariate patterns.

The raw survey data behind the default stereotype model is not
redistributable, so a seeded synthetic-survey generator with planted
coefficients backs the tests and demos.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .corpus import CANONICAL_GENRES, FEMALE, MALE

LEVEL_NO = "No"
LEVEL_MIN = "MinPrefer"
LEVEL_MAX = "MaxPrefer"
LEVELS = (LEVEL_NO, LEVEL_MIN, LEVEL_MAX)

SURVEY_GENRES: tuple[str, ...] = tuple(sorted(CANONICAL_GENRES))

Z_95 = 1.96  # fixed normal quantile for the 95% Wald intervals


class SurveyError(ValueError):
    """Malformed survey input."""


class RankError(ValueError):
    """Design matrix is rank deficient; carries the offending column labels."""

    def __init__(self, columns: list[str]):
        self.columns = columns
        super().__init__(f"design matrix is rank deficient; dependent columns: {columns}")


class SeparationError(ValueError):
    """Quasi-complete separation: coefficients diverge instead of converging."""

    def __init__(self, columns: list[str]):
        self.columns = columns
        super().__init__(f"quasi-complete separation detected on columns: {columns}")


class ConvergenceError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# special functions


def normal_cdf(x: float) -> float:
    """Standard normal CDF via the error function."""
    if not math.isfinite(x):
        return 0.0 if x < 0 else 1.0
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def _lower_gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by series, for x < a + 1."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10_000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-17:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_gamma_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0 else 1.0 / tiny
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-17:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def chi_square_sf(x: float, df: float) -> float:
    """Upper-tail probability of the chi-square distribution."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if not math.isfinite(x):
        raise ValueError("statistic must be finite")
    if x <= 0:
        return 1.0
    a, half = df / 2.0, x / 2.0
    if half < a + 1.0:
        return 1.0 - _lower_gamma_series(a, half)
    return _upper_gamma_cf(a, half)


# ---------------------------------------------------------------------------
# records and design encoding


@dataclass(frozen=True)
class SurveyRecord:
    respondent_id: int
    gender: str  # MALE / FEMALE
    preferences: dict[str, str]  # genre -> level

    def __post_init__(self):
        if self.gender not in (MALE, FEMALE):
            raise SurveyError(f"respondent {self.respondent_id}: gender must be M/F")
        missing = set(SURVEY_GENRES) - set(self.preferences)
        if missing:
            raise SurveyError(
                f"respondent {self.respondent_id}: missing genres {sorted(missing)}"
            )
        for genre, level in self.preferences.items():
            if level not in LEVELS:
                raise SurveyError(
                    f"respondent {self.respondent_id}: level {level!r} for {genre}"
                )


@dataclass(frozen=True)
class DummyDesign:
    """n x (1 + 2 per genre) design: intercept, then per genre (alphabetical)
    a MaxPrefer and a MinPrefer indicator against the "No" reference."""

    matrix: np.ndarray
    column_labels: tuple[str, ...]

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def encode_design(records: list[SurveyRecord]) -> DummyDesign:
    if not records:
        raise SurveyError("no survey records")
    labels = ["intercept"]
    for genre in SURVEY_GENRES:
        labels.append(f"{genre}={LEVEL_MAX}")
        labels.append(f"{genre}={LEVEL_MIN}")
    X = np.zeros((len(records), len(labels)))
    X[:, 0] = 1.0
    for i, rec in enumerate(records):
        for gi, genre in enumerate(SURVEY_GENRES):
            level = rec.preferences[genre]
            if level == LEVEL_MAX:
                X[i, 1 + 2 * gi] = 1.0
            elif level == LEVEL_MIN:
                X[i, 2 + 2 * gi] = 1.0
    return DummyDesign(matrix=X, column_labels=tuple(labels))


def outcomes_from_records(records: list[SurveyRecord], positive: str = MALE) -> np.ndarray:
    return np.array([1.0 if r.gender == positive else 0.0 for r in records])


# ---------------------------------------------------------------------------
# maximum-likelihood fit


@dataclass(frozen=True)
class RegressionRow:
    term: str
    coefficient: float
    std_error: float
    odds_ratio: float
    ci_lower: float
    ci_upper: float
    p_value: float

    def to_dict(self) -> dict:
        return {
            "term": self.term,
            "coefficient": self.coefficient,
            "std_error": self.std_error,
            "odds_ratio": self.odds_ratio,
            "ci_lower": self.ci_lower,
            "ci_upper": self.ci_upper,
            "p_value": self.p_value,
        }


def regression_row(term: str, coefficient: float, std_error: float) -> RegressionRow:
    """Derive the reported row quantities from a coefficient and its SE."""
    if std_error <= 0:
        raise ValueError("standard error must be positive")
    z = abs(coefficient) / std_error
    return RegressionRow(
        term=term,
        coefficient=coefficient,
        std_error=std_error,
        odds_ratio=math.exp(coefficient),
        ci_lower=math.exp(coefficient - Z_95 * std_error),
        ci_upper=math.exp(coefficient + Z_95 * std_error),
        p_value=2.0 * (1.0 - normal_cdf(z)),
    )


@dataclass(frozen=True)
class GoodnessOfFit:
    deviance: float
    pearson: float
    df: int
    p_deviance: float | None
    p_pearson: float | None
    n_patterns: int
    saturated: bool

    def to_dict(self) -> dict:
        return {
            "deviance": self.deviance,
            "pearson": self.pearson,
            "df": self.df,
            "p_deviance": self.p_deviance,
            "p_pearson": self.p_pearson,
            "n_patterns": self.n_patterns,
            "saturated": self.saturated,
        }


@dataclass(frozen=True)
class FitSummary:
    rows: tuple[RegressionRow, ...]
    gof: GoodnessOfFit
    log_likelihoods: tuple[float, ...]  # per IRLS iteration, non-decreasing
    converged: bool

    # headline goodness-of-fit scalars (deviance flavor; ``gof`` carries the
    # Pearson statistic alongside)
    @property
    def gof_chi_square(self) -> float:
        return self.gof.deviance

    @property
    def gof_df(self) -> int:
        return self.gof.df

    @property
    def gof_p(self) -> float | None:
        return self.gof.p_deviance

    def row(self, term: str) -> RegressionRow:
        for r in self.rows:
            if r.term == term:
                return r
        raise KeyError(term)

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "goodness_of_fit": self.gof.to_dict(),
            "converged": self.converged,
        }


def _log_likelihood(X: np.ndarray, y: np.ndarray, beta: np.ndarray) -> float:
    eta = X @ beta
    return float(y @ eta - np.logaddexp(0.0, eta).sum())


def _rank_check(X: np.ndarray, labels: tuple[str, ...]) -> None:
    _, r, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag[0] == 0:
        raise RankError(list(labels))
    rank = int((diag > diag[0] * 1e-10).sum())
    if rank < X.shape[1]:
        raise RankError([labels[j] for j in sorted(piv[rank:])])


def fit_mle(
    design: DummyDesign,
    outcomes: np.ndarray,
    max_iterations: int = 200,
    tol: float = 1e-8,
) -> FitSummary:
    """Iteratively reweighted least squares with step-halving.

    Converges when the score (gradient) infinity norm falls below ``tol``.
    Rank-deficient designs and quasi-complete separation raise instead of
    returning pseudo-converged estimates.
    """
    X = np.asarray(design.matrix, dtype=np.float64)
    y = np.asarray(outcomes, dtype=np.float64)
    if X.shape[0] != y.shape[0]:
        raise ValueError("design rows must match outcome length")
    if set(np.unique(y).tolist()) - {0.0, 1.0}:
        raise ValueError("outcomes must be binary 0/1")
    _rank_check(X, design.column_labels)

    p = X.shape[1]
    beta = np.zeros(p)
    ll_trace = [_log_likelihood(X, y, beta)]
    converged = False
    for _ in range(max_iterations):
        eta = X @ beta
        mu = 1.0 / (1.0 + np.exp(-eta))
        grad = X.T @ (y - mu)
        if float(np.max(np.abs(grad))) <= tol:
            converged = True
            break
        w = np.clip(mu * (1.0 - mu), 1e-12, None)
        hess = X.T @ (w[:, None] * X)
        try:
            delta = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(hess, grad, rcond=None)[0]
        # step-halve until the log-likelihood does not measurably decrease;
        # near the optimum the true per-step change sits below the float
        # evaluation noise of the log-likelihood, so the step comparison
        # carries a noise-sized slack and the trace is clamped to precision
        step = 1.0
        current = ll_trace[-1]
        slack = 4e-12 * max(1.0, abs(current))
        accepted = False
        for _ in range(60):
            candidate = _log_likelihood(X, y, beta + step * delta)
            if candidate >= current - slack:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break  # no ascent direction left at float precision
        beta = beta + step * delta
        ll_trace.append(max(candidate, current))

    eta = X @ beta
    mu = 1.0 / (1.0 + np.exp(-eta))
    w = np.clip(mu * (1.0 - mu), 1e-12, None)
    info = X.T @ (w[:, None] * X)
    cov = np.linalg.inv(info)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    # separation lets coefficients run away, sometimes with a numerically
    # zero gradient; never report such pseudo-converged estimates
    runaway = [
        design.column_labels[j]
        for j in range(p)
        if abs(beta[j]) > 15.0 or se[j] > 100.0
    ]
    if runaway:
        raise SeparationError(runaway)
    if not converged:
        raise ConvergenceError(
            f"IRLS did not reach tolerance {tol} in {max_iterations} iterations"
        )

    rows = tuple(
        regression_row(design.column_labels[j], float(beta[j]), float(se[j]))
        for j in range(p)
    )
    gof = goodness_of_fit_arrays(X, y, beta, p)
    return FitSummary(rows=rows, gof=gof, log_likelihoods=tuple(ll_trace), converged=True)


def goodness_of_fit_arrays(
    X: np.ndarray, y: np.ndarray, beta: np.ndarray, n_params: int
) -> GoodnessOfFit:
    """Deviance and Pearson chi-square over distinct covariate patterns."""
    patterns, inverse = np.unique(X, axis=0, return_inverse=True)
    n_patterns = patterns.shape[0]
    m = np.bincount(inverse).astype(np.float64)
    obs = np.bincount(inverse, weights=y)
    mu = 1.0 / (1.0 + np.exp(-(patterns @ beta)))
    expected = m * mu

    with np.errstate(divide="ignore", invalid="ignore"):
        term1 = np.where(obs > 0, obs * np.log(obs / expected), 0.0)
        miss = m - obs
        term2 = np.where(miss > 0, miss * np.log(miss / (m - expected)), 0.0)
    deviance = float(2.0 * (term1 + term2).sum())
    denom = np.clip(m * mu * (1.0 - mu), 1e-300, None)
    pearson = float((((obs - expected) ** 2) / denom).sum())

    df = n_patterns - n_params
    saturated = df <= 0
    return GoodnessOfFit(
        deviance=deviance,
        pearson=pearson,
        df=df,
        p_deviance=None if saturated else chi_square_sf(deviance, df),
        p_pearson=None if saturated else chi_square_sf(pearson, df),
        n_patterns=n_patterns,
        saturated=saturated,
    )


def goodness_of_fit(
    fit: FitSummary, design: DummyDesign, outcomes: np.ndarray
) -> GoodnessOfFit:
    """Recompute the goodness-of-fit of a converged fit against its data."""
    beta = np.array([r.coefficient for r in fit.rows])
    return goodness_of_fit_arrays(
        np.asarray(design.matrix, dtype=np.float64),
        np.asarray(outcomes, dtype=np.float64),
        beta,
        len(fit.rows),
    )


# ---------------------------------------------------------------------------
# survey CSV input / output


def read_survey_csv(path: Path | str) -> list[SurveyRecord]:
    """Read the survey schema: header ``gender`` plus one column per genre."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if "gender" not in header:
            raise SurveyError(f"{path.name}: missing 'gender' column")
        got = set(header) - {"gender"}
        if got != set(SURVEY_GENRES):
            missing = sorted(set(SURVEY_GENRES) - got)
            extra = sorted(got - set(SURVEY_GENRES))
            raise SurveyError(
                f"{path.name}: genre columns mismatch (missing {missing}, extra {extra})"
            )
        records = []
        for lineno, row in enumerate(reader, 2):
            g = row["gender"].strip().lower()
            if g in ("m", "male"):
                gender = MALE
            elif g in ("f", "female"):
                gender = FEMALE
            else:
                raise SurveyError(f"{path.name}:{lineno}: bad gender {row['gender']!r}")
            prefs = {}
            for genre in SURVEY_GENRES:
                level = row[genre].strip()
                if level not in LEVELS:
                    raise SurveyError(
                        f"{path.name}:{lineno}: level {level!r} in column {genre!r}"
                    )
                prefs[genre] = level
            records.append(SurveyRecord(lineno - 1, gender, prefs))
    if not records:
        raise SurveyError(f"{path.name}: no survey records")
    return records


def write_survey_csv(records: list[SurveyRecord], path: Path | str) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gender", *SURVEY_GENRES])
        for rec in records:
            writer.writerow([rec.gender, *(rec.preferences[g] for g in SURVEY_GENRES)])


def fit_summary_to_csv(fit: FitSummary, path: Path | str) -> None:
    """Table-shaped CSV: one row per term with the reported columns."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["term", "coefficient", "std_error", "odds_ratio",
             "ci_lower", "ci_upper", "p_value"]
        )
        for r in fit.rows:
            writer.writerow(
                [r.term, f"{r.coefficient:.6g}", f"{r.std_error:.6g}",
                 f"{r.odds_ratio:.6g}", f"{r.ci_lower:.6g}", f"{r.ci_upper:.6g}",
                 f"{r.p_value:.6g}"]
            )


def fit_summary_to_json(fit: FitSummary, path: Path | str) -> None:
    Path(path).write_text(json.dumps(fit.to_dict(), indent=2), encoding="utf-8")


# ---------------------------------------------------------------------------
# synthetic survey generation (the raw study data is not redistributable)


def synthesize_survey(
    n: int,
    seed: int,
    coefficients: np.ndarray | None = None,
    level_probs: tuple[float, float, float] = (0.4, 0.35, 0.25),
) -> tuple[list[SurveyRecord], np.ndarray]:
    """Draw survey records from a planted logistic model.

    Preference levels are sampled independently per genre; the binary gender
    outcome is Bernoulli in the planted linear predictor.  Returns the
    records and the true coefficient vector (aligned to encode_design).
    """
    rng = np.random.default_rng(seed)
    n_cols = 1 + 2 * len(SURVEY_GENRES)
    if coefficients is None:
        coefficients = np.concatenate(
            [[0.3], rng.uniform(-1.2, 1.2, size=n_cols - 1).round(2)]
        )
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if coefficients.shape != (n_cols,):
        raise ValueError(f"expected {n_cols} coefficients")

    level_idx = rng.choice(3, size=(n, len(SURVEY_GENRES)), p=level_probs)
    X = np.zeros((n, n_cols))
    X[:, 0] = 1.0
    for gi in range(len(SURVEY_GENRES)):
        X[:, 1 + 2 * gi] = level_idx[:, gi] == 2  # MaxPrefer
        X[:, 2 + 2 * gi] = level_idx[:, gi] == 1  # MinPrefer
    prob = 1.0 / (1.0 + np.exp(-(X @ coefficients)))
    y = rng.random(n) < prob

    level_names = (LEVEL_NO, LEVEL_MIN, LEVEL_MAX)
    records = []
    for i in range(n):
        prefs = {
            genre: level_names[level_idx[i, gi]]
            for gi, genre in enumerate(SURVEY_GENRES)
        }
        records.append(SurveyRecord(i + 1, MALE if y[i] else FEMALE, prefs))
    return records, coefficients
