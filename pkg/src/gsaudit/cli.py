"""Command-line surface: ingest, prevalence, attack, survey-fit.

Exit codes: 0 success, 2 input or configuration error, 3 numerical
non-convergence under --strict, 4 statistical degeneracy (rank deficiency
or separation in the survey fit).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import classifiers, corpus as corpus_mod, eval as eval_mod, surveystats
from .report import AuditReport, make_manifest, write_report
from .stereotype import default_model, model_from_config, prevalence

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NONCONVERGED = 3
EXIT_DEGENERATE = 4


def _load_corpus(path: str, vocabulary=None, overrides=None) -> corpus_mod.RatingCorpus:
    """Accept either raw ML1M roots or interchange directories."""
    root = Path(path)
    if (root / "ratings.dat").is_file():
        return corpus_mod.load_ml1m(root, vocabulary, overrides)
    return corpus_mod.load_interchange(root, vocabulary, overrides)


def _stats_lines(stats: corpus_mod.CorpusStats) -> list[str]:
    return [
        f"users: {stats.users} ({stats.male} male / {stats.female} female, "
        f"{stats.male_percent:.1f}% / {stats.female_percent:.1f}%)",
        f"movies: {stats.movies} records (max id {stats.max_movie_id})",
        f"ratings: {stats.ratings}",
        f"genres: {stats.genres}",
        f"density: {stats.density_percent:.2f}% (id-range basis), "
        f"{stats.density_percent_distinct:.2f}% (distinct-movie basis)",
    ]


def cmd_ingest(args: argparse.Namespace) -> int:
    vocabulary = None
    if args.format == "ml1m":
        vocabulary = corpus_mod.ml1m_vocabulary()
    if args.genre_map:
        extra = corpus_mod.load_genre_map(args.genre_map)
        vocabulary = (vocabulary or corpus_mod.GenreVocabulary()).with_aliases(extra)
    overrides = corpus_mod.load_override_map(args.override) if args.override else None

    if args.format == "ml1m":
        loaded = corpus_mod.load_ml1m(args.root, vocabulary, overrides)
    else:
        loaded = corpus_mod.load_interchange(args.root, vocabulary, overrides)

    out = Path(args.out)
    corpus_mod.export_interchange(loaded, out)
    stats = corpus_mod.corpus_stats(loaded)
    report = AuditReport(
        manifest=make_manifest(None, loaded.provenance.get("hashes", {})),
        corpus_stats=stats.to_dict(),
        ingest_report=loaded.ingest_report.to_dict(),
    )
    write_report(report, out / "ingest_report.json")

    for line in _stats_lines(stats):
        print(line)
    rep = loaded.ingest_report
    print(
        f"aliases applied: {sum(rep.alias_applications.values())} "
        f"({', '.join(f'{k}: {v}' for k, v in sorted(rep.alias_applications.items())) or 'none'})"
    )
    if rep.dropped_movies:
        print(f"dropped movies: {len(rep.dropped_movies)} (with {rep.dropped_ratings} ratings)")
    print(f"wrote interchange corpus to {out}")
    return EXIT_OK


def cmd_prevalence(args: argparse.Namespace) -> int:
    loaded = _load_corpus(args.corpus)
    model = model_from_config(args.model) if args.model else default_model()
    rep = prevalence(loaded, model, args.mode)
    doc = AuditReport(
        manifest=make_manifest(None, loaded.provenance.get("hashes", {}),
                               stereotype_model=model.to_dict()),
        corpus_stats=corpus_mod.corpus_stats(loaded).to_dict(),
        prevalence=rep.to_dict(),
    )
    write_report(doc, args.out)
    print(f"mode: {rep.mode}")
    print(f"aligned: {rep.aligned_percent:.1f}%  "
          f"misaligned: {100 - rep.aligned_percent:.1f}% ({rep.misaligned_count} of {rep.total_users})")
    print(f"ties (counted aligned): {rep.tie_count}")
    print(f"wrote {args.out}")
    return EXIT_OK


def _parse_harness(spec: str) -> tuple[str, float | int]:
    kind, _, value = spec.partition(":")
    if kind == "holdout":
        return "holdout", float(value or 0.2)
    if kind == "cv":
        return "cv", int(value or 10)
    raise ValueError(f"unknown harness {spec!r}; expected holdout:FRAC or cv:K")


def _load_grid(path: str) -> list[classifiers.FitConfig]:
    docs = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(docs, list):
        raise ValueError("grid file must hold a JSON list of config objects")
    return [classifiers.FitConfig(**d) for d in docs]


def _metric_table(rows: list[tuple[str, dict]]) -> str:
    names = ("auc", "accuracy", "accuracy_male", "accuracy_female",
             "precision", "recall", "f_measure")
    width = max(len(label) for label, _ in rows) + 2
    head = "".join(n.rjust(17) for n in names)
    lines = [" " * width + head]
    for label, metric in rows:
        cells = "".join(f"{metric[n]:.4f}".rjust(17) for n in names)
        lines.append(label.ljust(width) + cells)
    return "\n".join(lines)


def cmd_attack(args: argparse.Namespace) -> int:
    loaded = _load_corpus(args.corpus)
    model = model_from_config(args.model) if args.model else default_model()
    gs_model = model if args.with_gs else None
    harness_kind, harness_value = _parse_harness(args.harness)
    grid = _load_grid(args.grid) if args.grid else None
    config = classifiers.default_config(args.classifier)

    if harness_kind == "holdout":
        result = eval_mod.run_holdout(
            loaded, gs_model, args.classifier, config,
            test_fraction=harness_value, seed=args.seed,
            mode=args.mode, gs_scaling=args.gs_scaling,
        )
        result_doc = result.to_dict()
        table = _metric_table([(f"{args.classifier} ({'GS' if args.with_gs else 'ratings'})",
                                result.metrics.to_dict())])
        converged = result.converged
    else:
        result = eval_mod.run_cv(
            loaded, gs_model, args.classifier, grid,
            k=harness_value, seed=args.seed, mode=args.mode, gs_scaling=args.gs_scaling,
        )
        result_doc = result.to_dict()
        result_doc["harness"] = f"cv:{harness_value}"
        table = _metric_table(
            [(f"{args.classifier} mean", result.mean),
             (f"{args.classifier} sigma", result.std)]
        )
        converged = True

    doc = AuditReport(
        manifest=make_manifest(
            args.seed, loaded.provenance.get("hashes", {}),
            stereotype_model=model.to_dict() if args.with_gs else None,
            config=config.to_dict(),
        ),
        corpus_stats=corpus_mod.corpus_stats(loaded).to_dict(),
        results=[result_doc],
    )
    write_report(doc, args.out)
    print(table)
    print(f"wrote {args.out}")
    if args.strict and not converged:
        print("solver did not reach tolerance (strict mode)", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_survey_fit(args: argparse.Namespace) -> int:
    records = surveystats.read_survey_csv(args.input)
    design = surveystats.encode_design(records)
    out_prefix = Path(args.out)
    out_prefix.parent.mkdir(parents=True, exist_ok=True)

    for positive, tag in ((corpus_mod.MALE, "male_positive"), (corpus_mod.FEMALE, "female_positive")):
        outcomes = surveystats.outcomes_from_records(records, positive=positive)
        fit = surveystats.fit_mle(design, outcomes)
        surveystats.fit_summary_to_csv(fit, f"{out_prefix}_{tag}.csv")
        surveystats.fit_summary_to_json(fit, f"{out_prefix}_{tag}.json")
        gof = fit.gof
        print(f"{tag}: {len(fit.rows)} terms, deviance {gof.deviance:.3f} "
              f"(df {gof.df}), pearson {gof.pearson:.3f}")
    print(f"wrote {out_prefix}_male_positive.(csv|json), {out_prefix}_female_positive.(csv|json)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsaudit",
        description="Audit gender-stereotype prevalence and gender-inference risk "
                    "in movie-rating corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a raw dataset into the interchange format")
    p.add_argument("--format", choices=("ml1m", "interchange"), required=True)
    p.add_argument("--root", required=True, help="directory holding the raw files")
    p.add_argument("--genre-map", help="extra alias lines: raw,canonical (or __REMOVE__)")
    p.add_argument("--override", help="per-movie genre override CSV: movie_id,Genre1|Genre2")
    p.add_argument("--out", required=True, help="output directory for the interchange corpus")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("prevalence", help="stereotype alignment share of a corpus")
    p.add_argument("--corpus", required=True, help="corpus directory (ml1m or interchange)")
    p.add_argument("--model", help="stereotype model JSON (default: survey-backed sets)")
    p.add_argument("--mode", choices=("cardinality", "item-count"), default="cardinality")
    p.add_argument("--out", required=True, help="output report JSON path")
    p.set_defaults(func=cmd_prevalence)

    p = sub.add_parser("attack", help="run a gender-inference attack harness")
    p.add_argument("--corpus", required=True)
    p.add_argument("--classifier", choices=classifiers.KINDS, required=True)
    gs = p.add_mutually_exclusive_group(required=True)
    gs.add_argument("--with-gs", dest="with_gs", action="store_true")
    gs.add_argument("--no-gs", dest="with_gs", action="store_false")
    p.add_argument("--harness", default="holdout:0.2", help="holdout:FRAC or cv:K")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", help="JSON list of fit-config objects for cv grid search")
    p.add_argument("--model", help="stereotype model JSON")
    p.add_argument("--mode", choices=("cardinality", "item-count"), default="cardinality")
    p.add_argument("--gs-scaling", choices=("unit", "raw"), default="unit")
    p.add_argument("--strict", action="store_true",
                   help="exit 3 when the solver does not reach tolerance")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("survey-fit", help="logistic regression over survey preferences")
    p.add_argument("--input", required=True, help="survey CSV (gender + 21 genre columns)")
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=cmd_survey_fit)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (surveystats.RankError, surveystats.SeparationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except surveystats.ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (corpus_mod.IngestError, surveystats.SurveyError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
