"""Audit report assembly: run manifests, JSON schema validation, atomic writes.

Every command emits a JSON document that embeds enough provenance (command
line, seed, input-file hashes, model, config, toolkit version) to re-derive
any published number.  Documents validate against the schema shipped in
``schemas/report-v1.json``.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import jsonschema

from . import __version__

REPORT_FORMAT = "gs-audit/report-v1"


def report_schema() -> dict:
    ref = resources.files("gsaudit").joinpath("schemas/report-v1.json")
    return json.loads(ref.read_text(encoding="utf-8"))


@dataclass(frozen=True)
class RunManifest:
    command: list[str]
    seed: int | None
    dataset_hashes: dict[str, str]
    stereotype_model: dict | None
    config: dict | None
    toolkit_version: str = __version__
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def to_dict(self) -> dict:
        return {
            "command": list(self.command),
            "seed": self.seed,
            "dataset_hashes": dict(self.dataset_hashes),
            "stereotype_model": self.stereotype_model,
            "config": self.config,
            "toolkit_version": self.toolkit_version,
            "created_at": self.created_at,
        }


@dataclass
class AuditReport:
    manifest: RunManifest
    corpus_stats: dict | None = None
    prevalence: dict | None = None
    results: list[dict] = field(default_factory=list)
    ingest_report: dict | None = None

    def to_dict(self) -> dict:
        return {
            "format": REPORT_FORMAT,
            "manifest": self.manifest.to_dict(),
            "corpus_stats": self.corpus_stats,
            "prevalence": self.prevalence,
            "results": list(self.results),
            "ingest_report": self.ingest_report,
        }


def validate_report(doc: dict) -> None:
    """Raises jsonschema.ValidationError when the document is malformed."""
    jsonschema.validate(doc, report_schema())


def write_report(report: AuditReport, path: Path | str) -> None:
    """Validate, then write atomically (temp file + rename)."""
    doc = report.to_dict()
    validate_report(doc)
    write_json_atomic(doc, path)


def write_json_atomic(doc: dict, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def make_manifest(
    seed: int | None,
    dataset_hashes: dict[str, str],
    stereotype_model: dict | None = None,
    config: dict | None = None,
    argv: list[str] | None = None,
) -> RunManifest:
    return RunManifest(
        command=list(sys.argv if argv is None else argv),
        seed=seed,
        dataset_hashes=dataset_hashes,
        stereotype_model=stereotype_model,
        config=config,
    )
