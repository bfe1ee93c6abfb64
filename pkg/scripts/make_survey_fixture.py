#!/usr/bin/env python3
"""Write a synthetic survey CSV (planted-coefficient logistic model).

The real questionnaire responses are not redistributable; this fixture has
the same schema (gender + 21 genre-preference columns) and a known ground
truth, so the survey-fit command can be exercised end to end.
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from gsaudit.surveystats import synthesize_survey, write_survey_csv


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/synth-survey.csv")
    parser.add_argument("--n", type=int, default=630)
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()

    records, coefficients = synthesize_survey(args.n, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_survey_csv(records, out)
    truth = out.with_suffix(".truth.json")
    truth.write_text(json.dumps({"coefficients": coefficients.tolist()}, indent=2))
    print(f"wrote {out} ({args.n} respondents) and {truth}")


if __name__ == "__main__":
    main()
