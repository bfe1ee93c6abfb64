#!/usr/bin/env python3
"""Write a synthetic MovieLens-1M style dataset root.

The generated corpus matches the real dataset's headline numbers (6040
users, 4331 male / 1709 female, max movie id 3952, 1,000,209 ratings, 18
genres) and carries planted gender-stereotype structure, so the full audit
pipeline can run where the license-restricted original is unavailable.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from gsaudit.synth import SynthConfig, write_ml1m_root


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/synth-ml1m", help="output directory")
    parser.add_argument("--seed", type=int, default=SynthConfig.seed)
    args = parser.parse_args()

    config = SynthConfig(seed=args.seed)
    root = write_ml1m_root(args.out, config)
    print(f"wrote {root}/users.dat, movies.dat, ratings.dat")
    print(f"  users={config.n_users} ratings={config.n_ratings} seed={config.seed}")


if __name__ == "__main__":
    main()
