import os
from pathlib import Path

import pytest

from gsaudit.corpus import load_ml1m
from gsaudit.synth import SynthConfig, write_ml1m_root

#: One line per acceptance criterion, echoed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

#: Small-but-structured corpus for harness tests: same generative model as
#: the full substitute, scaled down and with a stronger planted signal so
#: classifier comparisons stay stable at this size.
SMALL_SYNTH = SynthConfig(
    n_users=360,
    n_males=252,
    n_movie_records=220,
    max_movie_id=230,
    n_ratings=14_000,
    max_user_ratings=150,
    seed=90210,
    male_tilt_mean=0.10,
    female_tilt_mean=-0.75,
    tilt_sd=0.25,
    idiosyncrasy_sd=0.05,
)


def pytest_addoption(parser):
    parser.addoption(
        "--ml1m-root",
        default=os.environ.get("GSAUDIT_ML1M", ""),
        help="path to a real MovieLens-1M root; synthetic substitute used when empty",
    )


@pytest.fixture(scope="session")
def ml1m_is_synthetic(request) -> bool:
    return not request.config.getoption("--ml1m-root")


@pytest.fixture(scope="session")
def ml1m_root(request, tmp_path_factory) -> Path:
    configured = request.config.getoption("--ml1m-root")
    if configured:
        return Path(configured)
    root = tmp_path_factory.mktemp("synth-ml1m")
    write_ml1m_root(root, SynthConfig())
    return root


@pytest.fixture(scope="session")
def ml1m_corpus(ml1m_root):
    return load_ml1m(ml1m_root)


@pytest.fixture(scope="session")
def small_root(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("synth-small")
    write_ml1m_root(root, SMALL_SYNTH)
    return root


@pytest.fixture(scope="session")
def small_corpus(small_root):
    return load_ml1m(small_root)

