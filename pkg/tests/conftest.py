import contextlib
import os
import re
import time

import pytest

from swdetect.cli import main

PIPELINE = [
    ["simulate", "--out", "corpus.csv"],
    ["extract", "--corpus", "corpus.csv", "--out", "features.csv"],
    ["train", "--features", "features.csv", "--model-out", "model.json", "--report-out", "train.json"],
    ["eval", "--model", "model.json", "--features", "features.csv", "--split", "test", "--out", "eval.json"],
]
ARTIFACTS = ("corpus.csv", "features.csv", "model.json", "train.json", "eval.json")


@contextlib.contextmanager
def chdir(path):
    old = os.getcwd()
    os.chdir(path)
    try:
        yield
    finally:
        os.chdir(old)


def run_pipeline(directory):
    """Run the default simulate, extract, train and eval steps in ``directory``.

    Returns the wall time in seconds.  All paths are relative so two runs in
    different directories record identical flags.
    """
    t0 = time.perf_counter()
    with chdir(directory):
        for argv in PIPELINE:
            code = main(argv)
            assert code == 0, (argv, code)
    return time.perf_counter() - t0


@pytest.fixture(scope="session")
def default_run(tmp_path_factory):
    """One full run of the default pipeline, shared by the CLI and acceptance tests."""
    directory = tmp_path_factory.mktemp("run_a")
    elapsed = run_pipeline(directory)
    return directory, elapsed


# --------------------------------------------------------------------------
# One pass/fail line per acceptance criterion

_CRITERION = re.compile(r"test_criterion_(\d+)")
_outcomes = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    num = int(m.group(1))
    failed = report.failed or (report.when == "call" and report.skipped)
    if report.when == "call" or failed:
        _outcomes[num] = _outcomes.get(num, True) and not failed


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_outcomes):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if _outcomes[num] else 'FAIL'}")
