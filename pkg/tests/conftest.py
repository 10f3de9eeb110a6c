import shutil
from importlib import resources
from pathlib import Path

import pytest

from pathforge.smt import SolverConfig

CORPUS = Path(str(resources.files("pathforge") / "corpus"))
FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

needs_z3 = pytest.mark.skipif(shutil.which("z3") is None, reason="z3 not installed")


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def solver_cfg() -> SolverConfig:
    return SolverConfig(("z3",), timeout=20.0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        title, status = RESULTS[number]
        terminalreporter.write_line(f"{status} criterion {number}: {title}")
