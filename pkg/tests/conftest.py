import functools
import sys
from pathlib import Path

import hypothesis
import pytest

from fireretain.cayley import enumerate_ball
from fireretain.groups import construct_group

sys.path.insert(0, str(Path(__file__).parent))

hypothesis.settings.register_profile("default", deadline=None, max_examples=60)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def shared_ball(group_text, R):
    """Balls are expensive; share them across the whole session."""
    return enumerate_ball(construct_group(group_text), R)


@pytest.fixture(scope="session")
def ball():
    return shared_ball


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
