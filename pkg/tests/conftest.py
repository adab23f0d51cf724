import contextlib
import os
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from oracles import FIXTURES, load_fixture  # noqa: E402

_VERDICTS = pytest.StashKey[dict]()


@pytest.fixture
def fixture_dir():
    return lambda name: os.path.join(FIXTURES, name)


@pytest.fixture
def fixture():
    return load_fixture


@pytest.fixture
def criterion(request):
    """Context manager recording one PASS/FAIL line for an acceptance criterion."""
    verdicts = request.config.stash.setdefault(_VERDICTS, {})

    @contextlib.contextmanager
    def check(number, title, budget=None):
        start = time.perf_counter()
        try:
            yield
            took = time.perf_counter() - start
            if budget is not None:
                assert took < budget, f"took {took:.1f}s, budget {budget}s"
        except BaseException as exc:
            verdicts[number] = f"criterion {number} FAIL  {title}: {exc!s:.200}"
            raise
        verdicts[number] = f"criterion {number} PASS  {title} ({took:.2f}s)"

    return check


def pytest_terminal_summary(terminalreporter, config):
    verdicts = config.stash.get(_VERDICTS, {})
    if verdicts:
        terminalreporter.section("acceptance")
        for n in sorted(verdicts):
            terminalreporter.write_line(verdicts[n])
