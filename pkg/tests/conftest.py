import io

import pytest

from forgevar.environment import default_environment
from forgevar.properties import FeatureRegistry, PropertySet, parse_property


@pytest.fixture
def registry():
    return FeatureRegistry()


@pytest.fixture
def env():
    return default_environment()


def props(registry, text):
    """PropertySet from 'a=1 b=2' text, validated against ``registry``."""
    return PropertySet(parse_property(registry, w) for w in text.split())


@pytest.fixture
def workspace(tmp_path):
    """Write files into a temporary workspace: workspace({'Buildfile': ...})."""

    def make(files):
        for name, content in files.items():
            path = tmp_path / name
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(content)
        return tmp_path

    return make


@pytest.fixture
def capture():
    return io.StringIO()


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
