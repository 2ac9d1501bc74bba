import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nftscope import synth  # noqa: E402

_criteria: dict[int, tuple[str, list[bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    entry = _criteria.setdefault(n, (title, []))
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        entry[1].append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, results = _criteria[n]
        verdict = "PASS" if results and all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}  {title}  ({sum(results)}/{len(results)} checks)")


@pytest.fixture(scope="session")
def demo():
    blocks, info = synth.demo_chain()
    return blocks, info


@pytest.fixture(scope="session")
def demo_blocks(demo):
    return demo[0]


@pytest.fixture(scope="session")
def scenarios(demo):
    return demo[1]["scenarios"]
