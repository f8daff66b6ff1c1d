import pytest

from exfilgame.model import Distribution, LinkSpec, NetworkSpec, NodeSpec, enumerate_routes
from exfilgame.scenario import load_scenario


@pytest.fixture(scope="session")
def table1():
    return load_scenario("table1")


@pytest.fixture(scope="session")
def desktop_route(table1):
    routes = enumerate_routes(table1.network)
    return next(r for r in routes if "desktops-remote" in r.link_ids)


def single_link(mean=5.0, std=0.5, thresholds=(2.0,), src_mult=1, dest_mult=1):
    nodes = (NodeSpec("a", "source"), NodeSpec("b", "sink"))
    link = LinkSpec("a-b", "a", "b", Distribution(mean, std), tuple(thresholds), src_mult, dest_mult)
    return NetworkSpec(nodes, (link,))


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        title, passed, detail = module.RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}: {detail}")
