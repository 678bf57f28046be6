import math
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

import probe_engine as pe  # noqa: E402

CRITERIA = {
    1: "Fermi-moment oracle",
    2: "Onsager-Casimir symmetry",
    3: "Reduction consistency",
    4: "Buttiker coincidence at d_m = 1",
    5: "Normalized-efficiency fixed point",
    6: "Curzon-Ahlborn limits of the efficiency bound",
    7: "Bound inequalities on the sweep grid",
    8: "d_m sign structure",
    9: "Max-power stationarity",
    10: "Figure datasets",
}

_outcomes: dict[int, list[tuple[str, bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): acceptance criterion number n")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        _outcomes.setdefault(marker.args[0], []).append((item.name, call.excinfo is None))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in CRITERIA.items():
        runs = _outcomes.get(n)
        if runs is None:
            continue
        failed = [name for name, ok in runs if not ok]
        status = "PASS" if not failed else "FAIL"
        line = f"[{status}] criterion {n:>2}: {title} ({len(runs) - len(failed)}/{len(runs)} checks)"
        if failed:
            line += "  failing: " + ", ".join(failed)
        tr.write_line(line)


@pytest.fixture(scope="session")
def model():
    return pe.paper_model().with_phi(math.pi / 3)


@pytest.fixture(scope="session")
def chain(model):
    return pe.onsager_chain(model)


@pytest.fixture(scope="session")
def chain_rev(model):
    return pe.onsager_chain(model.reversed())


@pytest.fixture(scope="session")
def coeffs(chain, chain_rev):
    return chain.coefficients(chain_rev)
