import numpy as np
import pytest

from sparsestage import solver

# Every LassoSolution built in this process is recorded so the KKT
# certificate criterion can audit all solves made during the session.
SOLVES: list[tuple[bool, float, float]] = []


def pytest_configure(config):
    original = solver.LassoSolution.__post_init__

    def recording_post_init(self):
        SOLVES.append((self.converged, self.kkt_residual, self.kkt_tol))
        original(self)

    solver.LassoSolution.__post_init__ = recording_post_init


def pytest_collection_modifyitems(session, config, items):
    # the session-wide KKT audit must see every other solve first
    last = [it for it in items if "kkt_certificate_session" in it.name]
    rest = [it for it in items if it not in last]
    items[:] = rest + last


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one summary line per acceptance criterion, printed after the run
CRITERIA: dict[str, str] = {}


@pytest.fixture
def criterion():
    def record(name, passed, detail=""):
        CRITERIA[name] = f"{'PASS' if passed else 'FAIL'}  {name}  {detail}".rstrip()
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for key in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[key])
