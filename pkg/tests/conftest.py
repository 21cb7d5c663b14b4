import numpy as np
import pytest

from sixvertex.sampling import sample_points
from sixvertex.weights import make_weights

RHO = 0.6 + 0.3j


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=["field-trig", "sym-trig", "generic"])
def weights(request):
    return make_weights(request.param, RHO, seed=3)


@pytest.fixture
def field_trig():
    return make_weights("field-trig", RHO)


def points(w, n, seed=0, with_field=True):
    """Seeded admissible spectral points for ``w``."""
    return sample_points(np.random.default_rng(seed), n, w, with_field=with_field)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test body fills ``info`` and the verdict is taken from the outcome."""
    import time

    info = {"detail": ""}
    start = time.perf_counter()
    yield info
    elapsed = time.perf_counter() - start
    call = getattr(request.node, "rep_call", None)
    verdict = "PASS" if call is not None and call.passed else "FAIL"
    number = request.node.get_closest_marker("criterion").args[0]
    line = f"criterion {number:>2}: {verdict}  {info['detail']}  ({elapsed:.1f} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
