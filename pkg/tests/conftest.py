import pytest

from kolmogorov_swr.grid import GridConfig, build_grid

# criterion number -> list of (passed, detail) for its sub-checks
ACCEPTANCE = {}


@pytest.fixture
def small_grid():
    """Coarse grid that keeps SWR runs well under a second."""
    return build_grid(GridConfig(T=0.5, dt=0.02, hx=0.02, hv=0.02, overlap_elems=3))


@pytest.fixture
def small_grid_l0():
    return build_grid(GridConfig(T=0.5, dt=0.02, hx=0.02, hv=0.02, overlap_elems=0))


@pytest.fixture
def criterion():
    """Record a one-line verdict for the acceptance summary."""

    def record(number, passed, detail):
        ACCEPTANCE.setdefault(number, []).append((bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[number]
        verdict = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        details = "; ".join(d if ok else f"{d} [failed]" for ok, d in parts)
        terminalreporter.write_line(f"criterion {number}: {verdict} - {details}")
