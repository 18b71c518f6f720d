import pytest

from delaycorr.correlation import ScenarioParams


def scenario(k=1.0, c0=0.1, spacing=0.5, **kw):
    return ScenarioParams(rician_factor=k, scatter_decay=c0, antenna_spacing=spacing,
                          speed=kw.pop("speed", 100.0), wavelength=kw.pop("wavelength", 0.1), **kw)


@pytest.fixture
def base_scenario():
    """K_R = 1, c0 = 0.1, D = 0.5: the setting used by the convergence checks."""
    return scenario()


# ---- acceptance summary: one PASS/FAIL line per criterion ----------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "ok": True, "ran": False})
    if call.when == "call":
        entry["ran"] = True
    if call.excinfo is not None:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        status = "PASS" if e["ok"] and e["ran"] else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {e['title']}")
