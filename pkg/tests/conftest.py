import pytest

from amoeba_atlas.fixtures import CURVES, EXTRA_CURVES
from amoeba_atlas.poly import parse_polynomial

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    label = marker.args[0]
    failed = report.failed or (report.when == "call" and report.skipped)
    if report.when == "call" or failed:
        _CRITERIA[label] = _CRITERIA.get(label, True) and not failed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok in _CRITERIA.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")


@pytest.fixture(scope="session")
def curves():
    return {name: parse_polynomial(text) for name, text in CURVES.items()}


@pytest.fixture(scope="session")
def extra_curves():
    return {name: parse_polynomial(text) for name, text in EXTRA_CURVES.items()}


class _RasterCache:
    """Default rasters and components of named curves, computed once."""

    def __init__(self, table):
        self.table = table
        self._rasters = {}
        self._components = {}

    def raster(self, name):
        from amoeba_atlas.amoeba import amoeba_points

        if name not in self._rasters:
            self._rasters[name] = amoeba_points(self.table[name])
        return self._rasters[name]

    def components(self, name):
        from amoeba_atlas.amoeba import complement_components

        if name not in self._components:
            self._components[name] = complement_components(self.raster(name), f=self.table[name])
        return self._components[name]


@pytest.fixture(scope="session")
def rasters(curves, extra_curves):
    return _RasterCache({**curves, **extra_curves})
