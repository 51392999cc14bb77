import functools
import warnings

import pytest

from nlgrad.kernels import KernelCatalogEntry, make_catalog_kernel

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def catalog(kind, n, s=0.5):
    return make_catalog_kernel(KernelCatalogEntry(kind, s), n)


def record(number, title, ok, detail=""):
    line = f"criterion {number:>2} [{'PASS' if ok else 'FAIL'}] {title}"
    if detail:
        line += f" :: {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES, key=lambda item: item[0]):
        terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _quiet_integration_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield
