from importlib.resources import files

import pytest

from superpositivity.afe import SpectralWeight, ingest_coefficients


def data_path(name):
    return files("superpositivity") / "data" / name


@pytest.fixture(scope="session")
def level11():
    return ingest_coefficients(data_path("level11.csv"))


@pytest.fixture(scope="session")
def level37():
    return ingest_coefficients(data_path("level37.csv"))


@pytest.fixture(scope="session")
def weight():
    return SpectralWeight()


_CRITERIA = []


@pytest.fixture
def criterion(capsys):
    """``criterion(k, checks)`` prints and records one PASS/FAIL line, then
    asserts every ``(name, ok, detail)`` check."""
    def record(k, checks):
        ok = all(c[1] for c in checks)
        failed = "; ".join(f"{name}: {detail}" for name, good, detail in checks if not good)
        line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'}" + (f" ({failed})" if failed else "")
        _CRITERIA.append((k, line))
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_CRITERIA):
            terminalreporter.write_line(line)
