import os

import pytest
from hypothesis import settings

settings.register_profile("opcalc", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("opcalc")


@pytest.fixture(autouse=True)
def _private_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("OPCALC_CACHE", str(tmp_path / "cache"))
    yield


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
