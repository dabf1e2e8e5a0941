import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import baseline

    if not baseline.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(baseline.RESULTS):
        ok, detail = baseline.RESULTS[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
