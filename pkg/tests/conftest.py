import numpy as np
import pytest

from erelsel.masks import FrameImage

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def record_criterion():
    """Collect one PASS/FAIL line per acceptance criterion for the summary."""

    def _record(name: str, ok: bool, detail: str = "", status: str = "") -> None:
        status = status or ("PASS" if ok else "FAIL")
        ACCEPTANCE_LINES.append(f"{status}  {name}" + (f"  ({detail})" if detail else ""))

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def frame_of(values) -> FrameImage:
    return FrameImage(np.asarray(values, dtype=np.uint8))
