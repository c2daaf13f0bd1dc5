import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"
NATURAL = DATA / "natural"


def two_squares_image():
    """Two 20x20 black squares on white, 10 px of background between them."""
    img = np.full((60, 100), 255, dtype=np.uint8)
    img[20:40, 20:40] = 0
    img[20:40, 50:70] = 0
    return img


def one_square_image():
    img = np.full((100, 100), 255, dtype=np.uint8)
    img[30:70, 30:70] = 0
    return img


@pytest.fixture
def two_squares():
    return two_squares_image()


@pytest.fixture
def one_square():
    return one_square_image()


@pytest.fixture
def natural_dir():
    return NATURAL


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion covered by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        number, title = marker.args
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        note = getattr(item, "acceptance_note", "")
        _ACCEPTANCE.append((number, status, title, note))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, title, note in sorted(_ACCEPTANCE):
        line = f"[{status}] criterion {number}: {title}"
        if note:
            line += f" -- {note}"
        terminalreporter.write_line(line)
