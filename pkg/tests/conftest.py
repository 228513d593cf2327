import numpy as np
import pytest

from scriptid import synth

# criterion results recorded by the acceptance suite, echoed at the end of
# the run so each line is visible even with output capture enabled
CRITERION_LINES = []


def record_criterion(number, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    line = f"criterion {number:2d}: {status}  {detail}".rstrip()
    CRITERION_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for line in CRITERION_LINES:
            terminalreporter.write_line("  " + line)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def arcish_char():
    return synth.gen_character(synth.ARCISH, np.random.default_rng([1, 0]),
                               sample_id="arcish-0")


@pytest.fixture
def barred_char():
    return synth.gen_character(synth.BARRED, np.random.default_rng([1, 1]),
                               sample_id="barred-0")


def pad_image(arr, pad=3):
    return np.pad(np.asarray(arr, dtype=bool), pad)


@pytest.fixture
def fixture_images():
    """Small binary grids with known skeleton structure."""
    line = np.ones((1, 9), dtype=bool)
    rect = np.ones((3, 7), dtype=bool)
    ring = np.zeros((9, 9), dtype=bool)
    yy, xx = np.mgrid[0:9, 0:9]
    r = np.hypot(yy - 4, xx - 4)
    ring[(r >= 2.5) & (r <= 4.2)] = True
    plus = np.zeros((9, 9), dtype=bool)
    plus[4, 1:8] = True
    plus[1:8, 4] = True
    tee = np.zeros((9, 9), dtype=bool)
    tee[1, 1:8] = True
    tee[1:8, 4] = True
    ex = np.eye(9, dtype=bool) | np.fliplr(np.eye(9, dtype=bool))
    return {name: pad_image(img) for name, img in
            [("line", line), ("rect", rect), ("ring", ring),
             ("plus", plus), ("tee", tee), ("ex", ex)]}
