import os
import warnings

import hypothesis
import numpy as np
import pytest

from imbresample.neighbors import KClampWarning

hypothesis.settings.register_profile("default", max_examples=40, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=8, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=300, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

np.seterr(all="raise", under="ignore")


@pytest.fixture(autouse=True)
def _quiet_clamp():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", KClampWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    from _report import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
