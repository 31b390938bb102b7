import numpy as np
import pytest

from eegadhd.ingest import CHANNELS, Recording


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def make_recording(rng):
    def make(n=3840, label="ADHD", sid="s01"):
        return Recording(sid, label, rng.standard_normal((n, len(CHANNELS))))
    return make


# --- acceptance summary -----------------------------------------------------
# Tests marked ``@pytest.mark.criterion("5a", "text")`` get one summary line each.

_VERDICTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, text): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    cid, text = mark.args
    detail = dict(item.user_properties).get("detail", "")
    if rep.skipped:
        _VERDICTS[cid] = ("SKIPPED", text, str(rep.longrepr[-1]) if rep.longrepr else "")
    elif rep.when == "call" or rep.failed:
        if rep.failed or cid not in _VERDICTS:
            _VERDICTS[cid] = ("PASS" if rep.passed else "FAIL", text, detail)


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_VERDICTS, key=lambda c: (int(c.rstrip("abc")), c)):
        verdict, text, detail = _VERDICTS[cid]
        line = f"criterion {cid:<3} {verdict:<7} {text}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
