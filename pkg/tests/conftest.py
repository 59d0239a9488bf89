import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_coo(rng, shape, nnz):
    from sptucker import CooTensor

    total = int(np.prod(shape))
    lin = rng.choice(total, size=min(nnz, total), replace=False)
    idx = np.stack(np.unravel_index(lin, shape), axis=1)
    return CooTensor(shape, idx, rng.standard_normal(idx.shape[0]))


_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    number, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    _ACCEPTANCE[number] = (title, rep.passed, detail)
    line = f"[acceptance {number}] {'PASS' if rep.passed else 'FAIL'} {title}"
    print(f"\n{line}{': ' + detail if detail else ''}")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(
            f"{number}. {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else ""))
