import numpy as np
import pytest

from polarproxy import synth

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.skipped):
        status = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
        _CRITERIA.append((mark.args[0], status))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _CRITERIA:
        terminalreporter.write_line(f"{status}  {name}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def synth_table():
    table, truth = synth.generate(synth.SynthConfig(rng_seed=11))
    return table, truth


@pytest.fixture(scope="session")
def bundle_dir(tmp_path_factory):
    """Two-year synthetic input bundle written to disk."""
    d = tmp_path_factory.mktemp("bundle")
    cfg = synth.SynthConfig(years=(2018, 2019), noise_sd=0.02, rng_seed=5,
                            n_provinces=81, frames_per_province=6)
    synth.generate_inputs(cfg).write(d)
    return d
