import pytest

from ramsey_forge.chimera import default_hardware
from ramsey_forge.embedding import find_embedding
from ramsey_forge.qubo import build_r33_model, build_rm2_model, to_spin


@pytest.fixture(scope="session")
def hardware():
    return default_hardware()


@pytest.fixture(scope="session")
def rm2_4_spin():
    return to_spin(build_rm2_model(4))


@pytest.fixture(scope="session")
def rm2_8_spin():
    return to_spin(build_rm2_model(8))


@pytest.fixture(scope="session")
def r33_6_fixed_spin():
    return to_spin(build_r33_model(6, fix_first=True))


@pytest.fixture(scope="session")
def rm2_4_embedding(rm2_4_spin, hardware):
    emb = find_embedding(rm2_4_spin, hardware, seed=0)
    assert emb is not None
    return emb


@pytest.fixture(scope="session")
def rm2_8_embedding(rm2_8_spin, hardware):
    emb = find_embedding(rm2_8_spin, hardware, seed=0)
    assert emb is not None
    return emb


@pytest.fixture(scope="session")
def r33_6_fixed_embedding(r33_6_fixed_spin, hardware):
    emb = find_embedding(r33_6_fixed_spin, hardware, seed=0)
    assert emb is not None
    return emb


# ------------------------------------------------------------ acceptance log
_CRITERIA: dict[int, list[tuple[str, bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    marker = dict(report.user_properties).get("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        passed = report.outcome == "passed" and not hasattr(report, "wasxfail")
        _CRITERIA.setdefault(int(marker), []).append((report.nodeid.split("::")[-1], passed))


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        parts = _CRITERIA[n]
        verdict = "PASS" if all(ok for _, ok in parts) else "FAIL"
        failed = [name for name, ok in parts if not ok]
        suffix = f" (failing: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {n:2d}: {verdict}{suffix}")
