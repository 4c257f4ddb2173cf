import pytest

from codecaug.audio.manifest import build_synthetic_dataset

# (number, name, passed, detail) tuples collected by the acceptance tests
# and echoed as one line each after the normal pytest summary
_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    def record(number, name, ok, detail=""):
        _ACCEPTANCE.append((number, name, bool(ok), detail))
        assert ok, f"acceptance {number} ({name}): {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(_ACCEPTANCE):
        verdict = "PASS" if ok else "FAIL"
        suffix = f"  [{detail}]" if detail else ""
        terminalreporter.write_line(f"{number}. {name}: {verdict}{suffix}")


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """4 train / 2 eval clips per class, 1.5 s; enough to train for a
    couple of epochs in pipeline-mechanics tests."""
    out = tmp_path_factory.mktemp("tinyds")
    return build_synthetic_dataset(4, 2, 1.5, 11, str(out))


@pytest.fixture(scope="session")
def acceptance_dataset(tmp_path_factory):
    """The default-sized synthetic dataset the experiment checks run on:
    100 train / 40 eval per class, 3 s clips."""
    out = tmp_path_factory.mktemp("accds")
    return build_synthetic_dataset(100, 40, 3.0, 7, str(out))
