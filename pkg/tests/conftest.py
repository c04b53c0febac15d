import pytest

from symexpand import exactscalar

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[_LINES]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
    terminalreporter.write_line(f"pi residue events during the session: {exactscalar.pi_residue_events}")


def pytest_sessionfinish(session, exitstatus):
    # a nonzero count means some exact integral silently left a pi component behind
    if exactscalar.pi_residue_events and session.exitstatus == 0:
        session.exitstatus = 1
