import pytest

_CRITERIA = []


class _Criterion:
    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.failures = []
        self.notes = []

    def check(self, ok, what):
        """Record one sub-check; failures are collected, not raised, until :meth:`done`."""
        (self.notes if ok else self.failures).append(what)
        return ok

    def done(self, summary=None):
        total = len(self.notes) + len(self.failures)
        status = "PASS" if not self.failures else "FAIL"
        if self.failures:
            detail = "; ".join(self.failures)
        else:
            detail = summary or "; ".join(self.notes)
        line = f"{status} criterion {self.number}: {self.title} [{len(self.notes)}/{total} checks] {detail}"
        _CRITERIA.append((self.number, line))
        print(line)
        assert not self.failures, line


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA, key=lambda item: item[0]):
        terminalreporter.write_line(line)
