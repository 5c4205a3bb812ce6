import pytest

_CRITERIA: dict[int, tuple[bool, str]] = {}


class Criterion:
    """Records the parts of one acceptance criterion and asserts them together."""

    def __init__(self, number: int):
        self.number = number
        self.parts: list[tuple[str, bool, str]] = []

    def check(self, label: str, ok: bool, detail: str = "") -> None:
        self.parts.append((label, bool(ok), detail))

    def conclude(self) -> None:
        ok = all(p[1] for p in self.parts)
        summary = "; ".join(f"{label} {'ok' if good else 'FAILED'} ({detail})" if detail else
                            f"{label} {'ok' if good else 'FAILED'}" for label, good, detail in self.parts)
        _CRITERIA[self.number] = (ok, summary)
        line = f"criterion {self.number:2d}: {'PASS' if ok else 'FAIL'}  {summary}"
        print(line)
        assert ok, line


@pytest.fixture
def criterion(request):
    number = int(request.node.name.split("_")[2])
    return Criterion(number)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, summary = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {summary}")
