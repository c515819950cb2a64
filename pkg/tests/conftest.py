import pytest

# lines recorded by the acceptance suite, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def _line(number: int, title: str, ok: bool, detail: str = "") -> str:
    line = f"acceptance {number:>2} {'PASS' if ok else 'FAIL'}  {title}"
    return f"{line}  ({detail})" if detail else line


@pytest.fixture
def acceptance_line():
    pending: list[tuple[int, str]] = []

    def record(number: int, title: str):
        pending.append((number, title))

        def finish(ok: bool, detail: str = "") -> None:
            pending.remove((number, title))
            line = _line(number, title, ok, detail)
            ACCEPTANCE_LINES.append(line)
            print(line)
            assert ok, line

        return finish

    yield record
    # a criterion that raised before reporting still gets its line
    for number, title in pending:
        ACCEPTANCE_LINES.append(_line(number, title, False, "raised before completing"))
        print(ACCEPTANCE_LINES[-1])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
