"""Shared test plumbing: acceptance-criterion result collection.

`test_acceptance.py` records one verdict per criterion; the terminal
summary hook prints them as stable one-line records whether or not output
capture is on.
"""

_criteria: list[tuple[int, str, bool, str]] = []


def record_criterion(number: int, description: str, passed: bool, detail: str = "") -> None:
    _criteria.append((int(number), description, bool(passed), detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, passed, detail in sorted(_criteria):
        verdict = "PASS" if passed else "FAIL"
        line = f"ACCEPTANCE {number:2d} {verdict}: {description}"
        if detail:
            line += f" [{detail}]"
        terminalreporter.write_line(line)
