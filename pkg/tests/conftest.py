import pytest

# one line per acceptance criterion, filled in by test_acceptance
ACCEPTANCE = {}


def record(key, ok, detail):
    ACCEPTANCE[key] = (ok, detail)


def _tag(ok):
    return {True: "PASS", False: "FAIL", None: "SKIP"}[ok]


def summary_lines():
    def order(key):
        num, _, sub = key.partition(":")
        return (int(num), sub != "", sub)

    entries = dict(ACCEPTANCE)
    # criteria split into rows also get one overall line
    for num in {k.partition(":")[0] for k in entries if ":" in k}:
        rows = [v for k, v in entries.items() if k.partition(":")[0] == num and ":" in k]
        graded = [ok for ok, _ in rows if ok is not None]
        passed = sum(graded)
        skipped = len(rows) - len(graded)
        ok = bool(graded) and passed == len(graded)
        entries.setdefault(num, (ok, f"{passed} of {len(graded)} rows pass, {skipped} skipped"))

    lines = []
    for key in sorted(entries, key=order):
        ok, detail = entries[key]
        label = key if ":" not in key else "  " + key.partition(":")[2]
        lines.append(f"criterion {label:<12} {_tag(ok)}  {detail}")
    return lines


def pytest_terminal_summary(terminalreporter):
    lines = summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance():
    return record
