ACCEPTANCE: dict = {}


def record_criterion(number: int, part: str, ok: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(number, []).append((part, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[number]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        detail = "; ".join(f"{p}: {d}" for p, _, d in parts)
        terminalreporter.write_line(f"criterion {number}: {status} ({detail})")
