"""Collects one line per acceptance criterion for the terminal summary."""
RESULTS: list[str] = []


def record(number: int, ok: bool, detail: str, seconds: float) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail} ({seconds:.1f} s)"
    RESULTS.append(line)
    print(line)
