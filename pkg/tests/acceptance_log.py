"""Collects one verdict line per acceptance criterion."""

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> str:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS[n] = line
    print(line)
    return line
