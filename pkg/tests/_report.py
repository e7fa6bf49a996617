"""Collects the acceptance one-liners so conftest can print them as a
recap after the run, where capture will not swallow them."""

LINES: list[str] = []


def record(num: int, name: str, ok: bool, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    line = f"criterion {num:2d} {name}: {status}"
    if detail:
        line += f" ({detail})"
    LINES.append(line)
    print(line)
    return ok
