"""Collects one verdict line per acceptance criterion."""

from __future__ import annotations

LINES: list[str] = []


def record(number: int, title: str, ok: bool, detail: str) -> str:
    line = f"CRITERION {number} {'PASS' if ok else 'FAIL'} [{title}] {detail}"
    LINES.append(line)
    print(line)
    return line
