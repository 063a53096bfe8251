"""Deterministic text/CSV rendering for benchmark outputs.

All numbers are printed with fixed precision so a fixed (fake) clock yields
byte-stable reports.
"""

from __future__ import annotations


def format_kv_section(title: str, values: dict) -> str:
    lines = [f"== {title} =="]
    for key in values:
        value = values[key]
        if isinstance(value, float):
            lines.append(f"{key}={value:.6f}")
        else:
            lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def format_scope_table_text(rows: list[tuple[int, str, int, float, float]]) -> str:
    """rows: (depth, name, count, seconds, percent)."""
    lines = ["== operator profile ==",
             f"{'scope':<28}{'count':>8}{'cumulative_ms':>16}{'percent':>10}"]
    for depth, name, count, seconds, pct in rows:
        label = "  " * depth + name
        lines.append(f"{label:<28}{count:>8}{seconds * 1000.0:>16.3f}{pct:>10.2f}")
    return "\n".join(lines) + "\n"


def format_scope_table_csv(rows: list[tuple[int, str, int, float, float]]) -> str:
    lines = ["depth,scope,count,cumulative_ms,percent"]
    for depth, name, count, seconds, pct in rows:
        lines.append(f"{depth},{name},{count},{seconds * 1000.0:.3f},{pct:.2f}")
    return "\n".join(lines) + "\n"


def format_curve_csv(rows: list[dict]) -> str:
    if not rows:
        return "block_kind,length,seconds\n"
    fields = list(rows[0].keys())
    lines = [",".join(fields)]
    for row in rows:
        cells = []
        for field in fields:
            value = row[field]
            cells.append(f"{value:.6f}" if isinstance(value, float) else str(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
