"""Deterministic CSV rendering for command output."""

import csv
import io
from pathlib import Path

import click


def format_value(value, digits: int = 9) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.{digits - 1}e}"
    return str(value)


def render_csv(
    header: list[str],
    rows: list[list],
    comments: list[str] | None = None,
    footer: list[str] | None = None,
    digits: int = 9,
) -> str:
    """Header, rows and '#' comment lines, LF line endings."""
    buffer = io.StringIO()
    for line in comments or []:
        buffer.write(f"# {line}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v, digits) for v in row])
    for line in footer or []:
        buffer.write(f"# {line}\n")
    return buffer.getvalue()


def emit(text: str, out: str | None = None) -> None:
    """Write to ``out`` if given, else stdout."""
    if out is None:
        click.echo(text, nl=False)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")
