"""Single static HTML page listing all reports."""
from __future__ import annotations

from html import escape
from typing import Iterable

from .plist import report_sort_key

_STYLE = """body{font-family:sans-serif;margin:2em}table{border-collapse:collapse}
td,th{border:1px solid #ccc;padding:4px 8px;text-align:left}details{margin:0}"""


def render_html(reports: Iterable[dict], title: str = "minisa results") -> str:
    rows = []
    for r in sorted(reports, key=report_sort_key):
        events = "".join(
            f"<li>{escape(e['file'])}:{e['line']}:{e['col']} <b>{escape(e['kind'])}</b> {escape(e['message'])}</li>"
            for e in r["events"]
        )
        rows.append(
            f"<tr><td>{escape(r['file'])}:{r['line']}:{r['col']}</td><td>{escape(r['checker'])}</td>"
            f"<td><details><summary>{escape(r['message'])}</summary><ol>{events}</ol></details></td>"
            f"<td><code>{r['issue_hash'][:16]}</code></td></tr>"
        )
    body = "\n".join(rows) or '<tr><td colspan="4">no reports</td></tr>'
    return (
        f"<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>{escape(title)}</title>"
        f"<style>{_STYLE}</style></head><body><h1>{escape(title)}</h1>\n"
        "<table><tr><th>Location</th><th>Checker</th><th>Message / path</th><th>Hash</th></tr>\n"
        f"{body}\n</table></body></html>\n"
    )


def write_html(reports: Iterable[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_html(reports))
