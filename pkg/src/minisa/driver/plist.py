"""plist report files, one per translation unit."""
from __future__ import annotations

import plistlib
from typing import Iterable


def _loc(files: list[str], file: str, line: int, col: int) -> dict:
    return {"col": col, "file": files.index(file), "line": line}


def report_sort_key(r: dict) -> tuple:
    return (r["file"], r["line"], r["col"], r["checker"], r["issue_hash"])


def plist_document(reports: Iterable[dict]) -> dict:
    reports = sorted(reports, key=report_sort_key)
    names = {r["file"] for r in reports} | {e["file"] for r in reports for e in r["events"]}
    files = sorted(names)
    diags = []
    for r in reports:
        diags.append({
            "check_name": r["checker"],
            "description": r["message"],
            "issue_hash": r["issue_hash"],
            "location": _loc(files, r["file"], r["line"], r["col"]),
            "path": [
                {"kind": e["kind"], "location": _loc(files, e["file"], e["line"], e["col"]), "message": e["message"]}
                for e in r["events"]
            ],
        })
    return {"diagnostics": diags, "files": files}


def write_plist(reports: Iterable[dict], path: str) -> None:
    data = plistlib.dumps(plist_document(reports), fmt=plistlib.FMT_XML, sort_keys=True)
    with open(path, "wb") as fh:
        fh.write(data)


def read_plist(path: str) -> dict:
    with open(path, "rb") as fh:
        return plistlib.load(fh)


def read_plist_hashes(path: str) -> dict[str, dict]:
    """issue hash -> {checker, file, line, message} for one plist file."""
    doc = read_plist(path)
    files = doc.get("files", [])
    out = {}
    for d in doc.get("diagnostics", []):
        loc = d["location"]
        out[d["issue_hash"]] = {
            "checker": d["check_name"], "file": files[loc["file"]], "line": loc["line"], "message": d["description"],
        }
    return out
