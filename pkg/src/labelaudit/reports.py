"""Score files, manifests and metric reports on disk.

JSONL files start with one ``{"header": {...}}`` line carrying the tool
version and the fully resolved configuration; every following line is one
record. Writers are deterministic: the same records and header always give
the same bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Iterable, Mapping

from .dataset import image_sort_key
from .injector import ErrorManifest, ManifestEntry

__all__ = [
    "dump_jsonl",
    "load_jsonl",
    "sort_records",
    "write_scores",
    "read_score_records",
    "read_scores",
    "write_scores_csv",
    "write_manifest",
    "read_manifest",
    "write_report",
]


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=False, separators=(",", ":"), allow_nan=False)


def dump_jsonl(path: str | Path, header: Mapping[str, Any], records: Iterable[Mapping[str, Any]]) -> None:
    lines = [_dumps({"header": dict(header)})]
    lines.extend(_dumps(dict(r)) for r in records)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_jsonl(path: str | Path) -> tuple[dict[str, Any], list[dict[str, Any]]]:
    header: dict[str, Any] = {}
    records = []
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: line {n}: {exc.msg}") from exc
        if n == 1 and isinstance(obj, dict) and set(obj) == {"header"}:
            header = obj["header"]
        else:
            records.append(obj)
    return header, records


def sort_records(records: Iterable[Mapping[str, Any]]) -> list[dict[str, Any]]:
    """Ascending by score, ties broken by image id."""
    return sorted((dict(r) for r in records), key=lambda r: (r["score"], image_sort_key(r["image_id"])))


def write_scores(path: str | Path, records: Iterable[Mapping[str, Any]], header: Mapping[str, Any]) -> None:
    dump_jsonl(path, header, sort_records(records))


def read_score_records(path: str | Path) -> tuple[dict[str, Any], list[dict[str, Any]]]:
    return load_jsonl(path)


def read_scores(path: str | Path, column: str = "score") -> dict[Any, float]:
    """Map image id to one numeric column of a score file."""
    _, records = load_jsonl(path)
    out = {}
    for r in records:
        if column not in r:
            raise KeyError(f"score record for image {r.get('image_id')!r} has no column {column!r}")
        out[r["image_id"]] = float(r[column])
    return out


def write_scores_csv(path: str | Path, records: Iterable[Mapping[str, Any]]) -> None:
    """Flat projection of a score file: image id, method and the score columns."""
    rows = sort_records(records)
    columns = ["image_id", "method", "score", "badloc", "swap", "overlook"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({c: r.get(c, "") for c in columns})


def write_manifest(path: str | Path, manifest: ErrorManifest, header: Mapping[str, Any]) -> None:
    entries = sorted(manifest.entries, key=lambda e: image_sort_key(e.image_id))
    dump_jsonl(path, header, (e.to_record() for e in entries))


def read_manifest(path: str | Path) -> tuple[dict[str, Any], ErrorManifest]:
    header, records = load_jsonl(path)
    return header, ErrorManifest([ManifestEntry.from_record(r) for r in records])


def write_report(path: str | Path, report: Mapping[str, Any], header: Mapping[str, Any]) -> None:
    Path(path).write_text(json.dumps({"header": dict(header), "metrics": dict(report)}, indent=1) + "\n",
                          encoding="utf-8")
