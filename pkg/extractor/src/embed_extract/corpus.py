"""Minimal JSON-Lines corpus reader.

One JSON object per line.  The text lives under "problem" or "text" by
default (first match wins, override with text_field).  Missing "id" fields
are synthesized from the row number.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

DEFAULT_TEXT_FIELDS = ("problem", "text")


class CorpusError(ValueError):
    """Raised for malformed corpus files."""


@dataclass(frozen=True)
class Record:
    id: str
    text: str


@dataclass
class Corpus:
    records: list[Record] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.records)

    def texts(self) -> list[str]:
        return [r.text for r in self.records]

    def ids(self) -> list[str]:
        return [r.id for r in self.records]


def _resolve_field(row: dict, lineno: int, text_field: str | None) -> str:
    if text_field is not None:
        if text_field not in row:
            raise CorpusError(f"line {lineno}: missing text field {text_field!r}")
        return text_field
    for name in DEFAULT_TEXT_FIELDS:
        if name in row:
            return name
    raise CorpusError(
        f"line {lineno}: no text field found (tried {', '.join(DEFAULT_TEXT_FIELDS)})"
    )


def load_corpus(path, text_field: str | None = None) -> Corpus:
    records = []
    seen: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(row, dict):
                raise CorpusError(f"line {lineno}: expected a JSON object")
            name = _resolve_field(row, lineno, text_field)
            text = row[name]
            if not isinstance(text, str) or not text.strip():
                raise CorpusError(f"line {lineno}: field {name!r} is not non-empty text")
            rid = str(row["id"]) if "id" in row else f"row-{lineno - 1}"
            if rid in seen:
                raise CorpusError(
                    f"line {lineno}: duplicate id {rid!r} (first seen on line {seen[rid]})"
                )
            seen[rid] = lineno
            records.append(Record(id=rid, text=text))
    if not records:
        raise CorpusError(f"empty corpus: {path}")
    return Corpus(records=records)
