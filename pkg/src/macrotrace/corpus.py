"""Corpus data model: papers with month-resolution dates, author lists and
macro uses, plus chronological indexing and the experience queries built on it.

The corpus order used everywhere "earlier" matters is (date, paper id): month
granularity with lexicographic paper-id tie-breaks, so runs are reproducible.
"""

from __future__ import annotations

import json
import re
from bisect import bisect_left
from dataclasses import dataclass, field
from pathlib import Path

from .extract import ExtractDiagnostics, MacroKey, MacroUse, extract_macros

__all__ = [
    "Month",
    "Paper",
    "Corpus",
    "CorpusLoadError",
    "months_between",
    "normalize_author",
    "load_corpus",
    "global_experience",
    "local_experience",
]

_DATE_RE = re.compile(r"^(\d{4})-(\d{2})$")


@dataclass(frozen=True, order=True)
class Month:
    """A calendar month; ordered, with well-defined differences in months."""

    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ValueError(f"month out of range: {self.month}")

    def index(self) -> int:
        return self.year * 12 + (self.month - 1)

    @classmethod
    def parse(cls, s: str) -> "Month":
        m = _DATE_RE.match(s)
        if m is None:
            raise ValueError(f"invalid date {s!r}, expected YYYY-MM")
        return cls(int(m.group(1)), int(m.group(2)))

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


MIN_MONTH = Month(1900, 1)
MAX_MONTH = Month(2100, 12)


def months_between(a: Month, b: Month) -> int:
    """Calendar months from a to b (positive when b is later)."""
    return b.index() - a.index()


def normalize_author(raw: str) -> str:
    """Lexical author-id normalization: case-fold and collapse whitespace."""
    return " ".join(raw.split()).casefold()


@dataclass(frozen=True)
class Paper:
    id: str
    date: Month
    authors: tuple[str, ...]
    macro_uses: tuple[MacroUse, ...] = ()


class CorpusLoadError(ValueError):
    """A corpus file failed validation; the message names the offending line."""


@dataclass
class Corpus:
    """Immutable after construction; all reads are safe to share across workers.

    papers are sorted by (date, id).  The indexes map into positions in that
    sorted list:
      position          paper id -> position
      author_index      author -> ascending positions of their papers
      body_index        macro key -> ascending positions of papers using it
      body_user_count   macro key -> number of distinct authors using it
    """

    papers: list[Paper]
    position: dict[str, int] = field(repr=False)
    author_index: dict[str, list[int]] = field(repr=False)
    body_index: dict[MacroKey, list[int]] = field(repr=False)
    body_user_count: dict[MacroKey, int] = field(repr=False)
    extract_skipped: int = 0

    @classmethod
    def from_papers(cls, papers: list[Paper], extract_skipped: int = 0) -> "Corpus":
        ordered = sorted(papers, key=lambda p: (p.date.index(), p.id))
        position: dict[str, int] = {}
        for pos, p in enumerate(ordered):
            if p.id in position:
                raise CorpusLoadError(f"duplicate paper id {p.id!r}")
            position[p.id] = pos
        author_index: dict[str, list[int]] = {}
        body_index: dict[MacroKey, list[int]] = {}
        body_users: dict[MacroKey, set[str]] = {}
        for pos, p in enumerate(ordered):
            for a in p.authors:
                author_index.setdefault(a, []).append(pos)
            seen_keys: set[MacroKey] = set()
            for use in p.macro_uses:
                if use.key not in seen_keys:
                    seen_keys.add(use.key)
                    body_index.setdefault(use.key, []).append(pos)
                body_users.setdefault(use.key, set()).update(p.authors)
        body_user_count = {k: len(v) for k, v in body_users.items()}
        return cls(
            papers=ordered,
            position=position,
            author_index=author_index,
            body_index=body_index,
            body_user_count=body_user_count,
            extract_skipped=extract_skipped,
        )

    def paper(self, paper_id: str) -> Paper:
        try:
            return self.papers[self.position[paper_id]]
        except KeyError:
            raise KeyError(f"unknown paper id {paper_id!r}") from None

    def papers_by(self, author: str) -> list[Paper]:
        """Chronological papers of an author."""
        return [self.papers[i] for i in self._author_positions(author)]

    def _author_positions(self, author: str) -> list[int]:
        try:
            return self.author_index[author]
        except KeyError:
            raise KeyError(f"unknown author {author!r}") from None


def _parse_record(obj: dict, lineno: int, mode: str, diagnostics: ExtractDiagnostics) -> Paper:
    for key in ("id", "date", "authors"):
        if key not in obj:
            raise CorpusLoadError(f"line {lineno}: missing field {key!r}")
    pid = obj["id"]
    if not isinstance(pid, str) or not pid:
        raise CorpusLoadError(f"line {lineno}: paper id must be a non-empty string")
    try:
        date = Month.parse(obj["date"])
    except (TypeError, ValueError) as exc:
        raise CorpusLoadError(f"line {lineno}: {exc}") from None
    if not MIN_MONTH <= date <= MAX_MONTH:
        raise CorpusLoadError(f"line {lineno}: date {date} outside 1900-01..2100-12")
    raw_authors = obj["authors"]
    if not isinstance(raw_authors, list) or not raw_authors:
        raise CorpusLoadError(f"line {lineno}: authors must be a non-empty list")
    authors: list[str] = []
    for a in raw_authors:
        if not isinstance(a, str):
            raise CorpusLoadError(f"line {lineno}: author ids must be strings")
        norm = normalize_author(a)
        if not norm:
            raise CorpusLoadError(f"line {lineno}: empty author id after normalization")
        if norm not in authors:
            authors.append(norm)

    if mode == "pre-extracted":
        raw_macros = obj.get("macros", [])
        if not isinstance(raw_macros, list):
            raise CorpusLoadError(f"line {lineno}: macros must be a list")
        uses = []
        for entry in raw_macros:
            if not isinstance(entry, dict) or "name" not in entry or "body" not in entry:
                raise CorpusLoadError(f"line {lineno}: macro entries need name and body")
            if not entry["name"]:
                raise CorpusLoadError(f"line {lineno}: macro name must be non-empty")
            uses.append(MacroUse(name=entry["name"], body=entry["body"]))
    elif mode == "raw-latex":
        source = obj.get("source")
        if not isinstance(source, str):
            raise CorpusLoadError(f"line {lineno}: raw-latex records need a source string")
        uses = extract_macros(source, diagnostics)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    return Paper(id=pid, date=date, authors=tuple(authors), macro_uses=tuple(uses))


def load_corpus(path: str | Path, mode: str = "pre-extracted") -> Corpus:
    """Load a JSON Lines corpus file.

    ``mode`` is "pre-extracted" (records carry a macros list) or "raw-latex"
    (records carry LaTeX source; macros are extracted here).  Papers come back
    sorted by (date, id) regardless of file order.
    """
    if mode not in ("pre-extracted", "raw-latex"):
        raise ValueError(f"unknown mode {mode!r}")
    diagnostics = ExtractDiagnostics()
    papers: list[Paper] = []
    line_of: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusLoadError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise CorpusLoadError(f"line {lineno}: record must be a JSON object")
            paper = _parse_record(obj, lineno, mode, diagnostics)
            if paper.id in line_of:
                raise CorpusLoadError(
                    f"line {lineno}: duplicate paper id {paper.id!r} "
                    f"(first seen on line {line_of[paper.id]})"
                )
            line_of[paper.id] = lineno
            papers.append(paper)
    return Corpus.from_papers(papers, extract_skipped=diagnostics.skipped_unbalanced)


def global_experience(corpus: Corpus, author: str, before: str) -> int:
    """Number of papers by ``author`` strictly earlier than paper ``before``
    in corpus (date, id) order.  The query paper itself never counts."""
    pos = corpus.position.get(before)
    if pos is None:
        raise KeyError(f"unknown paper id {before!r}")
    positions = corpus._author_positions(author)
    return bisect_left(positions, pos)


def local_experience(corpus: Corpus, author: str, m: MacroKey, before: str) -> int:
    """Number of papers by ``author`` using macro body ``m`` strictly earlier
    than paper ``before`` in corpus order."""
    pos = corpus.position.get(before)
    if pos is None:
        raise KeyError(f"unknown paper id {before!r}")
    author_positions = corpus._author_positions(author)
    count = 0
    for p in corpus.body_index.get(m, []):
        if p >= pos:
            break
        i = bisect_left(author_positions, p)
        if i < len(author_positions) and author_positions[i] == p:
            count += 1
    return count
