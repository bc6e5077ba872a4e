"""Extraction of macro definitions from LaTeX source, and tracking filters.

A macro has a ``name`` (what the author types after the backslash) and a
``body`` (what the compiler substitutes).  The normalized body is the unit
everything downstream tracks, so two visually different definitions that
collapse to the same body are the same macro.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .corpus import Corpus

__all__ = [
    "MacroUse",
    "MacroFilter",
    "ExtractDiagnostics",
    "extract_macros",
    "normalize_body",
    "trackable_macros",
]

# MacroKey is a normalized body string; kept as a plain str.
MacroKey = str


def normalize_body(raw: str) -> MacroKey:
    """Strip outer whitespace and collapse internal whitespace runs to one space."""
    return " ".join(raw.split())


@dataclass(frozen=True)
class MacroUse:
    """One macro definition found in a paper: a name bound to a body.

    ``key`` is the normalized body and is derived automatically; pass it
    only when it is already known.
    """

    name: str
    body: str
    key: MacroKey = ""

    def __post_init__(self):
        if not self.key:
            object.__setattr__(self, "key", normalize_body(self.body))


@dataclass(frozen=True)
class MacroFilter:
    """Thresholds deciding which macro bodies are distinctive enough to track.

    Bodies must be strictly longer than ``min_body_len`` characters (after
    normalization) and used by at least ``min_authors`` distinct authors.
    """

    min_body_len: int = 20
    min_authors: int = 30

    def __post_init__(self):
        if self.min_body_len <= 0 or self.min_authors <= 0:
            raise ValueError("filter thresholds must be positive")


@dataclass
class ExtractDiagnostics:
    """Tally of definitions skipped during extraction."""

    skipped_unbalanced: int = 0


_DEF_START = re.compile(r"\\(newcommand|renewcommand|providecommand|def)(\*?)(?![a-zA-Z])")
# A control sequence: letters (incl. @, common in package internals) or one symbol.
_CONTROL_SEQ = re.compile(r"\s*\\([a-zA-Z@]+|[^a-zA-Z\s])")
_OPT_ARG = re.compile(r"\s*\[[^\]]*\]")


def _strip_comments(source: str) -> str:
    """Drop text after an unescaped %% to end of line, keeping the newline."""
    out_lines = []
    for line in source.split("\n"):
        cut = None
        i = 0
        while i < len(line):
            ch = line[i]
            if ch == "\\":
                i += 2
                continue
            if ch == "%":
                cut = i
                break
            i += 1
        out_lines.append(line if cut is None else line[:cut])
    return "\n".join(out_lines)


def _match_braced_group(text: str, start: int) -> Optional[tuple[str, int]]:
    """Return (content, index_after_close) for the balanced group opening at
    ``start`` (which must point at '{'), or None if braces never balance.
    Escaped characters (backslash followed by anything) never affect depth."""
    if start >= len(text) or text[start] != "{":
        return None
    depth = 0
    i = start
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            i += 2
            continue
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start + 1 : i], i + 1
        i += 1
    return None


def extract_macros(source: str, diagnostics: ExtractDiagnostics | None = None) -> list[MacroUse]:
    """Extract macro definitions from LaTeX source text.

    Recognizes \\newcommand, \\renewcommand, \\providecommand (optionally
    starred) and \\def.  The body is the first balanced brace group after the
    macro name and any optional-argument specifiers.  Definitions inside
    comments are ignored; duplicate (name, body) pairs are dropped keeping
    the first occurrence; definitions whose braces never balance are skipped
    and tallied in ``diagnostics``.
    """
    text = _strip_comments(source)
    uses: list[MacroUse] = []
    seen: set[tuple[str, str]] = set()
    pos = 0
    while True:
        m = _DEF_START.search(text, pos)
        if m is None:
            break
        command = m.group(1)
        cursor = m.end()
        # Resume after the command token if this definition turns out malformed.
        pos = m.end()

        if command == "def":
            name_m = _CONTROL_SEQ.match(text, cursor)
            if name_m is None:
                continue
            name = name_m.group(1)
            cursor = name_m.end()
            # \def may carry a parameter text (e.g. #1#2) before the body group.
            while cursor < len(text) and text[cursor] != "{":
                if text[cursor] == "\\":
                    cursor += 2
                else:
                    cursor += 1
        else:
            # Name is either braced ({\name}) or bare (\name).
            brace_m = re.compile(r"\s*\{").match(text, cursor)
            if brace_m is not None:
                name_m = _CONTROL_SEQ.match(text, brace_m.end())
                if name_m is None:
                    continue
                name = name_m.group(1)
                close = re.compile(r"\s*\}").match(text, name_m.end())
                if close is None:
                    continue
                cursor = close.end()
            else:
                name_m = _CONTROL_SEQ.match(text, cursor)
                if name_m is None:
                    continue
                name = name_m.group(1)
                cursor = name_m.end()
            while True:
                opt = _OPT_ARG.match(text, cursor)
                if opt is None:
                    break
                cursor = opt.end()
            ws = re.compile(r"\s*").match(text, cursor)
            cursor = ws.end()

        group = _match_braced_group(text, cursor) if cursor < len(text) else None
        if group is None:
            if diagnostics is not None:
                diagnostics.skipped_unbalanced += 1
            continue
        body, after = group
        pos = after
        if (name, body) in seen:
            continue
        seen.add((name, body))
        uses.append(MacroUse(name=name, body=body))
    return uses


def trackable_macros(corpus: "Corpus", f: MacroFilter = MacroFilter()) -> set[MacroKey]:
    """Macro keys passing the tracking filter: normalized length strictly
    greater than ``f.min_body_len`` and at least ``f.min_authors`` distinct
    users across the corpus."""
    result: set[MacroKey] = set()
    for key, n_users in corpus.body_user_count.items():
        if len(key) > f.min_body_len and n_users >= f.min_authors:
            result.add(key)
    return result
