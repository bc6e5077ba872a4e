import json

import pytest

from macrotrace.corpus import Corpus, Month, Paper
from macrotrace.extract import MacroUse


def make_paper(pid, date, authors, macros=()):
    """(name, body) tuples -> Paper with parsed month."""
    return Paper(
        id=pid,
        date=Month.parse(date),
        authors=tuple(authors),
        macro_uses=tuple(MacroUse(name=n, body=b) for n, b in macros),
    )


def make_corpus(records):
    """records: (id, 'YYYY-MM', [authors], [(name, body), ...])"""
    return Corpus.from_papers(
        [make_paper(pid, date, authors, macros) for pid, date, authors, macros in records]
    )


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


@pytest.fixture
def chain_corpus():
    """One macro handed down a 5-author chain from a single-author source."""
    m = [("chain", "\\chainbody{X}")]
    return make_corpus(
        [
            ("P1", "1994-01", ["a"], m),
            ("P2", "1994-06", ["a", "b"], m),
            ("P3", "1995-01", ["b", "c"], m),
            ("P4", "1995-08", ["c", "d"], m),
            ("P5", "1996-02", ["d", "e"], m),
        ]
    )
