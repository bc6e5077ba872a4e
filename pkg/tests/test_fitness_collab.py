import random
from collections import defaultdict

import pytest

from macrotrace.corpus import Month
from macrotrace.fitness_collab import (
    EDGE_ANY,
    NON_EDGE,
    CollabPair,
    arbitrary_vs_edge,
    enumerate_first_collaborations,
    match_and_compare,
)
from macrotrace.inheritance import INTERNAL, TERMINAL, build_inheritance_graph
from macrotrace.synth import SynthConfig, generate
from conftest import make_corpus

M = [("m", "\\macrobody{shared}")]
KEY = "\\macrobody{shared}"


def _pair(u, v, month, edge_class, future, first="pX"):
    return CollabPair(
        u=u, v=v, first_joint=first, month=Month.parse(month),
        edge_class=edge_class, future_joint_papers=future,
    )


class TestEnumerate:
    def test_pair_without_joint_papers_absent(self):
        corpus = make_corpus(
            [("P1", "1994-01", ["a"], []), ("P2", "1994-02", ["b"], [])]
        )
        assert enumerate_first_collaborations(corpus, []) == []

    def test_three_paper_chain_marks_internal(self):
        corpus = make_corpus(
            [
                ("P1", "1994-01", ["a"], M),
                ("P2", "1994-06", ["a", "b"], M),
                ("P3", "1995-01", ["b", "c"], M),
            ]
        )
        graphs = [build_inheritance_graph(corpus, KEY)]
        pairs = {(p.u, p.v): p for p in enumerate_first_collaborations(corpus, graphs)}
        assert pairs[("a", "b")].edge_class == INTERNAL
        assert pairs[("b", "c")].edge_class == TERMINAL

    def test_future_joint_paper_count(self):
        records = [("P1", "1998-03", ["a", "b"], [])]
        records += [(f"P{i}", "1999-0{}".format(i), ["a", "b"], []) for i in range(2, 5)]
        corpus = make_corpus(records)
        pairs = enumerate_first_collaborations(corpus, [])
        assert len(pairs) == 1
        assert pairs[0].first_joint == "P1"
        assert pairs[0].future_joint_papers == 3

    def test_edge_must_be_dated_at_first_joint_paper(self):
        # a and b first collaborate on a macro-free paper; the later handoff
        # does not reclassify the pair
        corpus = make_corpus(
            [
                ("P0", "1993-01", ["a", "b"], []),
                ("P1", "1994-01", ["a"], M),
                ("P2", "1994-06", ["a", "b"], M),
            ]
        )
        graphs = [build_inheritance_graph(corpus, KEY)]
        pairs = {(p.u, p.v): p for p in enumerate_first_collaborations(corpus, graphs)}
        assert pairs[("a", "b")].edge_class == NON_EDGE

    def test_internal_dominates_terminal_across_macros(self):
        m2 = [("n", "\\othermacro{Y}" + "x" * 8)]
        key2 = m2[0][1]
        corpus = make_corpus(
            [
                ("P1", "1994-01", ["a"], M + m2),
                ("P2", "1994-06", ["a", "b"], M + m2),
                ("P3", "1995-01", ["b", "c"], M),
            ]
        )
        graphs = [build_inheritance_graph(corpus, k) for k in (KEY, key2)]
        pairs = {(p.u, p.v): p for p in enumerate_first_collaborations(corpus, graphs)}
        # (a,b) is internal via KEY (b retransmits) and terminal via key2
        assert pairs[("a", "b")].edge_class == INTERNAL


class TestMatchAndCompare:
    def test_singleton_month_treatment_wins(self):
        pairs = [
            _pair("a", "b", "1998-03", INTERNAL, future=3),
            _pair("c", "d", "1998-03", NON_EDGE, future=1),
        ]
        result = match_and_compare(pairs, "internal-vs-nonedge", rng_seed=0)
        totals = result.totals()
        assert (totals.wins, totals.losses, totals.ties) == (1, 0, 0)
        assert totals.win_percentage == 100.0

    def test_equal_futures_tie_at_fifty(self):
        pairs = [
            _pair("a", "b", "1998-03", INTERNAL, future=2),
            _pair("c", "d", "1998-03", NON_EDGE, future=2),
        ]
        totals = match_and_compare(pairs, "internal-vs-nonedge", rng_seed=0).totals()
        assert totals.ties == 1
        assert totals.win_percentage == 50.0

    def test_never_matches_across_months(self):
        pairs = [
            _pair("a", "b", "1998-03", INTERNAL, future=3),
            _pair("c", "d", "1998-04", NON_EDGE, future=1),
        ]
        with pytest.raises(ValueError, match="no matchable months"):
            match_and_compare(pairs, "internal-vs-nonedge", rng_seed=0)

    def test_overlapping_authors_not_matched(self):
        pairs = [
            _pair("a", "b", "1998-03", INTERNAL, future=3),
            _pair("a", "c", "1998-03", NON_EDGE, future=1),  # shares author a
            _pair("c", "d", "1998-03", NON_EDGE, future=1),
        ]
        result = match_and_compare(pairs, "internal-vs-nonedge", rng_seed=0)
        assert result.totals().n == 1
        assert result.dropped == 0

    def test_excess_treatments_dropped_and_counted(self):
        pairs = [
            _pair("a", "b", "1998-03", INTERNAL, future=3, first="p1"),
            _pair("c", "d", "1998-03", INTERNAL, future=2, first="p2"),
            _pair("e", "f", "1998-03", NON_EDGE, future=1),
        ]
        result = match_and_compare(pairs, "internal-vs-nonedge", rng_seed=0)
        assert result.totals().n == 1
        assert result.dropped == 1

    def test_two_year_binning(self):
        pairs = [
            _pair("a", "b", "1998-03", INTERNAL, future=3),
            _pair("c", "d", "1998-03", NON_EDGE, future=1),
            _pair("e", "f", "2001-07", INTERNAL, future=0),
            _pair("g", "h", "2001-07", NON_EDGE, future=4),
        ]
        result = match_and_compare(pairs, "internal-vs-nonedge", rng_seed=0)
        assert sorted(result.bins) == [1998, 2000]
        assert result.bins[1998].wins == 1
        assert result.bins[2000].losses == 1

    def test_same_seed_reproduces_counts(self):
        rng = random.Random(8)
        pairs = []
        for i in range(300):
            month = f"19{90 + rng.randrange(8)}-{rng.randrange(1, 13):02d}"
            cls = rng.choice([INTERNAL, TERMINAL, NON_EDGE])
            pairs.append(
                _pair(f"u{i}", f"v{i}", month, cls, rng.randrange(5), first=f"p{i}")
            )
        r1 = match_and_compare(pairs, "internal-vs-nonedge", rng_seed=42)
        r2 = match_and_compare(pairs, "internal-vs-nonedge", rng_seed=42)
        assert {b: vars(c) for b, c in r1.bins.items()} == {
            b: vars(c) for b, c in r2.bins.items()
        }

    def test_unknown_setting_rejected(self):
        with pytest.raises(ValueError, match="unknown setting"):
            match_and_compare([], "upside-down")

    def test_arbitrary_vs_edge_uses_any_edge(self):
        pairs = [
            _pair("a", "b", "1998-03", TERMINAL, future=3),
            _pair("c", "d", "1998-03", NON_EDGE, future=1),
        ]
        totals = arbitrary_vs_edge(pairs, rng_seed=0).totals()
        assert totals.wins == 1


def shuffle_edge_classes_within_month(pairs, seed):
    """Permutation-null helper: permute class labels within each month."""
    rng = random.Random(seed)
    by_month = defaultdict(list)
    for i, p in enumerate(pairs):
        by_month[p.month.index()].append(i)
    out = list(pairs)
    for m in sorted(by_month):
        idx = by_month[m]
        labels = [pairs[i].edge_class for i in idx]
        rng.shuffle(labels)
        for i, lab in zip(idx, labels):
            p = pairs[i]
            out[i] = CollabPair(p.u, p.v, p.first_joint, p.month, lab, p.future_joint_papers)
    return out


class TestCalibration:
    def _corpus_pairs(self, seed):
        cfg = SynthConfig(
            seed=seed,
            n_papers=2500,
            n_authors=500,
            months_span=180,
            macro_invention_rate=0.02,
            transmission_probability=0.4,
            team_size=(2, 5, 2.0),
        )
        corpus, _ = generate(cfg)
        graphs = [build_inheritance_graph(corpus, k) for k in sorted(corpus.body_index)]
        return enumerate_first_collaborations(corpus, graphs)

    def test_label_shuffle_gives_no_signal(self):
        pairs = shuffle_edge_classes_within_month(self._corpus_pairs(71), seed=5)
        totals = match_and_compare(pairs, "edgeany-vs-nonedge", rng_seed=1).totals()
        assert totals.n >= 300
        assert abs(totals.win_percentage - 50.0) < 8.0  # wide unit-test bound

    def test_month_integrity_on_real_pairs(self):
        pairs = self._corpus_pairs(72)
        by_key = {}
        for p in pairs:
            by_key[(p.u, p.v)] = p
        result = match_and_compare(pairs, "edgeany-vs-nonedge", rng_seed=3)
        assert result.totals().n > 0
