import random
from collections import defaultdict

import pytest

from macrotrace.corpus import Month, months_between
from macrotrace.graph_stats import (
    cdf,
    depth_time_profile,
    edge_experience_differences,
    largest_reachable_fraction,
    width_profile,
)
from macrotrace.inheritance import (
    InheritanceEdge,
    InheritanceGraph,
    author_node,
    bfs_tree,
    build_inheritance_graph,
    find_seed,
    source_node,
)
from macrotrace.synth import SynthConfig, generate
from conftest import make_corpus

M = [("m", "\\macrobody{shared}")]
KEY = "\\macrobody{shared}"


def _edge(src, dst, paper, date, src_author=None):
    return InheritanceEdge(
        src=src,
        dst=dst,
        via_paper=paper,
        date=Month.parse(date),
        src_author=src_author or (src.author or src.members[0]),
    )


class TestLargestReachableFraction:
    def test_single_source_paper_is_zero(self):
        corpus = make_corpus([("P1", "1994-05", ["a", "b"], M)])
        g = build_inheritance_graph(corpus, KEY)
        assert largest_reachable_fraction(g) == 0.0

    def test_full_chain_coverage(self, chain_corpus):
        g = build_inheritance_graph(chain_corpus, "\\chainbody{X}")
        # 4 reachable author nodes over 5 authors total (source author included)
        assert largest_reachable_fraction(g) == pytest.approx(4 / 5)

    def test_two_components_eight_of_ten(self):
        s1 = source_node("S1", ("a",), Month(1994, 1))
        s2 = source_node("S2", ("c",), Month(1994, 2))
        bs = [author_node(f"b{i}") for i in range(8)]
        edges = [_edge(s1, bs[0], "P0", "1994-03", "a")]
        edges += [_edge(bs[i - 1], bs[i], f"P{i}", "1994-04") for i in range(1, 8)]
        g = InheritanceGraph(
            macro="t", nodes=[s1, s2] + bs, edges=edges, sources=[s1, s2]
        )
        # seed reaches the 8 chain authors; authors total 8 + 2 source members
        assert largest_reachable_fraction(g) == pytest.approx(8 / 10)

    def test_zero_authors_errors(self):
        g = InheritanceGraph(macro="t", nodes=[], edges=[], sources=[])
        with pytest.raises(ValueError):
            largest_reachable_fraction(g)


class TestCdf:
    def test_all_ties_single_step(self):
        series = cdf([1, 1, 1])
        assert series.values == [1]
        assert series.fractions == [1.0]

    def test_two_values(self):
        series = cdf([0.2, 0.4])
        assert series.values == [0.2, 0.4]
        assert series.fractions == [0.5, 1.0]

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            cdf([])

    def test_matches_quadratic_counting_oracle(self):
        rng = random.Random(3)
        values = [rng.randrange(10) for _ in range(200)]
        series = cdf(values)
        for v, f in zip(series.values, series.fractions):
            assert f == pytest.approx(sum(1 for x in values if x <= v) / len(values))

    def test_monotone_and_ends_at_one(self):
        rng = random.Random(4)
        series = cdf([rng.random() for _ in range(57)])
        assert series.fractions == sorted(series.fractions)
        assert series.fractions[-1] == pytest.approx(1.0)


class TestDepthTimeProfile:
    def test_single_child_twelve_months(self):
        corpus = make_corpus(
            [("P1", "1994-05", ["a"], M), ("P2", "1995-05", ["a", "b"], M)]
        )
        g = build_inheritance_graph(corpus, KEY)
        profiles = depth_time_profile([g])
        assert len(profiles) == 1
        assert profiles[0].group == 1
        assert profiles[0].values == [0.0, 12.0]

    def test_twenty_year_chain_reaches_240_months_at_depth_six(self):
        dates = ["1994-05", "1998-02", "2001-07", "2005-01", "2008-09", "2011-03", "2014-05"]
        authors = [f"x{i}" for i in range(7)]
        records = [("P0", dates[0], [authors[0]], M)]
        records += [
            (f"P{i}", dates[i], [authors[i - 1], authors[i]], M) for i in range(1, 7)
        ]
        g = build_inheritance_graph(make_corpus(records), KEY)
        profiles = depth_time_profile([g])
        assert profiles[0].group == 6
        assert profiles[0].values[0] == 0.0
        assert profiles[0].values[6] == pytest.approx(240.0)

    def test_matches_independent_rewalk(self):
        corpus, _ = generate(SynthConfig(seed=61, n_papers=500, n_authors=120, transmission_probability=0.7))
        graphs = [build_inheritance_graph(corpus, k) for k in sorted(corpus.body_index)]
        profiles = {p.group: p.values for p in depth_time_profile(graphs)}
        # independent recomputation straight from edges and dates
        sums = defaultdict(float)
        counts = defaultdict(int)
        for g in graphs:
            seed = find_seed(g)
            depth = _oracle_depths(g, seed)
            group = max(depth.values())
            first_use_date = {}
            for e in g.edges:
                first_use_date[e.dst] = e.date
            for node, d in depth.items():
                months = 0 if node == seed else months_between(seed.date, first_use_date[node])
                sums[(group, d)] += months
                counts[(group, d)] += 1
        for (group, d), total in sums.items():
            assert profiles[group][d] == pytest.approx(total / counts[(group, d)])


def _oracle_depths(g, root):
    """Bellman-Ford relaxation, independent of bfs_tree."""
    INF = float("inf")
    dist = {n: INF for n in g.nodes}
    dist[root] = 0
    for _ in range(len(g.nodes)):
        changed = False
        for e in g.edges:
            if dist[e.src] + 1 < dist[e.dst]:
                dist[e.dst] = dist[e.src] + 1
                changed = True
        if not changed:
            break
    return {n: d for n, d in dist.items() if d < INF}


class TestWidthProfile:
    def test_chain_width_one_everywhere(self, chain_corpus):
        g = build_inheritance_graph(chain_corpus, "\\chainbody{X}")
        profiles = width_profile([g])
        assert profiles[0].values == [1.0, 1.0, 1.0, 1.0, 1.0]

    def test_star_widths(self):
        records = [("P0", "1994-01", ["h"], M)]
        records += [(f"P{i}", "1994-06", ["h", f"leaf{i}"], M) for i in range(1, 5)]
        g = build_inheritance_graph(make_corpus(records), KEY)
        profiles = width_profile([g])
        assert profiles[0].values == [1.0, 4.0]

    @pytest.mark.parametrize("statistic", ["mean", "median"])
    def test_matches_naive_per_tree_counts(self, statistic):
        corpus, _ = generate(SynthConfig(seed=62, n_papers=400, n_authors=100, transmission_probability=0.7))
        graphs = [build_inheritance_graph(corpus, k) for k in sorted(corpus.body_index)]
        profiles = {p.group: p.values for p in width_profile(graphs, statistic=statistic)}
        naive = defaultdict(list)
        for g in graphs:
            seed = find_seed(g)
            depth = _oracle_depths(g, seed)
            group = max(depth.values())
            for d in range(group + 1):
                naive[(group, d)].append(sum(1 for v in depth.values() if v == d))
        import statistics as st

        agg = st.mean if statistic == "mean" else st.median
        for (group, d), widths in naive.items():
            assert profiles[group][d] == pytest.approx(float(agg(widths)))

    def test_unknown_statistic_rejected(self):
        with pytest.raises(ValueError):
            width_profile([], statistic="mode")


class TestEdgeExperienceDifferences:
    def test_teacher_five_learner_two(self):
        records = [(f"T{i}", "1990-0" + str(i + 1), ["t"], []) for i in range(4)]
        records += [("TM", "1991-01", ["t"], M)]
        records += [("L1", "1991-02", ["l"], []), ("L2", "1991-03", ["l"], [])]
        records += [("P*", "1992-01", ["t", "l"], M)]
        corpus = make_corpus(records)
        g = build_inheritance_graph(corpus, KEY)
        series = edge_experience_differences([g], corpus)
        assert series.values == [3]  # 5 prior papers minus 2

    def test_negative_difference_admitted(self):
        records = [("TM", "1991-01", ["t"], M)]
        records += [(f"L{i}", "1991-0{}".format(i + 2), ["l"], []) for i in range(3)]
        records += [("P*", "1992-01", ["t", "l"], M)]
        corpus = make_corpus(records)
        series = edge_experience_differences(
            [build_inheritance_graph(corpus, KEY)], corpus
        )
        assert series.values == [-2]  # teacher 1 prior paper, learner 3

    def test_median_positive_on_transmission_biased_corpus(self):
        corpus, _ = generate(
            SynthConfig(seed=63, n_papers=1200, n_authors=250, transmission_probability=0.8)
        )
        graphs = [build_inheritance_graph(corpus, k) for k in sorted(corpus.body_index)]
        series = edge_experience_differences(graphs, corpus)
        assert series.median() > 0
