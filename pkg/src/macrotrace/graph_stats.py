"""Descriptive statistics over a collection of inheritance graphs: seed
coverage CDFs, depth/time and width profiles of the seed BFS trees, and the
teacher-learner experience gap distribution.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

from .corpus import Corpus, months_between, global_experience
from .inheritance import InheritanceGraph, bfs_tree, find_seed, reachable_set

__all__ = [
    "CdfSeries",
    "DepthProfile",
    "largest_reachable_fraction",
    "cdf",
    "depth_time_profile",
    "width_profile",
    "edge_experience_differences",
]


@dataclass
class CdfSeries:
    """Empirical CDF: unique sorted values with tie-stacked cumulative fractions."""

    values: list[float]
    fractions: list[float]

    def median(self) -> float:
        for v, f in zip(self.values, self.fractions):
            if f >= 0.5:
                return v
        return self.values[-1]


def cdf(values) -> CdfSeries:
    """Empirical CDF of a non-empty sample; ties are stacked on one step."""
    vals = sorted(values)
    n = len(vals)
    if n == 0:
        raise ValueError("cannot build a CDF from an empty sample")
    out_v: list[float] = []
    out_f: list[float] = []
    for i, v in enumerate(vals):
        if i + 1 < n and vals[i + 1] == v:
            continue
        out_v.append(v)
        out_f.append((i + 1) / n)
    return CdfSeries(values=out_v, fractions=out_f)


def largest_reachable_fraction(g: InheritanceGraph) -> float:
    """Seed coverage: |reachable set of the seed| over the number of authors
    in the graph (source authors counted individually)."""
    total = g.total_authors()
    if total == 0:
        raise ValueError("graph has no authors")
    seed = find_seed(g)
    return len(reachable_set(g, seed)) / total


@dataclass
class DepthProfile:
    """Per-depth values for trees grouped by their maximum BFS depth.

    ``values[d]`` is the statistic at depth d; depths are contiguous from 0
    to ``group``.
    """

    group: int
    values: list[float]


def _seed_trees(graphs):
    for g in graphs:
        seed = find_seed(g)
        yield g, seed, bfs_tree(g, seed)


def depth_time_profile(graphs) -> list[DepthProfile]:
    """Mean months from the seed paper to first use at each depth, with trees
    grouped by their maximum depth.  Depth 0 is the seed itself, so 0 months."""
    sums: dict[int, list[float]] = {}
    counts: dict[int, list[int]] = {}
    for g, seed, tree in _seed_trees(graphs):
        group = tree.max_depth
        if group not in sums:
            sums[group] = [0.0] * (group + 1)
            counts[group] = [0] * (group + 1)
        for node, d in tree.depth.items():
            if node is tree.root or tree.parent_edge[node] is None:
                months = 0
            else:
                months = months_between(seed.date, tree.parent_edge[node].date)
            sums[group][d] += months
            counts[group][d] += 1
    profiles = []
    for group in sorted(sums):
        values = [s / c for s, c in zip(sums[group], counts[group])]
        profiles.append(DepthProfile(group=group, values=values))
    return profiles


def width_profile(graphs, statistic: str = "median") -> list[DepthProfile]:
    """Number of nodes at each depth of the seed tree, grouped by maximum
    depth; ``statistic`` picks mean or median across the trees of a group."""
    if statistic not in ("mean", "median"):
        raise ValueError(f"unknown statistic {statistic!r}")
    widths: dict[int, list[list[int]]] = {}
    for g, seed, tree in _seed_trees(graphs):
        group = tree.max_depth
        per_depth = [0] * (group + 1)
        for node, d in tree.depth.items():
            per_depth[d] += 1
        widths.setdefault(group, []).append(per_depth)
    profiles = []
    agg = statistics.mean if statistic == "mean" else statistics.median
    for group in sorted(widths):
        values = [
            float(agg([tree_widths[d] for tree_widths in widths[group]]))
            for d in range(group + 1)
        ]
        profiles.append(DepthProfile(group=group, values=values))
    return profiles


def edge_experience_differences(graphs, corpus: Corpus) -> CdfSeries:
    """CDF of teacher-minus-learner global experience over every edge of
    every graph, both measured at the transmitting paper.  Negative values
    are possible: learners can be globally more experienced than teachers."""
    diffs: list[int] = []
    for g in graphs:
        for e in g.edges:
            diffs.append(
                global_experience(corpus, e.src_author, e.via_paper)
                - global_experience(corpus, e.dst.author, e.via_paper)
            )
    return cdf(diffs)
