"""Per-macro inheritance graphs.

For a macro body m, the graph has one node per author who has used m, plus
one supernode per source paper (a paper on which every author is using m for
the first time).  A directed edge (u, v) records that v's first use of m was
on a paper co-authored with u, a prior user.  Edges out of source authors are
re-rooted at the supernode but remember the original teaching author, so
author-level statistics stay computable.  Because inheritance runs forward in
time the graph is always acyclic.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

from .corpus import Corpus, Month
from .extract import MacroKey

__all__ = [
    "NodeRef",
    "InheritanceEdge",
    "InheritanceGraph",
    "BfsTree",
    "build_inheritance_graph",
    "reachable_set",
    "find_seed",
    "classify_edges",
    "bfs_tree",
    "topological_order",
    "check_graph_invariants",
    "graph_to_json",
]

AUTHOR = "author"
SOURCE = "source"

INTERNAL = "internal"
TERMINAL = "terminal"


@dataclass(frozen=True)
class NodeRef:
    """Either an author node or a source-paper supernode.

    Author nodes carry ``author``.  Source nodes carry the source ``paper``
    id, its ``members`` (the source authors) and its ``date``.
    """

    kind: str
    author: str | None = None
    paper: str | None = None
    members: tuple[str, ...] | None = None
    date: Month | None = None


def author_node(a: str) -> NodeRef:
    return NodeRef(kind=AUTHOR, author=a)


def source_node(paper_id: str, members: tuple[str, ...], date: Month) -> NodeRef:
    return NodeRef(kind=SOURCE, paper=paper_id, members=members, date=date)


@dataclass
class InheritanceEdge:
    src: NodeRef
    dst: NodeRef
    via_paper: str
    date: Month
    src_author: str
    kind: str | None = None  # internal | terminal, set by classify_edges

    def triple(self) -> tuple[str, str, str]:
        """(teacher, learner, paper) regardless of supernode re-rooting."""
        return (self.src_author, self.dst.author, self.via_paper)


@dataclass
class InheritanceGraph:
    macro: MacroKey
    nodes: list[NodeRef]
    edges: list[InheritanceEdge]
    sources: list[NodeRef]
    _out: dict[NodeRef, list[InheritanceEdge]] | None = field(default=None, repr=False)
    _in: dict[NodeRef, list[InheritanceEdge]] | None = field(default=None, repr=False)
    _nodeset: set[NodeRef] | None = field(default=None, repr=False)

    def node_set(self) -> set[NodeRef]:
        if self._nodeset is None:
            self._nodeset = set(self.nodes)
        return self._nodeset

    def out_edges(self, node: NodeRef) -> list[InheritanceEdge]:
        if self._out is None:
            out: dict[NodeRef, list[InheritanceEdge]] = {n: [] for n in self.nodes}
            for e in self.edges:
                out[e.src].append(e)
            self._out = out
        return self._out.get(node, [])

    def in_edges(self, node: NodeRef) -> list[InheritanceEdge]:
        if self._in is None:
            inc: dict[NodeRef, list[InheritanceEdge]] = {n: [] for n in self.nodes}
            for e in self.edges:
                inc[e.dst].append(e)
            self._in = inc
        return self._in.get(node, [])

    def author_nodes(self) -> list[NodeRef]:
        return [n for n in self.nodes if n.kind == AUTHOR]

    def total_authors(self) -> int:
        """All authors in the graph, counting source authors individually."""
        n = 0
        for node in self.nodes:
            n += len(node.members) if node.kind == SOURCE else 1
        return n


def build_inheritance_graph(corpus: Corpus, m: MacroKey) -> InheritanceGraph:
    """Build the inheritance graph for macro body ``m``.

    Walks the papers using m in corpus order.  An author's canonical first-use
    paper is the earliest such paper in (date, id) order; any same-month
    duplicate is treated as a subsequent use.  Papers with no prior user
    become source supernodes; on every other paper, each first-time author
    receives one edge from every co-author whose first use was strictly
    earlier.
    """
    positions = corpus.body_index.get(m)
    if not positions:
        raise KeyError(f"macro not used in corpus: {m!r}")

    first_use: dict[str, int] = {}
    for pos in positions:
        for a in corpus.papers[pos].authors:
            first_use.setdefault(a, pos)

    source_positions = [
        pos
        for pos in positions
        if all(first_use[a] == pos for a in corpus.papers[pos].authors)
    ]
    node_of: dict[str, NodeRef] = {}
    sources: list[NodeRef] = []
    for pos in source_positions:
        p = corpus.papers[pos]
        node = source_node(p.id, p.authors, p.date)
        sources.append(node)
        for a in p.authors:
            node_of[a] = node
    author_order: list[str] = []
    for pos in positions:
        for a in corpus.papers[pos].authors:
            if a not in node_of:
                node = author_node(a)
                node_of[a] = node
                author_order.append(a)

    edges: list[InheritanceEdge] = []
    for pos in positions:
        p = corpus.papers[pos]
        learners = [a for a in p.authors if first_use[a] == pos]
        teachers = [a for a in p.authors if first_use[a] < pos]
        if not teachers:
            continue  # source paper (or no first-time authors at all)
        for v in learners:
            for u in teachers:
                edges.append(
                    InheritanceEdge(
                        src=node_of[u],
                        dst=node_of[v],
                        via_paper=p.id,
                        date=p.date,
                        src_author=u,
                    )
                )

    nodes = sources + [node_of[a] for a in author_order]
    graph = InheritanceGraph(macro=m, nodes=nodes, edges=edges, sources=sources)
    return classify_edges(graph)


def classify_edges(g: InheritanceGraph) -> InheritanceGraph:
    """Mark each edge internal (its learner passes the macro on) or terminal."""
    out_degree = Counter(e.src for e in g.edges)
    for e in g.edges:
        e.kind = INTERNAL if out_degree[e.dst] > 0 else TERMINAL
    return g


def reachable_set(g: InheritanceGraph, s: NodeRef) -> set[NodeRef]:
    """Author nodes reachable from ``s`` by directed paths, excluding s itself."""
    if s not in g.node_set():
        raise KeyError(f"node not in graph: {s!r}")
    seen = {s}
    queue = deque([s])
    reached: set[NodeRef] = set()
    while queue:
        node = queue.popleft()
        for e in g.out_edges(node):
            if e.dst not in seen:
                seen.add(e.dst)
                queue.append(e.dst)
                if e.dst.kind == AUTHOR:
                    reached.add(e.dst)
    reached.discard(s)
    return reached


def find_seed(g: InheritanceGraph) -> NodeRef:
    """The source supernode with the largest reachable set; ties go to the
    earlier date, then the lexicographically smaller paper id."""
    if not g.sources:
        raise ValueError(f"graph for {g.macro!r} has no source nodes")
    return min(
        g.sources,
        key=lambda s: (-len(reachable_set(g, s)), s.date.index(), s.paper),
    )


@dataclass
class BfsTree:
    root: NodeRef
    depth: dict[NodeRef, int]
    parent_edge: dict[NodeRef, InheritanceEdge | None]

    @property
    def max_depth(self) -> int:
        return max(self.depth.values())

    def nodes_at_depth(self, d: int) -> list[NodeRef]:
        return [n for n, nd in self.depth.items() if nd == d]


def bfs_tree(g: InheritanceGraph, root: NodeRef) -> BfsTree:
    """Breadth-first layers from ``root`` over directed edges.

    Every reached node gets its minimum depth.  The parent edge of a node is
    the smallest (date, paper id, teaching author) edge among those arriving
    from the previous layer, which makes the tree deterministic.
    """
    if root not in g.node_set():
        raise KeyError(f"node not in graph: {root!r}")
    depth: dict[NodeRef, int] = {root: 0}
    frontier = [root]
    d = 0
    while frontier:
        nxt: list[NodeRef] = []
        for node in frontier:
            for e in g.out_edges(node):
                if e.dst not in depth:
                    depth[e.dst] = d + 1
                    nxt.append(e.dst)
        frontier = nxt
        d += 1
    parent_edge: dict[NodeRef, InheritanceEdge | None] = {root: None}
    for node, nd in depth.items():
        if node is root:
            continue
        candidates = [e for e in g.in_edges(node) if depth.get(e.src) == nd - 1]
        parent_edge[node] = min(
            candidates, key=lambda e: (e.date.index(), e.via_paper, e.src_author)
        )
    return BfsTree(root=root, depth=depth, parent_edge=parent_edge)


def topological_order(g: InheritanceGraph) -> list[NodeRef]:
    """Kahn topological sort; raises ValueError if the graph has a cycle."""
    indeg = {n: 0 for n in g.nodes}
    for e in g.edges:
        indeg[e.dst] += 1
    queue = deque(n for n in g.nodes if indeg[n] == 0)
    order: list[NodeRef] = []
    while queue:
        node = queue.popleft()
        order.append(node)
        for e in g.out_edges(node):
            indeg[e.dst] -= 1
            if indeg[e.dst] == 0:
                queue.append(e.dst)
    if len(order) != len(g.nodes):
        raise ValueError(f"graph for {g.macro!r} contains a cycle")
    return order


def check_graph_invariants(g: InheritanceGraph) -> list[str]:
    """Structural soundness of a built graph; returns violation messages.

    A well-formed graph is acyclic, every author node has at least one
    incoming edge, supernodes have none, and no author appears both as an
    author node and inside a supernode.
    """
    problems: list[str] = []
    try:
        topological_order(g)
    except ValueError:
        problems.append("graph contains a cycle")
    indeg = Counter(e.dst for e in g.edges)
    members: set[str] = set()
    for node in g.nodes:
        if node.kind == SOURCE:
            if indeg[node]:
                problems.append(f"source {node.paper} has incoming edges")
            members.update(node.members)
    for node in g.nodes:
        if node.kind == AUTHOR:
            if not indeg[node]:
                problems.append(f"author node {node.author} has no incoming edge")
            if node.author in members:
                problems.append(f"author {node.author} is both a node and a source member")
    return problems


def graph_to_json(g: InheritanceGraph) -> dict:
    """Serialize to the stable JSON layout used by the CLI."""
    node_id = {node: i for i, node in enumerate(g.nodes)}
    nodes = []
    for node in g.nodes:
        nodes.append(
            {
                "id": node_id[node],
                "kind": node.kind,
                "author": node.author,
                "paper": node.paper,
                "members": list(node.members) if node.members is not None else None,
            }
        )
    edges = []
    for e in g.edges:
        edges.append(
            {
                "src": node_id[e.src],
                "dst": node_id[e.dst],
                "paper": e.via_paper,
                "date": str(e.date),
                "src_author": e.src_author,
                "kind": e.kind,
            }
        )
    return {"macro": g.macro, "nodes": nodes, "edges": edges}
