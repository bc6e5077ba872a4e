"""Synthetic corpus generator with planted macro-transmission ground truth.

Papers are generated chronologically over a pool of authors with heavy-tailed
activity.  Macros are invented by papers and carried forward by their users:
whenever a team contains at least one carrier of a macro, the paper uses it
with the transmission probability, and every non-carrier on the paper becomes
a user.  Recorded (teacher, learner, paper) triples are exactly what a correct
inheritance reconstruction should recover when the independent-invention rate
is zero.  Nonzero rates inject adoptions with no teacher, which is precisely
the noise that breaks co-authorship attribution.

``plant_fitness_bias`` layers three optional, independently sized effects on
top: extra future papers for internally-linked pairs, activity-dependent
name-change propensities, and class-separated macro transmissibility/bodies.
"""

from __future__ import annotations

import json
import random
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass, field
from itertools import accumulate
from math import ceil
from pathlib import Path

from .corpus import Corpus, Month, Paper
from .extract import MacroFilter, MacroUse, trackable_macros
from .fitness_collab import enumerate_first_collaborations
from .inheritance import INTERNAL, build_inheritance_graph

__all__ = [
    "SynthConfig",
    "EffectSizes",
    "GroundTruth",
    "generate",
    "plant_fitness_bias",
    "reconstruction_mismatches",
    "write_ground_truth",
    "write_corpus_file",
    "PLANT_TRACK_FILTER",
]

# Planting decides internal-edge pairs with a permissive author threshold so
# moderate-size corpora still yield enough treated pairs.
PLANT_TRACK_FILTER = MacroFilter(min_body_len=20, min_authors=10)


@dataclass(frozen=True)
class SynthConfig:
    n_authors: int = 300
    n_papers: int = 2000
    months_span: int = 240
    team_size: tuple[int, int, float] = (1, 5, 2.0)  # (min, max, decay shape)
    macro_invention_rate: float = 0.03
    transmission_probability: float = 1.0
    independent_invention_rate: float = 0.0
    activity_exponent: float = 2.5
    start: Month = Month(1991, 1)
    seed: int = 0

    def __post_init__(self):
        lo, hi, shape = self.team_size
        if lo < 1 or hi < lo or hi > self.n_authors:
            raise ValueError(f"infeasible team sizes {self.team_size} for {self.n_authors} authors")
        if shape <= 0:
            raise ValueError("team size shape must be positive")
        for name in ("macro_invention_rate", "transmission_probability", "independent_invention_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {v}")
        if self.n_authors <= 0 or self.n_papers <= 0 or self.months_span <= 0:
            raise ValueError("counts must be positive")
        if self.activity_exponent <= 1.0:
            raise ValueError("activity exponent must exceed 1")


@dataclass(frozen=True)
class EffectSizes:
    """Planted effect magnitudes; all zero means a null corpus."""

    collab: float = 0.0  # extra joint papers for internal-edge pairs
    loyalty: float = 0.0  # activity-linked drop in name-change propensity
    macro: float = 0.0  # class separation of macro spread and bodies


@dataclass
class GroundTruth:
    inventions: dict[str, str] = field(default_factory=dict)  # key -> paper id
    transmissions: dict[str, list[tuple[str, str, str]]] = field(default_factory=dict)
    independent: list[tuple[str, str]] = field(default_factory=list)  # (key, paper id)
    planted: dict = field(default_factory=dict)

    def transmission_triples(self, key: str) -> list[tuple[str, str, str]]:
        return self.transmissions.get(key, [])


class _WeightedSampler:
    """O(log n) weighted sampling with a shared Random instance."""

    def __init__(self, items: list[str], weights: list[float], rng: random.Random):
        self.items = items
        self.cum = list(accumulate(weights))
        self.total = self.cum[-1]
        self.rng = rng

    def draw(self) -> str:
        return self.items[bisect_right(self.cum, self.rng.random() * self.total)]


def _team_size_sampler(cfg: SynthConfig, rng: random.Random):
    lo, hi, shape = cfg.team_size
    sizes = list(range(lo, hi + 1))
    weights = [s ** (-shape) for s in sizes]
    cum = list(accumulate(weights))
    total = cum[-1]

    def draw() -> int:
        return sizes[bisect_right(cum, rng.random() * total)]

    return draw


def _macro_body(idx: int, high_class: bool, macro_effect: float) -> str:
    body = f"\\ensuremath{{\\mathcal{{Q}}_{{{idx:05d}}}\\!\\cdot\\!\\beta}}"
    if macro_effect > 0 and high_class:
        body += "$" + "\\star" * max(1, ceil(macro_effect * 3)) + "$"
    return body


def _simulate(
    cfg: SynthConfig,
    change_propensity: dict[str, float],
    macro_effect: float,
) -> tuple[list[Paper], GroundTruth]:
    rng = random.Random(cfg.seed)
    authors = [f"a{i:05d}" for i in range(cfg.n_authors)]
    weights = [(i + 1) ** (-1.0 / (cfg.activity_exponent - 1.0)) for i in range(cfg.n_authors)]
    pick_author = _WeightedSampler(authors, weights, rng)
    pick_size = _team_size_sampler(cfg, rng)

    known: dict[str, dict[str, str]] = {a: {} for a in authors}
    past_coauthors: dict[str, list[str]] = {a: [] for a in authors}
    canonical_name: dict[str, str] = {}
    stamp_prob: dict[str, float] = {}
    macro_class: dict[str, str] = {}
    all_keys: list[str] = []
    truth = GroundTruth()
    papers: list[Paper] = []
    name_counter = Counter()
    start_idx = cfg.start.index()

    for i in range(cfg.n_papers):
        pid = f"p{i:06d}"
        month_idx = start_idx + (i * cfg.months_span) // cfg.n_papers
        date = Month(month_idx // 12, month_idx % 12 + 1)

        size = min(pick_size(), cfg.n_authors)
        focal = pick_author.draw()
        team = [focal]
        attempts = 0
        while len(team) < size:
            if past_coauthors[focal] and rng.random() < 0.5:
                cand = past_coauthors[focal][rng.randrange(len(past_coauthors[focal]))]
            else:
                cand = pick_author.draw()
            if cand not in team:
                team.append(cand)
            else:
                attempts += 1
                if attempts > 30:
                    for a in authors:
                        if a not in team:
                            team.append(a)
                            break
        for a in team:
            for b in team:
                if a != b:
                    past_coauthors[a].append(b)

        uses: list[MacroUse] = []

        carried = sorted({k for a in team for k in known[a]})
        for key in carried:
            if rng.random() >= stamp_prob[key]:
                continue
            carriers = [a for a in team if key in known[a]]
            learners = [a for a in team if key not in known[a]]
            # The first carrier in team order picks the name: canonical, or a
            # fresh one-off with their change propensity.  Fresh names never
            # repeat, so with constant propensity the observed change rate is
            # the same for every author regardless of activity.
            scribe = carriers[0]
            name = canonical_name[key]
            q = change_propensity.get(scribe, 0.0)
            if q > 0 and rng.random() < q:
                name_counter[key] += 1
                name = f"{name}v{name_counter[key]:04d}"
            for v in learners:
                for u in carriers:
                    truth.transmissions.setdefault(key, []).append((u, v, pid))
            for a in team:
                known[a][key] = canonical_name[key]
            uses.append(MacroUse(name=name, body=key))

        if rng.random() < cfg.macro_invention_rate:
            idx = len(all_keys)
            high = rng.random() < 0.5
            key = _macro_body(idx, high, macro_effect)
            name = f"mac{idx:05d}"
            canonical_name[key] = name
            macro_class[key] = "high" if high else "low"
            mult = (1.0 + 0.6 * macro_effect) if high else max(1.0 - 0.4 * macro_effect, 0.2)
            stamp_prob[key] = min(cfg.transmission_probability * mult, 1.0)
            all_keys.append(key)
            truth.inventions[key] = pid
            truth.transmissions.setdefault(key, [])
            for a in team:
                known[a][key] = name
            uses.append(MacroUse(name=name, body=key))

        if cfg.independent_invention_rate > 0 and rng.random() < cfg.independent_invention_rate:
            used_here = {u.key for u in uses}
            candidates = [k for k in all_keys if k not in used_here]
            if candidates:
                key = candidates[rng.randrange(len(candidates))]
                if any(key not in known[a] for a in team):
                    name = canonical_name[key]
                    for a in team:
                        known[a][key] = name
                    uses.append(MacroUse(name=name, body=key))
                    truth.independent.append((key, pid))

        papers.append(Paper(id=pid, date=date, authors=tuple(team), macro_uses=tuple(uses)))

    truth.planted["macro_class"] = dict(macro_class)
    return papers, truth


def generate(config: SynthConfig) -> tuple[Corpus, GroundTruth]:
    """Plain generation: no name changes, no planted effects.  Deterministic
    for a given config (seed included)."""
    papers, truth = _simulate(config, change_propensity={}, macro_effect=0.0)
    return Corpus.from_papers(papers), truth


def plant_fitness_bias(
    config: SynthConfig, effects: EffectSizes = EffectSizes()
) -> tuple[Corpus, GroundTruth]:
    """Generate a corpus with controllable planted signals.

    loyalty > 0 makes more-active authors keep macro names more consistently;
    macro > 0 separates high/low macro classes in transmissibility and body
    shape; collab > 0 appends extra macro-free joint papers for pairs whose
    first collaboration carries an internal inheritance edge.  At zero effect
    the corresponding pipeline sees no signal: name-change propensity is a
    constant, macro classes are indistinguishable, and nothing is appended.
    """
    rng = random.Random(config.seed + 0x5EED)
    base_q = 0.45
    lam = min(max(effects.loyalty, 0.0), 1.0)
    propensity = {}
    for i in range(config.n_authors):
        # rank 0 is the most active author; z runs 1 -> 0 down the ranking
        z = 1.0 - (i / max(config.n_authors - 1, 1))
        propensity[f"a{i:05d}"] = base_q * (1.0 - lam * z)
    papers, truth = _simulate(config, change_propensity=propensity, macro_effect=effects.macro)
    truth.planted["author_change_propensity"] = propensity

    boosted: list[tuple[str, str]] = []
    if effects.collab > 0:
        corpus = Corpus.from_papers(papers)
        keys = sorted(trackable_macros(corpus, PLANT_TRACK_FILTER))
        graphs = [build_inheritance_graph(corpus, k) for k in keys]
        pairs = enumerate_first_collaborations(corpus, graphs)
        end_idx = config.start.index() + config.months_span - 1
        next_id = config.n_papers
        extra_slots = max(1, round(effects.collab * 4))
        for pair in pairs:
            if pair.edge_class != INTERNAL:
                continue
            boosted.append((pair.u, pair.v))
            lo = pair.month.index()
            for _ in range(extra_slots):
                if rng.random() < 0.7:
                    m_idx = rng.randint(lo, end_idx)
                    papers.append(
                        Paper(
                            id=f"p{next_id:06d}",
                            date=Month(m_idx // 12, m_idx % 12 + 1),
                            authors=(pair.u, pair.v),
                            macro_uses=(),
                        )
                    )
                    next_id += 1
    truth.planted["boosted_pairs"] = boosted
    return Corpus.from_papers(papers), truth


def reconstruction_mismatches(corpus: Corpus, truth: GroundTruth) -> tuple[int, dict[str, int]]:
    """Compare reconstructed edge multisets with planted transmissions.

    Edges are compared as (teacher, learner, paper) triples, which supernode
    re-rooting preserves.  Returns (total mismatches, per-macro counts); zero
    means exact recovery.
    """
    per_macro: dict[str, int] = {}
    keys = sorted(set(corpus.body_index) | set(truth.transmissions))
    for key in keys:
        expected = Counter(truth.transmission_triples(key))
        if key in corpus.body_index:
            g = build_inheritance_graph(corpus, key)
            actual = Counter(e.triple() for e in g.edges)
        else:
            actual = Counter()
        diff = sum((expected - actual).values()) + sum((actual - expected).values())
        if diff:
            per_macro[key] = diff
    return sum(per_macro.values()), per_macro


def write_corpus_file(corpus: Corpus, path: str | Path) -> None:
    """Write the standard JSON Lines corpus format; stable byte-for-byte."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in corpus.papers:
            rec = {
                "id": p.id,
                "date": str(p.date),
                "authors": list(p.authors),
                "macros": [{"name": u.name, "body": u.body} for u in p.macro_uses],
            }
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")


def write_ground_truth(truth: GroundTruth, path: str | Path) -> None:
    doc = {
        "inventions": truth.inventions,
        "transmissions": {
            k: [list(t) for t in v] for k, v in sorted(truth.transmissions.items())
        },
        "independent": [list(t) for t in truth.independent],
        "planted": truth.planted,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
