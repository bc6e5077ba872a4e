"""Name-change behavior and author-fitness prediction.

An author "changes the name" of a macro on a paper when the name differs from
the one they used the previous time the same body appeared in their papers.
Pooling those events over an author group and a macro set gives the
name-change probability curve f(x) against the use index x.  The prediction
task splits authors into low/high fitness classes at the 20th/80th
percentiles of total paper count and asks whether prefix features computed
from an author's first few papers can tell the classes apart.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .extract import MacroKey
from .logit import fit_logistic, stratified_split
from .util import nearest_rank

__all__ = [
    "MACRO_SETS",
    "FEATURES",
    "EARLY_LIFE_PAPERS",
    "X_MAX",
    "WIDE_SPREAD_MIN",
    "NARROW_SPREAD_RANGE",
    "MacroSetSpec",
    "NameChangeCurve",
    "FitnessClassTask",
    "name_change_events",
    "name_change_curve",
    "percentile_thresholds",
    "build_fitness_classes",
    "author_prefix_feature",
    "predict_author_fitness",
]

EARLY_LIFE_PAPERS = 40
X_MAX = 40
WIDE_SPREAD_MIN = 251  # "more than 250 authors"
NARROW_SPREAD_RANGE = (20, 250)

MACRO_SETS = ("all", "wide-spread", "narrow-spread")
FEATURES = ("name-change-rate", "coauthor-count", "total-macro-uses", "distinct-bodies")


@dataclass(frozen=True)
class MacroSetSpec:
    """Which macro bodies to pool events over, by distinct-user count.

    The spread thresholds apply to raw usage counts, independent of the
    tracking filter used elsewhere.
    """

    kind: str = "all"

    def __post_init__(self):
        if self.kind not in MACRO_SETS:
            raise ValueError(f"unknown macro set {self.kind!r}")

    def contains(self, corpus: Corpus, key: MacroKey) -> bool:
        if self.kind == "all":
            return True
        n = corpus.body_user_count.get(key, 0)
        if self.kind == "wide-spread":
            return n >= WIDE_SPREAD_MIN
        lo, hi = NARROW_SPREAD_RANGE
        return lo <= n <= hi


@dataclass
class NameChangeCurve:
    theta: int
    macro_set: str
    life: str  # "full" | "early"
    points: dict[int, float]  # use index x -> change probability
    n_events: dict[int, int]


@dataclass
class FitnessClassTask:
    theta: int
    low_threshold: int
    high_threshold: int
    low_authors: list[str]
    high_authors: list[str]


def _paper_name_for(paper, key: MacroKey) -> str | None:
    """Name under which ``key`` appears on a paper (first occurrence wins)."""
    for use in paper.macro_uses:
        if use.key == key:
            return use.name
    return None


def name_change_events(corpus: Corpus, a: str, m: MacroKey) -> list[tuple[int, bool]]:
    """(use index, changed) for the author's chronological uses of body m.

    The first use has no predecessor and emits nothing; authors who never
    used m give an empty list.
    """
    positions = corpus.author_index.get(a, [])
    author_set = set(positions)
    names: list[str] = []
    for pos in corpus.body_index.get(m, []):
        if pos in author_set:
            names.append(_paper_name_for(corpus.papers[pos], m))
    return [(x, names[x - 1] != names[x - 2]) for x in range(2, len(names) + 1)]


def _author_name_walk(corpus: Corpus, a: str):
    """Yield (key, use_index, paper_position, changed) for every macro use of
    the author beyond the first use of each body, in one corpus pass."""
    last_name: dict[MacroKey, str] = {}
    use_count: dict[MacroKey, int] = defaultdict(int)
    for pos in corpus.author_index.get(a, []):
        paper = corpus.papers[pos]
        seen_here: set[MacroKey] = set()
        for use in paper.macro_uses:
            if use.key in seen_here:
                continue  # one observation per (paper, body)
            seen_here.add(use.key)
            use_count[use.key] += 1
            x = use_count[use.key]
            if x >= 2:
                yield use.key, x, pos, use.name != last_name[use.key]
            last_name[use.key] = use.name


def name_change_curve(
    corpus: Corpus,
    theta: int,
    macro_set: MacroSetSpec = MacroSetSpec("all"),
    life: str = "full",
) -> NameChangeCurve:
    """Pool name-change events over authors with more than ``theta`` papers.

    life="early" keeps only uses that fall within the author's first 40
    papers.  Points cover use indices 2..40; indices with no events are
    omitted.
    """
    if life not in ("full", "early"):
        raise ValueError(f"unknown life setting {life!r}")
    authors = [a for a, ps in corpus.author_index.items() if len(ps) > theta]
    if not authors:
        raise ValueError(f"no authors with more than {theta} papers")
    changes: dict[int, int] = defaultdict(int)
    events: dict[int, int] = defaultdict(int)
    for a in sorted(authors):
        positions = corpus.author_index[a]
        early_cut = (
            positions[EARLY_LIFE_PAPERS - 1] if len(positions) >= EARLY_LIFE_PAPERS else None
        )
        for key, x, pos, changed in _author_name_walk(corpus, a):
            if x > X_MAX:
                continue
            if life == "early" and early_cut is not None and pos > early_cut:
                continue
            if not macro_set.contains(corpus, key):
                continue
            events[x] += 1
            if changed:
                changes[x] += 1
    points = {x: changes[x] / events[x] for x in sorted(events)}
    return NameChangeCurve(
        theta=theta,
        macro_set=macro_set.kind,
        life=life,
        points=points,
        n_events={x: events[x] for x in sorted(events)},
    )


def percentile_thresholds(corpus: Corpus, theta: int) -> tuple[int, int]:
    """Nearest-rank 20th/80th percentiles of total paper count among authors
    with at least ``theta`` papers."""
    counts = sorted(
        len(ps) for ps in corpus.author_index.values() if len(ps) >= theta
    )
    if len(counts) < 5:
        raise ValueError(
            f"need at least 5 authors with >= {theta} papers, found {len(counts)}"
        )
    return nearest_rank(counts, 20), nearest_rank(counts, 80)


def build_fitness_classes(corpus: Corpus, theta: int) -> FitnessClassTask:
    """Low/high fitness author classes: strictly below the 20th percentile or
    strictly above the 80th; boundary authors are discarded."""
    p20, p80 = percentile_thresholds(corpus, theta)
    low, high = [], []
    for a in sorted(corpus.author_index):
        n = len(corpus.author_index[a])
        if n < theta:
            continue
        if n < p20:
            low.append(a)
        elif n > p80:
            high.append(a)
    return FitnessClassTask(
        theta=theta,
        low_threshold=p20,
        high_threshold=p80,
        low_authors=low,
        high_authors=high,
    )


def author_prefix_feature(corpus: Corpus, a: str, theta: int, feature: str) -> float:
    """A single predictor computed from the author's first ``theta`` papers only."""
    if feature not in FEATURES:
        raise ValueError(f"unknown feature {feature!r}, expected one of {FEATURES}")
    positions = corpus.author_index.get(a)
    if not positions:
        raise KeyError(f"unknown author {a!r}")
    prefix = positions[:theta]
    cutoff = prefix[-1]
    if feature == "name-change-rate":
        n_events = 0
        n_changes = 0
        for key, x, pos, changed in _author_name_walk(corpus, a):
            if pos > cutoff:
                break
            n_events += 1
            n_changes += int(changed)
        return n_changes / n_events if n_events else 0.0
    if feature == "coauthor-count":
        coauthors = set()
        for pos in prefix:
            coauthors.update(corpus.papers[pos].authors)
        coauthors.discard(a)
        return float(len(coauthors))
    if feature == "total-macro-uses":
        return float(sum(len(corpus.papers[pos].macro_uses) for pos in prefix))
    # distinct-bodies
    bodies = set()
    for pos in prefix:
        bodies.update(use.key for use in corpus.papers[pos].macro_uses)
    return float(len(bodies))


def predict_author_fitness(
    corpus: Corpus,
    theta: int,
    feature: str = "name-change-rate",
    rng_seed: int = 0,
    l2: float = 1.0,
    labels_override: dict[str, int] | None = None,
) -> float:
    """Test accuracy of a single-feature logistic classifier separating the
    low/high fitness classes.

    Integer ties at the percentile cutoffs can leave the classes uneven, so
    the larger class is downsampled (seeded) before the split; that keeps the
    50% baseline exact.  ``labels_override`` swaps in externally shuffled
    labels for permutation-null checks without touching features.
    """
    task = build_fitness_classes(corpus, theta)
    if len(task.low_authors) < 10 or len(task.high_authors) < 10:
        raise ValueError(
            f"classes too small at theta={theta}: "
            f"{len(task.low_authors)} low / {len(task.high_authors)} high (need 10 each)"
        )
    authors = task.low_authors + task.high_authors
    y = [0] * len(task.low_authors) + [1] * len(task.high_authors)
    if labels_override is not None:
        y = [labels_override[a] for a in authors]
    rng = random.Random(rng_seed)
    by_class = {0: [], 1: []}
    for a, label in zip(authors, y):
        by_class[label].append(a)
    n_keep = min(len(by_class[0]), len(by_class[1]))
    balanced: list[tuple[str, int]] = []
    for label in (0, 1):
        members = by_class[label]
        balanced.extend((a, label) for a in sorted(rng.sample(members, n_keep)))
    X = np.array(
        [[author_prefix_feature(corpus, a, theta, feature)] for a, _ in balanced]
    )
    y = np.array([label for _, label in balanced])
    train_idx, test_idx = stratified_split(y, test_fraction=0.2, seed=rng_seed)
    model = fit_logistic(X[train_idx], y[train_idx], l2=l2)
    return model.accuracy(X[test_idx], y[test_idx])
