"""Macro-fitness prediction: sigma(k) labels and the four feature families.

A macro's fitness is the number of distinct authors who ever use its body.
Among macros reaching at least k adopters, sigma(k) is the (lower) median
fitness, which makes "will it reach sigma(k)?" a balanced prediction task.
Features only see the corpus up to the paper on which the k-th adopter
appears; labels use the full history.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .corpus import Corpus, global_experience, months_between
from .extract import MacroKey
from .logit import fit_logistic, stratified_split
from .util import nearest_rank

__all__ = [
    "FEATURE_NAMES",
    "FEATURE_SUBSETS",
    "MacroFeatureVector",
    "MacroFitnessTask",
    "sigma",
    "macro_fitness",
    "extract_features",
    "build_task",
    "build_dataset",
    "train_predict",
]

FEATURE_NAMES = (
    "papers_to_half_k",
    "papers_to_k",
    "months_to_half_k",
    "months_to_k",
    "mean_adopter_experience",
    "local_clustering_mean",
    "global_clustering",
    "body_length",
    "dollar_count",
    "non_alnum_count",
    "max_brace_depth",
)

_SPEED = FEATURE_NAMES[:4]
_STRUCTURAL = ("local_clustering_mean", "global_clustering")
_BODY = ("body_length", "dollar_count", "non_alnum_count", "max_brace_depth")

FEATURE_SUBSETS = {
    "all": FEATURE_NAMES,
    "speed-only": _SPEED,
    "non-speed": FEATURE_NAMES[4:],
    "structural-only": _STRUCTURAL,
    "body-only": _BODY,
}


@dataclass
class MacroFeatureVector:
    papers_to_half_k: int
    papers_to_k: int
    months_to_half_k: int
    months_to_k: int
    mean_adopter_experience: float
    local_clustering_mean: float
    global_clustering: float
    body_length: int
    dollar_count: int
    non_alnum_count: int
    max_brace_depth: int

    def as_array(self, subset: str = "all") -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_SUBSETS[subset]], dtype=float)


@dataclass
class MacroFitnessTask:
    k: int
    sigma_k: int
    keys: list[MacroKey]
    labels: list[bool]  # True when eventual fitness >= sigma_k


def macro_fitness(corpus: Corpus, m: MacroKey) -> int:
    """Distinct eventual adopters of the body."""
    return corpus.body_user_count.get(m, 0)


def _qualifying(corpus: Corpus, k: int, keys=None) -> list[MacroKey]:
    pool = corpus.body_user_count if keys is None else keys
    return sorted(m for m in pool if macro_fitness(corpus, m) >= k)


def sigma(corpus: Corpus, k: int, keys=None) -> tuple[int, int]:
    """(sigma_k, instance count): lower-median fitness among macros with at
    least k adopters.  ``keys`` optionally restricts the candidate bodies."""
    qualifying = _qualifying(corpus, k, keys)
    if not qualifying:
        raise ValueError(f"no macro reaches {k} adopters")
    fitnesses = sorted(macro_fitness(corpus, m) for m in qualifying)
    return nearest_rank(fitnesses, 50), len(fitnesses)


def _brace_depth(body: str) -> int:
    depth = 0
    deepest = 0
    for ch in body:
        if ch == "{":
            depth += 1
            deepest = max(deepest, depth)
        elif ch == "}":
            depth = max(depth - 1, 0)
    return deepest


def _clustering(adj: dict[str, set[str]]) -> tuple[float, float]:
    """(mean local coefficient, transitivity) of an undirected simple graph.
    Nodes with degree < 2 contribute 0 locally; 0/0 transitivity is 0."""
    local_sum = 0.0
    closed = 0
    triples = 0
    for node, nbrs in adj.items():
        deg = len(nbrs)
        if deg < 2:
            continue
        links = 0
        nbr_list = sorted(nbrs)
        for i, a in enumerate(nbr_list):
            for b in nbr_list[i + 1 :]:
                if b in adj[a]:
                    links += 1
        possible = deg * (deg - 1) // 2
        local_sum += links / possible
        closed += links  # each triangle seen once per corner
        triples += possible
    n = len(adj)
    local_mean = local_sum / n if n else 0.0
    transitivity = closed / triples if triples else 0.0
    return local_mean, transitivity


def extract_features(corpus: Corpus, m: MacroKey, k: int) -> MacroFeatureVector:
    """Features from the corpus prefix ending at the paper where the k-th
    distinct adopter appears.

    Adopters are counted in corpus order, author-list order within a paper.
    half-k is ceil(k/2).  The co-authorship graph spans the first k adopters
    and every paper up to the cutoff containing at least two of them.
    """
    positions = corpus.body_index.get(m, [])
    half_k = ceil(k / 2)
    adopters: list[str] = []
    adopter_set: set[str] = set()
    adoption_paper: dict[str, str] = {}
    first_date = None
    papers_to = {half_k: None, k: None}
    months_to = {half_k: None, k: None}
    cutoff_pos = None
    for n_papers, pos in enumerate(positions, start=1):
        paper = corpus.papers[pos]
        if first_date is None:
            first_date = paper.date
        for a in paper.authors:
            if a not in adopter_set:
                adopter_set.add(a)
                adopters.append(a)
                adoption_paper[a] = paper.id
        for target in (half_k, k):
            if papers_to[target] is None and len(adopters) >= target:
                papers_to[target] = n_papers
                months_to[target] = months_between(first_date, paper.date)
                if target == k:
                    cutoff_pos = pos
        if cutoff_pos is not None:
            break
    if cutoff_pos is None:
        raise ValueError(f"macro has only {len(adopters)} adopters, below k={k}")

    first_k = adopters[:k]
    experiences = [global_experience(corpus, a, adoption_paper[a]) for a in first_k]
    mean_exp = float(np.mean(experiences))

    in_first_k = set(first_k)
    adj: dict[str, set[str]] = {a: set() for a in first_k}
    for pos in range(cutoff_pos + 1):
        members = [a for a in corpus.papers[pos].authors if a in in_first_k]
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                adj[a].add(b)
                adj[b].add(a)
    local_mean, transitivity = _clustering(adj)

    return MacroFeatureVector(
        papers_to_half_k=papers_to[half_k],
        papers_to_k=papers_to[k],
        months_to_half_k=months_to[half_k],
        months_to_k=months_to[k],
        mean_adopter_experience=mean_exp,
        local_clustering_mean=local_mean,
        global_clustering=transitivity,
        body_length=len(m),
        dollar_count=m.count("$"),
        non_alnum_count=sum(1 for ch in m if not ch.isalnum()),
        max_brace_depth=_brace_depth(m),
    )


def build_task(corpus: Corpus, k: int, keys=None) -> MacroFitnessTask:
    """Label every macro reaching k adopters by whether it eventually reaches
    sigma(k); ties at sigma(k) count as reaching it."""
    sigma_k, _ = sigma(corpus, k, keys)
    qualifying = _qualifying(corpus, k, keys)
    labels = [macro_fitness(corpus, m) >= sigma_k for m in qualifying]
    return MacroFitnessTask(k=k, sigma_k=sigma_k, keys=qualifying, labels=labels)


def build_dataset(corpus: Corpus, k: int, keys=None) -> tuple[MacroFitnessTask, np.ndarray]:
    """Task plus the full feature matrix (columns in FEATURE_NAMES order);
    reusable across feature subsets and split seeds."""
    task = build_task(corpus, k, keys)
    X = np.array([extract_features(corpus, m, k).as_array("all") for m in task.keys])
    return task, X


def train_predict(
    corpus: Corpus,
    k: int,
    feature_subset: str = "all",
    rng_seed: int = 0,
    l2: float = 1.0,
    keys=None,
    labels_override: list[int] | None = None,
    dataset: tuple[MacroFitnessTask, np.ndarray] | None = None,
) -> float:
    """Test accuracy of logistic regression on one feature subset.

    Standardization statistics come from the training split only.
    ``labels_override`` supports permutation-null runs; ``dataset`` lets
    callers reuse one build_dataset result across subsets and seeds.
    """
    if feature_subset not in FEATURE_SUBSETS:
        raise ValueError(
            f"unknown feature subset {feature_subset!r}, expected one of {sorted(FEATURE_SUBSETS)}"
        )
    task, X_full = dataset if dataset is not None else build_dataset(corpus, k, keys)
    if len(task.keys) < 50:
        raise ValueError(f"only {len(task.keys)} labeled instances at k={k}, need 50")
    cols = [FEATURE_NAMES.index(name) for name in FEATURE_SUBSETS[feature_subset]]
    X = X_full[:, cols]
    y = np.array(labels_override if labels_override is not None else task.labels, dtype=int)
    train_idx, test_idx = stratified_split(y, test_fraction=0.2, seed=rng_seed)
    if len(set(y[train_idx])) < 2 or len(set(y[test_idx])) < 2:
        raise ValueError("degenerate single-class split")
    model = fit_logistic(X[train_idx], y[train_idx], l2=l2)
    return model.accuracy(X[test_idx], y[test_idx])
