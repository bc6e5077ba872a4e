"""Command line front end.

Subcommands cover the whole pipeline: extract a macro inventory, build
inheritance graphs, compute diffusion statistics, run the three fitness
analyses, generate synthetic corpora, and verify reconstruction against
planted ground truth.  All outputs are plain CSV/JSON written under --out,
and every randomized step takes --seed, so re-running a subcommand with the
same inputs produces byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import fitness_author, fitness_collab, fitness_macro, graph_stats
from .corpus import Corpus, CorpusLoadError, load_corpus
from .extract import MacroFilter, trackable_macros
from .inheritance import (
    build_inheritance_graph,
    check_graph_invariants,
    find_seed,
    graph_to_json,
    reachable_set,
)
from .synth import (
    EffectSizes,
    SynthConfig,
    generate,
    plant_fitness_bias,
    reconstruction_mismatches,
    write_corpus_file,
    write_ground_truth,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_EMPTY = 4

JOBS_ENV = "MACROTRACE_JOBS"


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code = code
        self.kind = kind


def _fail_input(message: str) -> CliError:
    return CliError(EXIT_INPUT, "input", message)


def _fail_empty(message: str) -> CliError:
    return CliError(EXIT_EMPTY, "empty", message)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _load(args) -> Corpus:
    try:
        return load_corpus(args.corpus, mode=args.mode)
    except FileNotFoundError:
        raise _fail_input(f"corpus file not found: {args.corpus}") from None
    except CorpusLoadError as exc:
        raise _fail_input(str(exc)) from None


def _filter(args) -> MacroFilter:
    return MacroFilter(min_body_len=args.min_body_len, min_authors=args.min_authors)


_WORKER_CORPUS: Corpus | None = None


def _init_worker(corpus: Corpus) -> None:
    global _WORKER_CORPUS
    _WORKER_CORPUS = corpus


def _worker_build(key: str):
    return build_inheritance_graph(_WORKER_CORPUS, key)


def _resolve_jobs(args) -> int:
    env = os.environ.get(JOBS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise _fail_input(f"{JOBS_ENV} must be an integer, got {env!r}") from None
    return max(1, getattr(args, "jobs", 1))


def _build_graphs(corpus: Corpus, keys: list[str], jobs: int):
    """Build graphs for sorted keys; worker results merge in key order, so the
    output is identical whatever the job count."""
    keys = sorted(keys)
    if jobs <= 1 or len(keys) < 4:
        return [build_inheritance_graph(corpus, k) for k in keys]
    with ProcessPoolExecutor(
        max_workers=jobs, initializer=_init_worker, initargs=(corpus,)
    ) as ex:
        return list(ex.map(_worker_build, keys, chunksize=max(1, len(keys) // (4 * jobs))))


def _tracked_graphs(args, corpus: Corpus):
    keys = trackable_macros(corpus, _filter(args))
    if not keys:
        raise _fail_empty("no graphs: no macro passes the tracking filter")
    return _build_graphs(corpus, keys, _resolve_jobs(args))


def _key_hash(key: str) -> str:
    return hashlib.sha1(key.encode("utf-8")).hexdigest()[:12]


# ---------------------------------------------------------------- subcommands


def _cmd_extract(args, out: Path) -> None:
    corpus = _load(args)
    f = _filter(args)
    tracked = trackable_macros(corpus, f)
    rows = []
    for key in sorted(corpus.body_index):
        rows.append(
            [
                key,
                len(key),
                len(corpus.body_index[key]),
                corpus.body_user_count[key],
                int(key in tracked),
            ]
        )
    _write_csv(out / "macros.csv", ["body", "length", "n_papers", "n_authors", "trackable"], rows)
    if corpus.extract_skipped:
        print(f"skipped {corpus.extract_skipped} definitions with unbalanced braces")
    print(f"{len(rows)} distinct macro bodies, {len(tracked)} trackable")


def _cmd_build_graphs(args, out: Path) -> None:
    corpus = _load(args)
    graphs = _tracked_graphs(args, corpus)
    graph_dir = out / "graphs"
    graph_dir.mkdir(exist_ok=True)
    rows = []
    for g in graphs:
        digest = _key_hash(g.macro)
        with open(graph_dir / f"{digest}.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(graph_to_json(g), fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")
        seed = find_seed(g)
        rows.append(
            [
                g.macro,
                digest,
                len(g.author_nodes()),
                len(g.sources),
                len(g.edges),
                seed.paper,
                f"{graph_stats.largest_reachable_fraction(g):.6f}",
            ]
        )
    _write_csv(
        out / "graphs_summary.csv",
        ["body", "hash", "n_author_nodes", "n_sources", "n_edges", "seed_paper", "seed_fraction"],
        rows,
    )
    print(f"built {len(graphs)} inheritance graphs")


def _cmd_stats(args, out: Path) -> None:
    corpus = _load(args)
    graphs = _tracked_graphs(args, corpus)
    fractions = [graph_stats.largest_reachable_fraction(g) for g in graphs]
    reach = graph_stats.cdf(fractions)
    _write_csv(
        out / "reach_cdf.csv",
        ["value", "cum_fraction"],
        [[f"{v:.6f}", f"{f:.6f}"] for v, f in zip(reach.values, reach.fractions)],
    )
    times = graph_stats.depth_time_profile(graphs)
    widths = graph_stats.width_profile(graphs, statistic=args.width_stat)
    width_by_group = {p.group: p.values for p in widths}
    rows = []
    for profile in times:
        for depth, months in enumerate(profile.values):
            rows.append(
                [
                    profile.group,
                    depth,
                    f"{months:.4f}",
                    f"{width_by_group[profile.group][depth]:.4f}",
                ]
            )
    _write_csv(out / "depth_profile.csv", ["group", "depth", "mean_months", "width_stat"], rows)
    diffs = graph_stats.edge_experience_differences(graphs, corpus)
    _write_csv(
        out / "experience_diff_cdf.csv",
        ["value", "cum_fraction"],
        [[v, f"{f:.6f}"] for v, f in zip(diffs.values, diffs.fractions)],
    )
    print(f"stats over {len(graphs)} graphs written")


def _cmd_collab_fitness(args, out: Path) -> None:
    corpus = _load(args)
    graphs = _tracked_graphs(args, corpus)
    pairs = fitness_collab.enumerate_first_collaborations(corpus, graphs)
    rows = []
    ran = 0
    for setting in sorted(fitness_collab.SETTINGS):
        try:
            comparison = fitness_collab.match_and_compare(pairs, setting, rng_seed=args.seed)
        except ValueError as exc:
            print(f"skipping {setting}: {exc}", file=sys.stderr)
            continue
        ran += 1
        for bin_start in sorted(comparison.bins):
            b = comparison.bins[bin_start]
            rows.append(
                [setting, bin_start, b.n, b.wins, b.ties, f"{b.win_percentage:.2f}"]
            )
    if not ran:
        raise _fail_empty("no setting produced any matched pairs")
    _write_csv(
        out / "collab_fitness.csv",
        ["setting", "bin_start_year", "n_pairs", "wins", "ties", "win_percentage"],
        rows,
    )
    print(f"matched comparisons for {ran} settings over {len(pairs)} first collaborations")


def _cmd_author_fitness(args, out: Path) -> None:
    corpus = _load(args)
    curve_rows = []
    task_rows = []
    for theta in args.theta:
        for set_kind in fitness_author.MACRO_SETS:
            for life in ("full", "early"):
                try:
                    curve = fitness_author.name_change_curve(
                        corpus, theta, fitness_author.MacroSetSpec(set_kind), life
                    )
                except ValueError as exc:
                    print(f"skipping curve theta={theta} {set_kind}/{life}: {exc}", file=sys.stderr)
                    continue
                for x in sorted(curve.points):
                    curve_rows.append(
                        [theta, set_kind, life, x, f"{curve.points[x]:.6f}", curve.n_events[x]]
                    )
        for feature in args.features:
            try:
                task = fitness_author.build_fitness_classes(corpus, theta)
                acc = fitness_author.predict_author_fitness(
                    corpus, theta, feature, rng_seed=args.seed
                )
            except ValueError as exc:
                print(f"skipping task theta={theta} {feature}: {exc}", file=sys.stderr)
                continue
            task_rows.append(
                [
                    theta,
                    feature,
                    f"{acc:.4f}",
                    len(task.low_authors),
                    len(task.high_authors),
                ]
            )
    if not curve_rows and not task_rows:
        raise _fail_empty("no author-fitness output: every theta setting was skipped")
    _write_csv(
        out / "name_change_curves.csv",
        ["theta", "macro_set", "life", "x", "f", "n_events"],
        curve_rows,
    )
    _write_csv(
        out / "author_fitness.csv",
        ["theta", "feature", "accuracy", "n_low", "n_high"],
        task_rows,
    )
    print(f"{len(curve_rows)} curve points, {len(task_rows)} task results")


def _cmd_macro_fitness(args, out: Path) -> None:
    corpus = _load(args)
    keys = trackable_macros(corpus, _filter(args))
    if not keys:
        raise _fail_empty("no macro passes the tracking filter")
    sigma_rows = []
    result_rows = []
    for k in args.k:
        try:
            sigma_k, n_instances = fitness_macro.sigma(corpus, k, keys)
            dataset = fitness_macro.build_dataset(corpus, k, keys)
        except ValueError as exc:
            print(f"skipping k={k}: {exc}", file=sys.stderr)
            continue
        sigma_rows.append([k, sigma_k, n_instances])
        for subset in args.feature_subsets:
            try:
                acc = fitness_macro.train_predict(
                    corpus, k, subset, rng_seed=args.seed, keys=keys, dataset=dataset
                )
            except ValueError as exc:
                print(f"skipping k={k} {subset}: {exc}", file=sys.stderr)
                continue
            result_rows.append([k, subset, args.seed, f"{acc:.4f}", n_instances])
    if not sigma_rows:
        raise _fail_empty("no k value produced instances")
    _write_csv(out / "sigma_table.csv", ["k", "sigma", "instances"], sigma_rows)
    _write_csv(
        out / "macro_fitness.csv",
        ["k", "feature_subset", "seed", "accuracy", "n_instances"],
        result_rows,
    )
    print(f"sigma rows for {len(sigma_rows)} k values, {len(result_rows)} model runs")


def _synth_config(args) -> SynthConfig:
    try:
        return SynthConfig(
            n_authors=args.n_authors,
            n_papers=args.n_papers,
            months_span=args.months_span,
            team_size=(args.team_min, args.team_max, args.team_shape),
            macro_invention_rate=args.invention_rate,
            transmission_probability=args.p_transmit,
            independent_invention_rate=args.epsilon,
            seed=args.seed,
        )
    except ValueError as exc:
        raise _fail_input(str(exc)) from None


def _cmd_synth(args, out: Path) -> None:
    config = _synth_config(args)
    effects = EffectSizes(
        collab=args.effect_collab, loyalty=args.effect_loyalty, macro=args.effect_macro
    )
    if effects == EffectSizes():
        corpus, truth = generate(config)
    else:
        corpus, truth = plant_fitness_bias(config, effects)
    write_corpus_file(corpus, out / "corpus.jsonl")
    write_ground_truth(truth, out / "ground_truth.json")
    print(f"{len(corpus.papers)} papers, {len(corpus.body_index)} macro bodies")


def _cmd_verify(args, out: Path) -> None:
    total_mismatches = 0
    total_violations = 0
    report = {"corpora": []}
    for j in range(args.corpora):
        config = SynthConfig(
            n_authors=args.n_authors,
            n_papers=args.n_papers,
            months_span=args.months_span,
            macro_invention_rate=args.invention_rate,
            transmission_probability=args.p_transmit,
            independent_invention_rate=args.epsilon,
            seed=args.seed + j,
        )
        corpus, truth = generate(config)
        mismatches, per_macro = reconstruction_mismatches(corpus, truth)
        violations = []
        for key in sorted(corpus.body_index):
            g = build_inheritance_graph(corpus, key)
            violations.extend(check_graph_invariants(g))
        total_mismatches += mismatches
        total_violations += len(violations)
        report["corpora"].append(
            {
                "seed": config.seed,
                "papers": len(corpus.papers),
                "macros": len(corpus.body_index),
                "mismatched_edges": mismatches,
                "mismatched_macros": per_macro,
                "invariant_violations": violations,
            }
        )
    report["total_mismatched_edges"] = total_mismatches
    report["total_invariant_violations"] = total_violations
    with open(out / "verify_report.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
        fh.write("\n")
    print(f"{total_mismatches} mismatched edges")
    print(f"{total_violations} invariant violations")
    if total_mismatches or total_violations:
        raise CliError(EXIT_FAILURE, "verify", "reconstruction differs from planted ground truth")


# --------------------------------------------------------------------- parser


def _add_corpus_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", required=True, help="JSON Lines corpus file")
    p.add_argument(
        "--mode",
        choices=("pre-extracted", "raw-latex"),
        default="pre-extracted",
        help="corpus record format",
    )


def _add_filter_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--min-body-len", type=int, default=20, help="track bodies strictly longer")
    p.add_argument("--min-authors", type=int, default=30, help="track bodies with at least this many users")


def _add_jobs_option(p: argparse.ArgumentParser) -> None:
    p.add_argument("--jobs", type=int, default=1, help=f"worker processes (env {JOBS_ENV} overrides)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="macrotrace",
        description="Trace macro adoption through co-authorship and analyze its predictive value.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="macro inventory with tracking flags")
    _add_corpus_options(p)
    _add_filter_options(p)

    p = sub.add_parser("build-graphs", help="per-macro inheritance graph JSON + summary")
    _add_corpus_options(p)
    _add_filter_options(p)
    _add_jobs_option(p)

    p = sub.add_parser("stats", help="seed coverage CDF, depth/width profiles, experience gaps")
    _add_corpus_options(p)
    _add_filter_options(p)
    _add_jobs_option(p)
    p.add_argument("--width-stat", choices=("median", "mean"), default="median")

    p = sub.add_parser("collab-fitness", help="matched-pair collaboration longevity comparisons")
    _add_corpus_options(p)
    _add_filter_options(p)
    _add_jobs_option(p)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("author-fitness", help="name-change curves and author fitness prediction")
    _add_corpus_options(p)
    p.add_argument("--theta", type=int, nargs="+", default=[10, 20, 30, 40, 50])
    p.add_argument(
        "--features",
        nargs="+",
        choices=fitness_author.FEATURES,
        default=list(fitness_author.FEATURES),
    )
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("macro-fitness", help="sigma(k) table and cascade-size prediction")
    _add_corpus_options(p)
    _add_filter_options(p)
    p.add_argument("--k", type=int, nargs="+", default=[40])
    p.add_argument(
        "--feature-subsets",
        nargs="+",
        choices=sorted(fitness_macro.FEATURE_SUBSETS),
        default=sorted(fitness_macro.FEATURE_SUBSETS),
    )
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-authors", type=int, default=300)
    p.add_argument("--n-papers", type=int, default=2000)
    p.add_argument("--months-span", type=int, default=240)
    p.add_argument("--team-min", type=int, default=1)
    p.add_argument("--team-max", type=int, default=5)
    p.add_argument("--team-shape", type=float, default=2.0)
    p.add_argument("--invention-rate", type=float, default=0.03)
    p.add_argument("--p-transmit", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--effect-collab", type=float, default=0.0)
    p.add_argument("--effect-loyalty", type=float, default=0.0)
    p.add_argument("--effect-macro", type=float, default=0.0)

    p = sub.add_parser("verify", help="synthesize, reconstruct, and diff against ground truth")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corpora", type=int, default=5)
    p.add_argument("--n-authors", type=int, default=300)
    p.add_argument("--n-papers", type=int, default=2000)
    p.add_argument("--months-span", type=int, default=240)
    p.add_argument("--invention-rate", type=float, default=0.03)
    p.add_argument("--p-transmit", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.0)

    for sp in sub.choices.values():
        sp.add_argument("--out", required=True, help="output directory (created if missing)")
    return parser


_COMMANDS = {
    "extract": _cmd_extract,
    "build-graphs": _cmd_build_graphs,
    "stats": _cmd_stats,
    "collab-fitness": _cmd_collab_fitness,
    "author-fitness": _cmd_author_fitness,
    "macro-fitness": _cmd_macro_fitness,
    "synth": _cmd_synth,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: input: cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        _COMMANDS[args.command](args, out)
    except CliError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return exc.code
    except Exception as exc:  # pragma: no cover - unexpected failure path
        print(f"error: internal: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
