"""Command line entry point wiring the modules into end-to-end workflows.

Exit codes are a stable contract: 0 success, 1 user or configuration error,
2 provider or sandbox failure. Every stochastic command takes --seed, and a
--config JSON file overrides flags of the same name.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .arena import (
    DEFAULT_ROUNDS,
    DEFAULT_TOP_K,
    ELO_PERMUTATIONS,
    JudgingContext,
    MatchRecord,
    elo_ratings,
    reference_accuracy,
    swiss_select,
)
from .databank import Registry, load_registry
from .errors import (
    IdeaforgeError,
    IdeaParseError,
    ProviderError,
    RegistryError,
    ReplayMissError,
    SandboxError,
    StallError,
    StatsError,
    StoreError,
    SummaryParseError,
    TemplateError,
    VerdictParseError,
    VoteParseError,
)
from .gateway import HTTPProvider, Provider, RecordingProvider, ReplayProvider, config_from_env
from .generation import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_TOTAL,
    FileLiteratureProvider,
    GenerationJob,
    run_campaign,
)
from .ideas import Idea, Topic, idea_from_dict
from .metrics import krippendorff_alpha, matrix_from_triples, win_rate_ztest
from .sandbox import DEFAULT_WALL_SECONDS, Limits
from .store import TRANSCRIPT_LOG, RunStore, export_run
from .validation import (
    DEFAULT_ROUND_CAP,
    ValidationRecord,
    check_feasibility,
    stage_datasets,
    summarize_trace,
    validate_hypotheses,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

log = logging.getLogger(__name__)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; remap to the documented code 1."""

    def error(self, message):
        raise UsageError(message)


_RUNTIME_ERRORS = (
    ProviderError,
    ReplayMissError,
    SandboxError,
    StallError,
    VerdictParseError,
    VoteParseError,
    SummaryParseError,
)


def load_topics(path) -> list[Topic]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if isinstance(raw, dict):
        raw = raw.get("topics", [])
    topics = [
        Topic(id=t["id"], name=t["name"], description=t.get("description", "")) for t in raw
    ]
    if not topics:
        raise UsageError(f"no topics in {path}")
    return topics


def _providers(args, store: RunStore | None):
    """Resolve (worker, judge) providers from --replay / --record / env."""
    if getattr(args, "replay", None):
        replayed = ReplayProvider.from_file(args.replay)
        return replayed, replayed
    worker: Provider = HTTPProvider(config_from_env("worker"))
    judge: Provider = HTTPProvider(config_from_env("judge"))
    if getattr(args, "record", False):
        if store is None:
            raise UsageError("--record needs a run directory")
        path = store.path(TRANSCRIPT_LOG)
        worker = RecordingProvider(worker, path)
        judge = RecordingProvider(judge, path)
    return worker, judge


def _pool_conditions(ideas: list[Idea]) -> set[bool]:
    return {idea.with_metadata for idea in ideas}


def _check_unmixed(ideas: list[Idea], allow_mixed: bool, context: str):
    if len(_pool_conditions(ideas)) > 1 and not allow_mixed:
        raise UsageError(
            f"{context}: pool mixes with- and without-metadata ideas; "
            "pass --allow-mixed to override"
        )


# -- commands --------------------------------------------------------------


def cmd_generate(args) -> int:
    store = RunStore(args.run, create=True)
    topics = load_topics(args.topics)
    registry: Registry | None = None
    if args.registry:
        registry = load_registry(args.registry)
    if args.with_metadata and registry is None:
        raise UsageError("--with-metadata needs --registry")
    literature = (
        FileLiteratureProvider.from_file(args.literature) if args.literature else None
    )
    worker, _ = _providers(args, store)
    for topic in topics:
        conditions = _pool_conditions(store.load_ideas(topic.id))
        if conditions and conditions != {args.with_metadata} and not args.allow_mixed:
            raise UsageError(
                f"topic {topic.id}: run already holds ideas from the other "
                "metadata condition; pass --allow-mixed to override"
            )
        job = GenerationJob(
            topic=topic,
            total=args.n,
            batch_size=args.batch,
            with_metadata=args.with_metadata,
            seed=args.seed,
        )
        ideas = run_campaign(
            job, worker, literature_provider=literature, registry=registry,
            on_idea=store.save_idea,
        )
        print(f"{topic.id}: {len(ideas)} ideas")
    return EXIT_OK


def cmd_validate(args) -> int:
    store = RunStore(args.run)
    registry = load_registry(args.registry)
    worker, judge = _providers(args, store)
    limits = Limits(wall_seconds=args.wall)
    ideas = store.load_ideas(args.topic)
    if not ideas:
        raise UsageError("run has no ideas to validate")
    done = 0
    for idea in ideas:
        if store.has_trace(idea.id) and not args.force:
            continue
        verdict = check_feasibility(idea, registry, judge)
        if not verdict.feasible:
            record = ValidationRecord(
                idea_id=idea.id,
                verdict=verdict,
                trace=[],
                hypothesis_verdicts={},
                rounds_used=0,
                complete=True,
            )
            store.save_trace(record)
            print(f"{idea.id}: infeasible ({verdict.reason})")
            continue
        entries = [registry.entry(i) for i in verdict.data_used]
        record = validate_hypotheses(
            idea,
            entries,
            registry.root,
            worker,
            verdict=verdict,
            round_cap=args.round_cap,
            limits=limits,
        )
        if record.complete and record.trace:
            summarize_trace(record, worker)
        store.save_trace(record)
        done += 1
        status = "ok" if record.complete else "incomplete"
        print(f"{idea.id}: {status} ({record.rounds_used} rounds)")
    print(f"validated {done} ideas")
    return EXIT_OK


def cmd_select(args) -> int:
    store = RunStore(args.run)
    _, judge = _providers(args, store)
    topics = load_topics(args.topics)
    for topic in topics:
        ideas = store.load_ideas(topic.id)
        if len(ideas) < 2:
            raise UsageError(f"topic {topic.id}: need at least 2 ideas, have {len(ideas)}")
        _check_unmixed(ideas, args.allow_mixed, f"topic {topic.id}")
        summaries = {}
        if args.with_validation:
            for idea in ideas:
                steps = store.load_summary(idea.id)
                if steps:
                    summaries[idea.id] = steps
        ctx = JudgingContext(
            topic=topic,
            judge=judge,
            with_validation=args.with_validation,
            summaries=summaries,
        )
        result = swiss_select(ideas, ctx, rounds=args.rounds, k=args.top, seed=args.seed)
        for match in result.matches:
            store.append_match(match)
        top_ids = [idea.id for idea in result.top]
        store.write_json(
            f"selection/{topic.id}.json",
            {
                "topic_id": topic.id,
                "with_validation": args.with_validation,
                "top": top_ids,
                "standings": result.standings.to_dict(),
            },
        )
        print(f"{topic.id}: top {len(top_ids)} -> {', '.join(top_ids)}")
    return EXIT_OK


def _load_match_file(path) -> list[MatchRecord]:
    matches = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                matches.append(MatchRecord.from_dict(json.loads(line)))
    if not matches:
        raise UsageError(f"no matches in {path}")
    return matches


def cmd_arena_elo(args) -> int:
    matches = _load_match_file(args.matches)
    table = elo_ratings(matches, permutations=args.permutations, seed=args.seed)
    payload = table.to_dict()
    if args.out:
        Path(args.out).write_text(
            json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
    ordered = sorted(payload["average"].items(), key=lambda kv: (-kv[1], kv[0]))
    for idea_id, rating in ordered:
        print(f"{rating:8.2f}  {idea_id}")
    return EXIT_OK


def _load_idea_file(path) -> list[Idea]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if isinstance(raw, dict):
        raw = raw.get("ideas", [])
    ideas = [idea_from_dict(entry) for entry in raw]
    if not ideas:
        raise UsageError(f"no ideas in {path}")
    return ideas


def cmd_arena_reference(args) -> int:
    store = RunStore(args.run)
    _, judge = _providers(args, store)
    topics = {t.id: t for t in load_topics(args.topics)}
    ground_truth = _load_idea_file(args.ground_truth)
    generated: dict[str, list[Idea]] = {}
    for gt in ground_truth:
        if gt.topic_id not in topics:
            raise UsageError(f"ground-truth idea {gt.id} names unknown topic {gt.topic_id}")
        if gt.topic_id not in generated:
            pool = store.load_ideas(gt.topic_id)
            _check_unmixed(pool, args.allow_mixed, f"topic {gt.topic_id}")
            generated[gt.topic_id] = pool

    def ctx_for_topic(topic_id: str) -> JudgingContext:
        return JudgingContext(topic=topics[topic_id], judge=judge)

    report = reference_accuracy(ground_truth, generated, ctx_for_topic)
    if args.out:
        Path(args.out).write_text(
            json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
    for criterion, value in report.per_criterion.items():
        print(f"{criterion}: {100.0 * value:.1f}%")
    print(f"average: {100.0 * report.average:.1f}%")
    return EXIT_OK


def cmd_metrics_alpha(args) -> int:
    triples = []
    with open(args.judgments, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            values = record.get("values", {})
            if args.criterion not in values:
                raise UsageError(f"judgment lacks criterion {args.criterion!r}")
            triples.append((record["pair_id"], record["annotator"], values[args.criterion]))
    alpha = krippendorff_alpha(matrix_from_triples(triples))
    print(f"alpha[{args.criterion}] = {alpha:.4f}")
    return EXIT_OK


def cmd_metrics_ztest(args) -> int:
    result = win_rate_ztest(args.wins_a, args.wins_b)
    print(f"z = {result.z:.4f}")
    print(f"p = {result.p:.4f}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    store = RunStore(args.run)
    registry = load_registry(args.registry) if args.registry else None
    app = create_app(store, registry=registry, seed=args.seed)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def cmd_export(args) -> int:
    store = RunStore(args.run)
    out = export_run(store, args.out)
    print(f"wrote {out}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="ideaforge", description=__doc__)
    parser.add_argument("--config", metavar="FILE", help="JSON config; overrides flags")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, run_required=True):
        p.add_argument("--run", required=run_required, help="run directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--replay", metavar="FILE", help="replay a recorded transcript")
        p.add_argument(
            "--record", action="store_true", help="record live completions to the run"
        )
        p.add_argument(
            "--allow-mixed",
            action="store_true",
            help="permit pools mixing with/without-metadata ideas",
        )

    p = sub.add_parser("generate", help="generate ideas per topic")
    add_common(p)
    p.add_argument("--topics", required=True, help="topics JSON file")
    p.add_argument("--n", type=int, default=DEFAULT_TOTAL, help="ideas per topic")
    p.add_argument("--batch", type=int, default=DEFAULT_BATCH_SIZE)
    p.add_argument("--with-metadata", action="store_true")
    p.add_argument("--registry", help="dataset registry directory")
    p.add_argument("--literature", help="literature corpus JSON file")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="feasibility check and sandboxed validation")
    add_common(p)
    p.add_argument("--registry", required=True, help="dataset registry directory")
    p.add_argument("--topic", help="only validate ideas for this topic id")
    p.add_argument("--round-cap", type=int, default=DEFAULT_ROUND_CAP)
    p.add_argument("--wall", type=float, default=DEFAULT_WALL_SECONDS)
    p.add_argument("--force", action="store_true", help="re-validate ideas with traces")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("select", help="Swiss tournament selection per topic")
    add_common(p)
    p.add_argument("--topics", required=True, help="topics JSON file")
    p.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS)
    p.add_argument("--top", type=int, default=DEFAULT_TOP_K)
    p.add_argument("--with-validation", action="store_true")
    p.set_defaults(func=cmd_select)

    arena = sub.add_parser("arena", help="rating and ranking harnesses")
    arena_sub = arena.add_subparsers(dest="arena_command", required=True)

    p = arena_sub.add_parser("elo", help="ELO ratings over recorded matches")
    p.add_argument("--matches", required=True, help="matches jsonl file")
    p.add_argument("--out", help="write ratings JSON here")
    p.add_argument("--permutations", type=int, default=ELO_PERMUTATIONS)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_arena_elo)

    p = arena_sub.add_parser("reference", help="ranking accuracy against ground truth")
    add_common(p)
    p.add_argument("--topics", required=True, help="topics JSON file")
    p.add_argument("--ground-truth", required=True, help="ground-truth ideas JSON")
    p.add_argument("--out", help="write the accuracy report here")
    p.set_defaults(func=cmd_arena_reference)

    metrics_p = sub.add_parser("metrics", help="agreement and significance stats")
    metrics_sub = metrics_p.add_subparsers(dest="metrics_command", required=True)

    p = metrics_sub.add_parser("alpha", help="Krippendorff's alpha over judgments")
    p.add_argument("--judgments", required=True, help="judgments jsonl file")
    p.add_argument("--criterion", default="Overall")
    p.set_defaults(func=cmd_metrics_alpha)

    p = metrics_sub.add_parser("ztest", help="two-proportion z-test on win counts")
    p.add_argument("--wins-a", type=int, required=True)
    p.add_argument("--wins-b", type=int, required=True)
    p.set_defaults(func=cmd_metrics_ztest)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--run", required=True, help="run directory")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--registry", help="dataset registry directory")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export", help="archive a run directory")
    p.add_argument("--run", required=True, help="run directory")
    p.add_argument("--out", required=True, help="output zip path")
    p.set_defaults(func=cmd_export)

    return parser


def _apply_config(args: argparse.Namespace):
    if not args.config:
        return
    with open(args.config, encoding="utf-8") as fh:
        overrides = json.load(fh)
    if not isinstance(overrides, dict):
        raise UsageError("config file must hold a JSON object")
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise UsageError(f"config key {key!r} matches no flag of this command")
        setattr(args, dest, value)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config(args)
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.INFO,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (
        RegistryError,
        StoreError,
        StatsError,
        IdeaParseError,
        TemplateError,
        IdeaforgeError,
        FileNotFoundError,
        json.JSONDecodeError,
        ValueError,
        KeyError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
