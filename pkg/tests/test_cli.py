"""Command-line interface: exit codes, file modes, and replayed pipelines."""

import json

import pytest

from helpers import OracleJudge, vote_text
from ideaforge.arena import CRITERIA, JudgingContext, judge_pair
from ideaforge.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main
from ideaforge.gateway import RecordingProvider
from ideaforge.ideas import serialize_idea
from ideaforge.store import RunStore
from ideaforge.testing import sample_topic, synthetic_ideas


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def topics_file(tmp_path):
    path = tmp_path / "topics.json"
    topic = sample_topic()
    path.write_text(
        json.dumps(
            [{"id": topic.id, "name": topic.name, "description": topic.description}]
        )
    )
    return path


# -- exit codes and argument surface ---------------------------------------


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "--bogus")
    assert code == EXIT_USAGE
    assert "error:" in err


def test_unknown_subcommand_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "launch")
    assert code == EXIT_USAGE


def test_missing_required_flag_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "export", "--run", "somewhere")
    assert code == EXIT_USAGE
    assert "--out" in err


def test_missing_run_directory_is_usage_error(capsys, tmp_path):
    code, _, err = run_cli(
        capsys, "export", "--run", str(tmp_path / "ghost"), "--out", str(tmp_path / "o.zip")
    )
    assert code == EXIT_USAGE
    assert "does not exist" in err


# -- metrics ---------------------------------------------------------------


def test_metrics_ztest_prints_oracle_values(capsys):
    code, out, _ = run_cli(capsys, "metrics", "ztest", "--wins-a", "60", "--wins-b", "34")
    assert code == EXIT_OK
    assert "z = 2.6817" in out
    assert "p = 0.0073" in out


def test_metrics_ztest_rejects_empty_counts(capsys):
    code, _, err = run_cli(capsys, "metrics", "ztest", "--wins-a", "0", "--wins-b", "0")
    assert code == EXIT_USAGE
    assert "error:" in err


def judgments_file(tmp_path, rows):
    path = tmp_path / "judgments.jsonl"
    with open(path, "w") as fh:
        for pair_id, annotator, code in rows:
            fh.write(
                json.dumps(
                    {
                        "pair_id": pair_id,
                        "annotator": annotator,
                        "values": {"Overall": code},
                    }
                )
                + "\n"
            )
    return path


def test_metrics_alpha_perfect_agreement(capsys, tmp_path):
    path = judgments_file(
        tmp_path,
        [
            ("p1", "u1", "A"),
            ("p1", "u2", "A"),
            ("p2", "u1", "B"),
            ("p2", "u2", "B"),
        ],
    )
    code, out, _ = run_cli(capsys, "metrics", "alpha", "--judgments", str(path))
    assert code == EXIT_OK
    assert "alpha[Overall] = 1.0000" in out


def test_metrics_alpha_missing_criterion(capsys, tmp_path):
    path = judgments_file(tmp_path, [("p1", "u1", "A")])
    code, _, err = run_cli(
        capsys, "metrics", "alpha", "--judgments", str(path), "--criterion", "Novelty"
    )
    assert code == EXIT_USAGE
    assert "Novelty" in err


# -- arena file modes ------------------------------------------------------


def matches_file(tmp_path, topic):
    ideas = synthetic_ideas(topic, 4)
    ctx = JudgingContext(topic=topic, judge=OracleJudge())
    path = tmp_path / "matches.jsonl"
    with open(path, "w") as fh:
        for k in range(1, 4):
            record = judge_pair(ctx, ideas[0], ideas[k])
            fh.write(json.dumps(record.to_dict()) + "\n")
    return path, ideas


def test_arena_elo_prints_and_writes(capsys, tmp_path, topic):
    path, ideas = matches_file(tmp_path, topic)
    out_path = tmp_path / "ratings.json"
    code, out, _ = run_cli(
        capsys, "arena", "elo", "--matches", str(path), "--out", str(out_path)
    )
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert len(lines) == 4
    assert lines[0].split()[-1] == ideas[0].id  # undefeated, listed first
    payload = json.loads(out_path.read_text())
    assert set(payload) == {"criteria", "average"}
    assert set(payload["criteria"]) == set(CRITERIA)


def test_arena_elo_empty_matches_is_usage_error(capsys, tmp_path):
    path = tmp_path / "matches.jsonl"
    path.write_text("")
    code, _, err = run_cli(capsys, "arena", "elo", "--matches", str(path))
    assert code == EXIT_USAGE
    assert "no matches" in err


def test_arena_reference_replayed(capsys, tmp_path, topic, topics_file):
    # stage a run with 2 generated ideas, judge against 1 ground-truth idea
    pool = synthetic_ideas(topic, 3)
    truth, generated = pool[:1], pool[1:]
    store = RunStore(tmp_path / "run", create=True)
    for idea in generated:
        store.save_idea(idea)
    gt_path = tmp_path / "truth.json"
    gt_path.write_text(json.dumps([json.loads(serialize_idea(i)) for i in truth]))

    transcript = tmp_path / "transcript.jsonl"
    recorder = RecordingProvider(OracleJudge(), transcript)
    ctx = JudgingContext(topic=topic, judge=recorder)
    for peer in generated:
        judge_pair(ctx, truth[0], peer)
        judge_pair(ctx, peer, truth[0])

    code, out, _ = run_cli(
        capsys,
        "arena",
        "reference",
        "--run",
        str(tmp_path / "run"),
        "--topics",
        str(topics_file),
        "--ground-truth",
        str(gt_path),
        "--replay",
        str(transcript),
    )
    assert code == EXIT_OK
    assert "average: 100.0%" in out


def test_arena_reference_replay_miss_is_runtime_error(capsys, tmp_path, topic, topics_file):
    pool = synthetic_ideas(topic, 2)
    store = RunStore(tmp_path / "run", create=True)
    store.save_idea(pool[1])
    gt_path = tmp_path / "truth.json"
    gt_path.write_text(json.dumps([json.loads(serialize_idea(pool[0]))]))
    transcript = tmp_path / "empty.jsonl"
    transcript.write_text("")

    code, _, err = run_cli(
        capsys,
        "arena",
        "reference",
        "--run",
        str(tmp_path / "run"),
        "--topics",
        str(topics_file),
        "--ground-truth",
        str(gt_path),
        "--replay",
        str(transcript),
    )
    assert code == EXIT_RUNTIME
    assert "error:" in err


# -- generation via replay -------------------------------------------------


def batch_answer(questions):
    ideas = [
        {
            "Research Question": q,
            "Theory": "t",
            "Hypotheses": ["H1", "H2"],
        }
        for q in questions
    ]
    return json.dumps({"ideas": ideas})


class ScriptedWorker:
    def __init__(self, responses):
        self.responses = list(responses)

    def complete(self, request):
        return self.responses.pop(0)


def record_generation(tmp_path, topics_file, n, batch):
    """Produce a transcript matching what `generate` will ask for."""
    from ideaforge.generation import GenerationJob, run_campaign

    topic = sample_topic()
    answers = []
    per_batch = [batch] * (n // batch) + ([n % batch] if n % batch else [])
    start = 0
    for size in per_batch:
        qs = [f"Question {start + j}?" for j in range(size)]
        answers.append(batch_answer(qs))
        start += size
    transcript = tmp_path / "gen-transcript.jsonl"
    recorder = RecordingProvider(ScriptedWorker(answers), transcript)
    job = GenerationJob(topic=topic, total=n, batch_size=batch, seed=0)
    run_campaign(job, recorder)
    return transcript


def test_generate_from_replay(capsys, tmp_path, topics_file):
    transcript = record_generation(tmp_path, topics_file, n=4, batch=2)
    run_dir = tmp_path / "run"
    code, out, _ = run_cli(
        capsys,
        "generate",
        "--run",
        str(run_dir),
        "--topics",
        str(topics_file),
        "--n",
        "4",
        "--batch",
        "2",
        "--replay",
        str(transcript),
    )
    assert code == EXIT_OK
    assert "topic-attendance: 4 ideas" in out
    store = RunStore(run_dir)
    assert len(store.load_ideas("topic-attendance")) == 4


def test_generate_mixing_guard(capsys, tmp_path, topics_file, bank):
    transcript = record_generation(tmp_path, topics_file, n=2, batch=2)
    run_dir = tmp_path / "run"
    args = [
        "generate",
        "--run",
        str(run_dir),
        "--topics",
        str(topics_file),
        "--n",
        "2",
        "--batch",
        "2",
        "--replay",
        str(transcript),
    ]
    assert run_cli(capsys, *args)[0] == EXIT_OK
    # same run, opposite condition: refused without --allow-mixed
    flipped = args + ["--with-metadata", "--registry", str(bank.root)]
    code, _, err = run_cli(capsys, *flipped)
    assert code == EXIT_USAGE
    assert "allow-mixed" in err


def test_generate_with_metadata_needs_registry(capsys, tmp_path, topics_file):
    code, _, err = run_cli(
        capsys,
        "generate",
        "--run",
        str(tmp_path / "run"),
        "--topics",
        str(topics_file),
        "--with-metadata",
    )
    assert code == EXIT_USAGE
    assert "--registry" in err


# -- select via replay -----------------------------------------------------


def test_select_replayed_swiss(capsys, tmp_path, topics_file, topic):
    run_dir = tmp_path / "run"
    store = RunStore(run_dir, create=True)
    ideas = synthetic_ideas(topic, 4)
    for idea in ideas:
        store.save_idea(idea)

    from ideaforge.arena import swiss_select

    transcript = tmp_path / "select-transcript.jsonl"
    recorder = RecordingProvider(OracleJudge(), transcript)
    ctx = JudgingContext(topic=topic, judge=recorder)
    # the command loads ideas in id order; record against that order
    swiss_select(sorted(ideas, key=lambda i: i.id), ctx, rounds=3, k=2, seed=0)

    code, out, _ = run_cli(
        capsys,
        "select",
        "--run",
        str(run_dir),
        "--topics",
        str(topics_file),
        "--rounds",
        "3",
        "--top",
        "2",
        "--replay",
        str(transcript),
    )
    assert code == EXIT_OK
    selection = json.loads((run_dir / "selection" / f"{topic.id}.json").read_text())
    assert len(selection["top"]) == 2
    assert selection["with_validation"] is False
    assert len(store.load_matches()) == 6


def test_select_needs_two_ideas(capsys, tmp_path, topics_file, topic):
    run_dir = tmp_path / "run"
    store = RunStore(run_dir, create=True)
    store.save_idea(synthetic_ideas(topic, 1)[0])
    (tmp_path / "none.jsonl").write_text("")
    code, _, err = run_cli(
        capsys,
        "select",
        "--run",
        str(run_dir),
        "--topics",
        str(topics_file),
        "--replay",
        str(tmp_path / "none.jsonl"),
    )
    assert code == EXIT_USAGE
    assert "at least 2" in err


# -- config file -----------------------------------------------------------


def test_config_overrides_flags(capsys, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"wins-a": 60, "wins_b": 34}))
    code, out, _ = run_cli(
        capsys,
        "--config",
        str(config),
        "metrics",
        "ztest",
        "--wins-a",
        "1",
        "--wins-b",
        "1",
    )
    assert code == EXIT_OK
    assert "z = 2.6817" in out


def test_config_rejects_unknown_keys(capsys, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"warp-speed": 9}))
    code, _, err = run_cli(
        capsys, "--config", str(config), "metrics", "ztest", "--wins-a", "1", "--wins-b", "1"
    )
    assert code == EXIT_USAGE
    assert "warp-speed" in err


# -- export ----------------------------------------------------------------


def test_export_writes_archive(capsys, tmp_path, topic):
    run_dir = tmp_path / "run"
    store = RunStore(run_dir, create=True)
    store.save_idea(synthetic_ideas(topic, 1)[0])
    out_zip = tmp_path / "run.zip"
    code, out, _ = run_cli(
        capsys, "export", "--run", str(run_dir), "--out", str(out_zip)
    )
    assert code == EXIT_OK
    assert out_zip.exists()
    assert str(out_zip) in out
