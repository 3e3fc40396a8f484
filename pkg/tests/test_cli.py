import json

from click.testing import CliRunner

from rfir.cli import main


def run(*args):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)


def make_corpus(tmp_path, prefix="demo", extra=("--pair-labels",)):
    out = run(
        "synth",
        "--classes", "5",
        "--per-class", "10",
        "--dim", "8",
        "--sigma", "0.3",
        "--seed", "3",
        "--out-prefix", str(tmp_path / prefix),
        *extra,
    )
    assert out.exit_code == 0, out.output
    return tmp_path / f"{prefix}.rfe", tmp_path / f"{prefix}.jsonl"


def test_synth_then_ingest_check(tmp_path):
    emb, man = make_corpus(tmp_path)
    out = run("ingest", "--embeddings", str(emb), "--manifest", str(man), "--check")
    assert out.exit_code == 0, out.output
    assert "ok: 50 items, dim 8" in out.output


def test_ingest_rejects_mismatched_manifest(tmp_path):
    emb, man = make_corpus(tmp_path)
    truncated = tmp_path / "short.jsonl"
    truncated.write_text("".join(man.read_text().splitlines(True)[:10]))
    out = CliRunner().invoke(
        main, ["ingest", "--embeddings", str(emb), "--manifest", str(truncated), "--check"]
    )
    assert out.exit_code == 1
    assert "error" in out.output


def test_eval_writes_report(tmp_path):
    emb, man = make_corpus(tmp_path, extra=())
    report_path = tmp_path / "report.json"
    corr_path = tmp_path / "corr.csv"
    out = run(
        "eval",
        "--task", "category",
        "--m", "10",
        "--k", "1,2",
        "--khat", "all",
        "--seeds", "2",
        "--embeddings", str(emb),
        "--manifest", str(man),
        "--out", str(report_path),
        "--corr-out", str(corr_path),
    )
    assert out.exit_code == 0, out.output
    report = json.loads(report_path.read_text())
    assert report["task"] == "category"
    assert set(report["refined"]["recall"]) == {"1", "2"}
    assert corr_path.read_text().startswith("n_pos,map_at_r")


def test_eval_one_label_with_integer_khat(tmp_path):
    emb, man = make_corpus(tmp_path)
    out = run(
        "eval",
        "--task", "one-label",
        "--m", "10",
        "--k", "1",
        "--khat", "10",
        "--seeds", "1",
        "--embeddings", str(emb),
        "--manifest", str(man),
    )
    assert out.exit_code == 0, out.output
    assert json.loads(out.output)["khat"] == 10


def test_replay_demo_roundtrip(tmp_path):
    # drive the engine directly with a transcript, then replay it via the CLI
    from rfir.cli import DEMO_SPEC
    from rfir.harness import generate_synthetic_corpus
    from rfir.service import SessionEngine

    store, corpus = generate_synthetic_corpus(DEMO_SPEC)
    log = tmp_path / "t.jsonl"
    engine = SessionEngine(store, corpus, m_default=10, transcript_path=log)
    session = engine.create_session(query_id=store.ids[0], m=10)
    engine.submit_feedback(session.session_id, [1] * 10)

    out = run("replay", "--transcript", str(log), "--demo")
    assert out.exit_code == 0, out.output
    replayed = json.loads(out.output)
    assert replayed[session.session_id]["refined"] == session.refined_results.ids()
