"""``rfir`` command line: ingest, synth, eval, serve, replay."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .harness import (
    SyntheticCorpusSpec,
    TaskKind,
    TaskRunConfig,
    generate_synthetic_corpus,
    run_task,
)
from .metrics import correlation_points_csv
from .errors import RfirError
from .store import (
    check_pairing,
    load_pair,
    write_embeddings,
    write_manifest,
)


@click.group()
def main():
    """Vector retrieval with one-round binary relevance feedback."""


@main.command()
@click.option("--embeddings", required=True, type=click.Path(exists=True))
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--check", is_flag=True, help="Validate pairing and invariants.")
def ingest(embeddings, manifest, check):
    """Load an embedding file with its manifest and report basic stats."""
    try:
        store, corpus = load_pair(embeddings, manifest)
        if check:
            check_pairing(store, corpus)
    except RfirError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"ok: {len(store)} items, dim {store.dim}")


@main.command()
@click.option("--classes", default=20, show_default=True)
@click.option("--per-class", default=100, show_default=True)
@click.option("--dim", default=32, show_default=True)
@click.option("--sigma", default=0.25, show_default=True)
@click.option("--separation", default=0.8, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--pair-labels", is_flag=True, help="Label classes as (adj, noun) pairs.")
@click.option("--out-prefix", required=True)
def synth(classes, per_class, dim, sigma, separation, seed, pair_labels, out_prefix):
    """Generate a synthetic clustered corpus as <prefix>.rfe + <prefix>.jsonl."""
    spec = SyntheticCorpusSpec(
        n_classes=classes,
        samples_per_class=per_class,
        dim=dim,
        class_separation=separation,
        noise_sigma=sigma,
        seed=seed,
        pair_labels=pair_labels,
    )
    store, corpus = generate_synthetic_corpus(spec)
    write_embeddings(store, f"{out_prefix}.rfe")
    write_manifest(corpus, f"{out_prefix}.jsonl")
    click.echo(f"wrote {out_prefix}.rfe and {out_prefix}.jsonl ({len(store)} items)")


@main.command()
@click.option(
    "--task",
    required=True,
    type=click.Choice([t.value for t in TaskKind]),
)
@click.option("--m", default=50, show_default=True)
@click.option("--k", default="1,2,4,8", show_default=True, help="Comma-separated K values.")
@click.option("--khat", default="all", show_default=True, help="'all' or an integer.")
@click.option("--seeds", default=10, show_default=True, help="Number of seeds (0..n-1).")
@click.option("--flip-prob", default=0.0, show_default=True)
@click.option("--count-ops/--no-count-ops", default=True, show_default=True)
@click.option("--embeddings", required=True, type=click.Path(exists=True))
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), help="Write the report JSON here.")
@click.option("--corr-out", type=click.Path(), help="Write n_pos,map_at_r CSV here.")
def eval(task, m, k, khat, seeds, flip_prob, count_ops, embeddings, manifest, out, corr_out):
    """Run the simulated test-and-control experiment."""
    store, corpus = load_pair(embeddings, manifest)
    config = TaskRunConfig(
        task=TaskKind(task),
        m=m,
        k_list=tuple(int(x) for x in k.split(",")),
        khat=None if khat == "all" else int(khat),
        seeds=tuple(range(seeds)),
        flip_prob=flip_prob,
        count_ops=count_ops,
    )
    report = run_task(store, corpus, config)
    text = report.to_json()
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text)
    if corr_out:
        r, points = report.correlation()
        Path(corr_out).write_text(correlation_points_csv(points))
        click.echo(f"pearson_r={r:.4f}; wrote {corr_out}")


@main.command()
@click.option("--embeddings", type=click.Path(exists=True))
@click.option("--manifest", type=click.Path(exists=True))
@click.option("--demo", is_flag=True, help="Serve a bundled synthetic demo corpus.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
@click.option("--m", default=10, show_default=True)
@click.option("--rate-once/--no-rate-once", default=True, show_default=True)
@click.option("--transcript", type=click.Path(), help="Append-only session log (JSONL).")
@click.option("--static-dir", type=click.Path(exists=True), help="Frontend bundle to serve at /.")
def serve(embeddings, manifest, demo, host, port, m, rate_once, transcript, static_dir):
    """Run the interactive session service."""
    import uvicorn

    from .service import SessionEngine, create_app

    store, corpus = _load_or_demo(embeddings, manifest, demo)
    engine = SessionEngine(
        store, corpus, m_default=m, rate_once=rate_once, transcript_path=transcript
    )
    app = create_app(engine, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--transcript", required=True, type=click.Path(exists=True))
@click.option("--embeddings", type=click.Path(exists=True))
@click.option("--manifest", type=click.Path(exists=True))
@click.option("--demo", is_flag=True, help="Replay against the bundled demo corpus.")
@click.option("--m", default=10, show_default=True)
@click.option("--rate-once/--no-rate-once", default=True, show_default=True)
def replay(transcript, embeddings, manifest, demo, m, rate_once):
    """Re-execute a session transcript and print the result ids as JSON."""
    from .service import replay_transcript

    store, corpus = _load_or_demo(embeddings, manifest, demo)
    results = replay_transcript(
        transcript, store, corpus, m_default=m, rate_once=rate_once
    )
    click.echo(json.dumps(results, indent=2))


DEMO_SPEC = SyntheticCorpusSpec(
    n_classes=12,
    samples_per_class=12,
    dim=16,
    class_separation=0.7,
    noise_sigma=0.25,
    seed=42,
    pair_labels=True,
)


def _load_or_demo(embeddings, manifest, demo):
    if demo:
        return generate_synthetic_corpus(DEMO_SPEC)
    if not embeddings or not manifest:
        raise click.UsageError("provide --embeddings and --manifest, or --demo")
    return load_pair(embeddings, manifest)


if __name__ == "__main__":
    main()
