"""Command-line interface: ingest, index, evaluate, serve, ask, synth, demo."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, replace
from pathlib import Path

import click

from .analysis import RankedHit
from .dense import HashEmbedder, MODE_LATE, MODE_SINGLE, RemoteEmbedder, build_vector_index, save_vector_index
from .evaluation import (
    evaluate_reader,
    evaluate_retriever,
    load_gold,
    render_reader_table,
    render_retriever_table,
    save_reports,
)
from .ingest import IngestConfig, PassageStore, ingest_corpus, load_corpus
from .reader import answer_on_passages
from .service import Engine, ServiceConfig, load_config, save_config
from .sparse import build_sparse_index, save_sparse_index
from .synth import write_synthetic_dataset
from . import kernels


@click.group()
def main():
    """Extractive question answering over long technical reports."""


@main.command()
@click.option("--corpus", required=True, type=click.Path(exists=True), help="JSONL corpus file.")
@click.option("--out", required=True, type=click.Path(), help="Passage store directory.")
@click.option("--min-chars", default=100, show_default=True, help="Minimum passage length.")
def ingest(corpus, out, min_chars):
    """Segment a corpus into passages and write the store."""
    docs = load_corpus(corpus)
    store = PassageStore()
    stats = ingest_corpus(docs, IngestConfig(min_chars=min_chars), store)
    store.save(out)
    click.echo(
        f"ingested {stats.n_documents} documents -> {stats.n_passages} passages "
        f"({stats.n_filtered} filtered) into {out}"
    )


@main.group()
def index():
    """Build retrieval indexes from a passage store."""


@index.command("sparse")
@click.option("--passages", required=True, type=click.Path(exists=True), help="Passage store directory.")
@click.option("--out", required=True, type=click.Path(), help="Index file.")
def index_sparse(passages, out):
    """Build the inverted index."""
    store = PassageStore.load(passages)
    idx = build_sparse_index(store.passages())
    save_sparse_index(idx, out)
    click.echo(f"sparse index: {idx.n_passages} passages, {len(idx.terms())} terms -> {out}")


@index.command("dense")
@click.option("--passages", required=True, type=click.Path(exists=True), help="Passage store directory.")
@click.option("--backend", type=click.Choice(["hash", "remote"]), default="hash", show_default=True)
@click.option("--mode", type=click.Choice(["single", "late"]), default="single", show_default=True)
@click.option("--dim", default=256, show_default=True)
@click.option("--seed", default=0, show_default=True, help="Hash backend seed.")
@click.option("--endpoint", default=None, help="Remote backend URL.")
@click.option("--out", required=True, type=click.Path(), help="Index file.")
def index_dense(passages, backend, mode, dim, seed, endpoint, out):
    """Embed passages and build the flat vector index."""
    store = PassageStore.load(passages)
    embed_mode = MODE_SINGLE if mode == "single" else MODE_LATE
    if backend == "remote":
        if not endpoint:
            raise click.UsageError("--backend remote requires --endpoint")
        emb = RemoteEmbedder(endpoint, mode=embed_mode, dim=dim)
    else:
        emb = HashEmbedder(dim=dim, seed=seed, mode=embed_mode)
    idx = build_vector_index(store.passages(), emb)
    save_vector_index(idx, out)
    click.echo(f"dense index: {len(idx)} passages, mode={idx.mode}, dim={idx.dim} -> {out}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--gold", required=True, type=click.Path(exists=True), help="JSONL gold set.")
@click.option("--retriever", "retrievers", multiple=True,
              type=click.Choice(["bm25", "tfidf", "dense", "maxsim"]),
              help="Retriever(s) to evaluate; repeatable.")
@click.option("--reader", type=click.Choice(["scripted", "remote"]), default=None,
              help="Also evaluate the reader with this backend.")
@click.option("--reader-input", type=click.Choice(["e2e", "gold"]), default="e2e",
              show_default=True, help="Read retrieved passages or the gold passages.")
@click.option("--k", default=10, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(), help="Write the JSON report here.")
def evaluate(config_path, gold, retrievers, reader, reader_input, k, out_path):
    """Score retrievers and/or the reader against a gold set."""
    config = load_config(config_path)
    if reader is not None:
        config = replace(config, reader=reader)
    engine = Engine.from_config(config)
    gold_set = load_gold(gold)
    known_ids = engine.store.passage_ids()
    reports: dict = {"k": k}

    retriever_rows = []
    for name in retrievers:
        def search_fn(question, depth, _name=name):
            return engine.search(question, depth, retriever=_name)

        report = evaluate_retriever(search_fn, gold_set, k=k, known_ids=known_ids)
        retriever_rows.append((name, report))
    if retriever_rows:
        click.echo(render_retriever_table(retriever_rows))
        reports["retrievers"] = {name: rep for name, rep in retriever_rows}

    if reader is not None:
        def pipeline_fn(gold_q, depth):
            if reader_input == "gold":
                # read the gold passages directly, in id order
                hits = [
                    RankedHit(pid, 0.0, i + 1)
                    for i, pid in enumerate(sorted(gold_q.relevant_passage_ids))
                ]
            else:
                hits = engine.search(gold_q.question, depth)
            answers, _ = answer_on_passages(
                gold_q.question, hits, engine.store, engine.reader_backend,
                engine.decode_config,
            )
            top = answers[0]
            return "" if top.is_no_answer else top.text

        label = f"{reader}/{reader_input}"
        reader_report = evaluate_reader(pipeline_fn, gold_set, k=k, known_ids=known_ids)
        if retriever_rows:
            click.echo()
        click.echo(render_reader_table([(label, reader_report)]))
        reports["reader"] = {label: reader_report}

    if out_path:
        save_reports(reports, out_path)
        click.echo(f"report written to {out_path}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(config_path, port, host):
    """Run the HTTP service."""
    import uvicorn

    from .webapi import create_app

    engine = Engine.from_config(load_config(config_path))
    uvicorn.run(create_app(engine), host=host, port=port)


@main.command()
@click.argument("question")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--report", "report_id", default=None, help="Restrict to one document.")
@click.option("--top-k", default=None, type=int)
def ask(question, config_path, report_id, top_k):
    """One-shot question; prints the answer bundle as JSON."""
    from .service import AskRequest

    engine = Engine.from_config(load_config(config_path))
    response = engine.ask(AskRequest(question=question, report_id=report_id, top_k=top_k))
    click.echo(json.dumps(asdict(response), ensure_ascii=False, indent=2))


@main.command()
@click.option("--out", required=True, type=click.Path(), help="Output directory.")
@click.option("--passages", "n_passages", default=200, show_default=True)
@click.option("--questions", "n_questions", default=20, show_default=True)
@click.option("--seed", default=7, show_default=True)
def synth(out, n_passages, n_questions, seed):
    """Generate a synthetic corpus, gold set, and scripted reader fixture."""
    write_synthetic_dataset(out, n_passages=n_passages, n_questions=n_questions, seed=seed)
    click.echo(f"synthetic dataset written to {out}")


@main.command()
@click.option("--out", required=True, type=click.Path(), help="Demo directory.")
@click.option("--seed", default=7, show_default=True)
@click.option("--dim", default=256, show_default=True)
@click.option("--static-dir", default="frontend/dist",
              help="Web console bundle to mount (skipped when absent).")
def demo(out, seed, dim, static_dir):
    """Build a complete runnable demo: data, store, indexes, config."""
    out_dir = Path(out)
    planted = write_synthetic_dataset(out_dir, seed=seed)
    docs = load_corpus(out_dir / "corpus.jsonl")
    store = PassageStore()
    stats = ingest_corpus(docs, IngestConfig(), store)
    store.save(out_dir / "store")

    sparse = build_sparse_index(store.passages())
    save_sparse_index(sparse, out_dir / "sparse_index.json")
    dense = build_vector_index(store.passages(), HashEmbedder(dim=dim, seed=seed, mode=MODE_SINGLE))
    save_vector_index(dense, out_dir / "dense_index.bin")
    late = build_vector_index(store.passages(), HashEmbedder(dim=dim, seed=seed, mode=MODE_LATE))
    save_vector_index(late, out_dir / "late_index.bin")

    bundle = Path(static_dir)
    config = ServiceConfig(
        store_dir="store",
        sparse_index="sparse_index.json",
        dense_index="dense_index.bin",
        late_index="late_index.bin",
        retriever="bm25",
        reader="scripted",
        reader_fixture="reader_fixture.json",
        embed_dim=dim,
        embed_seed=seed,
        predefined_questions=tuple(q.question for q in planted.gold),
        static_dir=(
            os.path.relpath(bundle.resolve(), out_dir.resolve())
            if bundle.is_dir()
            else None
        ),
    )
    save_config(config, out_dir / "config.json")
    click.echo(
        f"demo ready in {out}: {stats.n_passages} passages, kernels={kernels.active_backend()}\n"
        f"try: reportqa serve --config {out_dir / 'config.json'}"
    )


if __name__ == "__main__":
    main()
