"""Command-line entry point wiring the pipeline end to end.

Exit codes: 0 success, 1 usage error, 2 data/model error. All randomized
behavior flows from --seed, so identical invocations give identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import embedding_classifier as ec
from . import evaluation as ev
from .annotation_service import AnnotationStore, create_app, replay_records
from .corpus import (
    Document,
    clean_text,
    corpus_stats,
    extract_candidates,
    load_document,
    segment_sentences,
)
from .errors import CkeError, EmptyCorpus
from .features import (
    bow_trigram_vector,
    build_vocab,
    encode_sequence,
    remove_stopwords,
    tokenize,
)
from .lime_explainer import explain
from .linear_baselines import predict_linear, train_linear_svm, train_logistic
from .sequence_tagger import TaggerConfig, tag_sentence, train_tagger
from .serialization import load_model, save_model


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _input_documents(paths: list[str]) -> list[Document]:
    files: list[Path] = []
    for p in paths:
        path = Path(p)
        if path.is_dir():
            files.extend(sorted(path.glob("*.txt")))
        elif path.exists():
            files.append(path)
        else:
            raise CkeError(f"input path not found: {p}")
    docs = []
    for f in files:
        docs.append(load_document(f.stem, f.read_text("utf-8")))
    if not docs:
        raise EmptyCorpus(f"no .txt documents under {paths}")
    return docs


def _segmented(paths: list[str]):
    sentences = []
    for doc in _input_documents(paths):
        sentences.extend(segment_sentences(clean_text(doc)))
    return sentences


def _load_labeled(path: str) -> list[tuple[str, str]]:
    rows = [json.loads(ln) for ln in Path(path).read_text("utf-8").splitlines() if ln.strip()]
    return [(r["text"], r["label"]) for r in rows]


def _load_tagging(path: str) -> list[tuple[list[str], list[int]]]:
    rows = [json.loads(ln) for ln in Path(path).read_text("utf-8").splitlines() if ln.strip()]
    return [(list(r["tokens"]), [int(x) for x in r["labels"]]) for r in rows]


# --- subcommands ---------------------------------------------------------------


def _cmd_ingest(args) -> int:
    rows = [
        {
            "sentence_id": s.sentence_id,
            "doc_id": s.doc_id,
            "text": s.text,
            "char_span": list(s.char_span),
            "word_count": s.word_count,
        }
        for s in _segmented(args.inputs)
    ]
    _write("\n".join(json.dumps(r, sort_keys=True) for r in rows) + "\n", args.out)
    return 0


def _cmd_extract(args) -> int:
    candidates = extract_candidates(_segmented(args.inputs))
    rows = [
        {
            "sentence_id": c.sentence.sentence_id,
            "doc_id": c.sentence.doc_id,
            "marker": c.marker,
            "marker_span": list(c.marker_span),
            "text": c.sentence.text,
        }
        for c in candidates
    ]
    payload = "\n".join(json.dumps(r, sort_keys=True) for r in rows)
    _write(payload + "\n" if payload else "", args.out)
    return 0


def _cmd_stats(args) -> int:
    sentences = _segmented(args.inputs)
    records = list(replay_records(args.records).values()) if args.records else []
    _write(corpus_stats(sentences, records).to_json() + "\n", args.out)
    return 0


def _cmd_synth(args) -> int:
    corpus = ev.generate_synthetic(args.seed, args.n_per_class)
    if args.task == "all":
        if not args.out:
            raise CkeError("--task all needs --out DIRECTORY")
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for kind in ("hypothesis", "causality", "tagging"):
            (out_dir / f"{kind}.jsonl").write_text(corpus.to_jsonl(kind), encoding="utf-8")
        return 0
    _write(corpus.to_jsonl(args.task), args.out)
    return 0


def _cmd_train_hypothesis(args) -> int:
    dataset = _load_labeled(args.corpus)
    split = ev.SplitSpec(train_fraction=args.train_fraction, seed=args.seed)
    train_set, test_set = ev.stratified_split(ev._as_token_dataset(dataset), split)
    config = ec.ClassifierConfig(
        ngram_order=args.ngrams,
        learning_rate=args.lr,
        dim=args.dim,
        loss=args.loss,
        epochs=args.epochs,
        neg_samples=args.neg_samples,
        seed=args.seed,
    )
    model = ec.train(train_set, config)
    preds = [ec.predict(model, toks)[0] for toks, _ in test_set]
    report = ev.classification_report(preds, [lab for _, lab in test_set], args.positive_label)
    if args.out:
        save_model(args.out, model)
    print(json.dumps(report, sort_keys=True))
    return 0


def _cmd_grid(args) -> int:
    dataset = _load_labeled(args.corpus)
    report = ev.run_grid(
        dataset,
        grid=ev.default_grid(args.seed),
        split=ev.SplitSpec(seed=args.seed),
        positive_label=args.positive_label,
    )
    _write(report.to_csv() if args.format == "csv" else report.to_text(), args.out)
    return 0


def _cmd_explain(args) -> int:
    kind, model, _ = load_model(args.model)
    if kind != "embedding_classifier":
        raise CkeError(f"explain needs an embedding classifier, got {kind}")
    sentence_tokens = [t.surface for t in tokenize(args.sentence)]
    if not sentence_tokens:
        raise CkeError("sentence has no tokens")
    label = args.label or ec.predict(model, sentence_tokens)[0]

    def score(text: str) -> float:
        toks = [t.surface for t in tokenize(text)]
        if not toks:
            return 0.0
        return ec.predict(model, toks)[1][label]

    # short sentences get the exact full-design fit; sampling otherwise
    exhaustive = len(args.sentence.split()) <= 12 and not args.no_exhaustive
    result = explain(
        score, args.sentence, n_samples=args.n_samples, seed=args.seed,
        label=label, exhaustive=exhaustive,
    )
    _write(result.to_json() + "\n", args.out)
    return 0


def _cmd_train_causality(args) -> int:
    dataset = _load_labeled(args.corpus)
    split = ev.SplitSpec(train_fraction=args.train_fraction, seed=args.seed)
    train_set, test_set = ev.stratified_split(dataset, split)
    train_texts = [t for t, _ in train_set]
    test_texts = [t for t, _ in test_set]
    y_train = [1 if lab == args.positive_label else 0 for _, lab in train_set]
    y_test = [1 if lab == args.positive_label else 0 for _, lab in test_set]

    vocab = None
    if args.features == "bow":
        vocab, X_train, X_test = ev.prepare_causality_bow(train_texts, test_texts)
        dim = vocab.bucket_count
    else:
        _, X_train, X_test = ev.prepare_causality_docvec(
            train_texts, test_texts, seed=args.seed
        )
        dim = len(X_train[0])

    trainer = train_logistic if args.model == "logistic" else train_linear_svm
    model = trainer(X_train, y_train, seed=args.seed, dim=dim)
    preds = [predict_linear(model, x).label for x in X_test]
    report = ev.classification_report(preds, y_test, positive_label=1)
    report["features"] = args.features
    report["model"] = args.model
    if args.out:
        extras = {"vocab": vocab} if vocab is not None else {}
        save_model(args.out, model, **extras)
    print(json.dumps(report, sort_keys=True))
    return 0


def _cmd_train_tagger(args) -> int:
    rows = _load_tagging(args.corpus)
    vocab = build_vocab([toks for toks, _ in rows])
    split = ev.SplitSpec(train_fraction=args.train_fraction, seed=args.seed, stratify_by_label=False)
    train_rows, val_rows = ev.stratified_split(rows, split)
    encode = lambda r: (encode_sequence(r[0], vocab), list(r[1][:70]))
    train_ds = [encode(r) for r in train_rows]
    val_ds = [encode(r) for r in val_rows]
    config = TaggerConfig(
        embed_dim=args.embed_dim,
        hidden_units=args.hidden,
        batch_size=args.batch_size,
        epochs=args.epochs,
        lr=args.lr,
        seed=args.seed,
    )
    model, curve = train_tagger(train_ds, config, val_dataset=val_ds, vocab_size=vocab.vocab_size)
    if args.curve:
        Path(args.curve).write_text(curve.to_csv(), encoding="utf-8")
    preds = [tag_sentence(model, seq) for seq, _ in val_ds]
    overall, per_class = ev.token_and_class_accuracy(preds, [labs for _, labs in val_ds])
    report = {
        "overall_accuracy": overall,
        "per_class_recall": {str(k): v for k, v in per_class.items()},
        "epochs": args.epochs,
        "hidden_units": args.hidden,
    }
    if args.out:
        save_model(args.out, model, vocab=vocab)
    print(json.dumps(report, sort_keys=True))
    return 0


def _cmd_evaluate(args) -> int:
    kind, model, extras = load_model(args.model)
    if kind == "embedding_classifier":
        dataset = ev._as_token_dataset(_load_labeled(args.corpus))
        preds = [ec.predict(model, toks)[0] for toks, _ in dataset]
        report = ev.classification_report(
            preds, [lab for _, lab in dataset], args.positive_label
        )
    elif kind == "tagger":
        vocab = extras.get("vocab")
        if vocab is None:
            raise CkeError("tagger container lacks a vocabulary")
        rows = _load_tagging(args.corpus)
        ds = [(encode_sequence(toks, vocab), labs[:70]) for toks, labs in rows]
        preds = [tag_sentence(model, seq) for seq, _ in ds]
        overall, per_class = ev.token_and_class_accuracy(preds, [labs for _, labs in ds])
        report = {
            "overall_accuracy": overall,
            "per_class_recall": {str(k): v for k, v in per_class.items()},
        }
    elif kind == "linear":
        vocab = extras.get("vocab")
        if vocab is None:
            raise CkeError("linear container lacks a BOW vocabulary")
        dataset = _load_labeled(args.corpus)
        X = [
            bow_trigram_vector(remove_stopwords(tokenize(t)), vocab) for t, _ in dataset
        ]
        y = [1 if lab == args.positive_label else 0 for _, lab in dataset]
        preds = [predict_linear(model, x).label for x in X]
        report = ev.classification_report(preds, y, positive_label=1)
    else:
        raise CkeError(f"cannot evaluate container kind {kind}")
    print(json.dumps(report, sort_keys=True))
    return 0


def _cmd_export(args) -> int:
    store = AnnotationStore(args.store)
    _write(store.export_dataset(args.kind, args.format, seed=args.seed), args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    store = AnnotationStore(args.store)
    uvicorn.run(create_app(store), host=args.host, port=args.port, log_level="warning")
    return 0


# --- wiring ----------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="cke", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        p.add_argument("--seed", type=int, default=42)
        return p

    p = add("ingest", _cmd_ingest, help="load, clean, and segment documents")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--out")

    p = add("extract", _cmd_extract, help="mine hypothesis candidates")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--out")

    p = add("stats", _cmd_stats, help="corpus statistics as JSON")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--records", help="record log for label proportions")
    p.add_argument("--out")

    p = add("synth", _cmd_synth, help="generate the synthetic corpus")
    p.add_argument("--n-per-class", type=int, default=500)
    p.add_argument("--task", choices=["hypothesis", "causality", "tagging", "all"],
                   default="hypothesis")
    p.add_argument("--out")

    p = add("train-hypothesis", _cmd_train_hypothesis, help="train the sentence classifier")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")
    p.add_argument("--ngrams", type=int, default=1)
    p.add_argument("--lr", type=float, default=0.3)
    p.add_argument("--dim", type=int, default=120)
    p.add_argument("--loss", choices=[ec.SOFTMAX, ec.NEGATIVE_SAMPLING],
                   default=ec.NEGATIVE_SAMPLING)
    p.add_argument("--epochs", type=int, default=25)
    p.add_argument("--neg-samples", type=int, default=5)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--positive-label", default="hypothesis")

    p = add("grid", _cmd_grid, help="run the published hyperparameter grid")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "text"], default="csv")
    p.add_argument("--positive-label", default="hypothesis")

    p = add("explain", _cmd_explain, help="per-word explanation for one sentence")
    p.add_argument("--model", required=True)
    p.add_argument("--sentence", required=True)
    p.add_argument("--label")
    p.add_argument("--n-samples", type=int, default=500)
    p.add_argument("--no-exhaustive", action="store_true",
                   help="always sample, even for short sentences")
    p.add_argument("--out")

    p = add("train-causality", _cmd_train_causality, help="train causal-vs-associative models")
    p.add_argument("--corpus", required=True)
    p.add_argument("--features", choices=["bow", "docvec"], default="bow")
    p.add_argument("--model", choices=["logistic", "svm"], default="logistic")
    p.add_argument("--out")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--positive-label", default="causal")

    p = add("train-tagger", _cmd_train_tagger, help="train the entity tagger")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")
    p.add_argument("--curve", help="write the per-epoch accuracy CSV here")
    p.add_argument("--hidden", type=int, default=3)
    p.add_argument("--embed-dim", type=int, default=32)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--train-fraction", type=float, default=0.8)

    p = add("evaluate", _cmd_evaluate, help="evaluate a saved model on a JSONL corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--positive-label", default="hypothesis")

    p = add("export", _cmd_export, help="export a training dataset from a store")
    p.add_argument("--store", required=True)
    p.add_argument("--kind", choices=["hypothesis_cls", "causality_cls", "tagging"],
                   required=True)
    p.add_argument("--format", choices=["jsonl", "tsv"], default="jsonl")
    p.add_argument("--out")

    p = add("serve", _cmd_serve, help="run the annotation service")
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CkeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
