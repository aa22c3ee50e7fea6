"""Command-line entry point: evaluate, prompts, and embed subcommands."""

import argparse
import json
import os
import sys
import threading
from pathlib import Path

from .audio_io import PIPELINE_RATE, decode_wav, downmix_mono, resample
from .embeddings import BackendSpec, embed, load_backend
from .errors import ClonevalError
from .features import FEATURE_IDS
from .pipeline import (
    EvalConfig,
    aggregate,
    discover_pairs,
    evaluate_corpus,
    load_alias_table,
    make_prompt_assignments,
    write_reports,
)

EXIT_OK = 0
EXIT_RUN_FAILURE = 1
EXIT_USAGE = 2

ALIAS_TABLE_ENV = "CLONEVAL_ALIAS_TABLE"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cloneval",
        description="Voice-cloning evaluation: speaker-embedding and acoustic-feature "
        "similarity between reference and generated audio.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="score reference/generated pairs and write reports")
    ev.add_argument("--reference-dir", required=True, help="directory of reference WAVs")
    ev.add_argument("--generated-dir", required=True, help="directory of generated WAVs")
    ev.add_argument("--output-dir", required=True, help="where details.csv and summary.json go")
    ev.add_argument("--embedding-model", help="ONNX speaker-embedding model path")
    ev.add_argument("--embeddings-ref", help="precomputed embedding JSON for the reference side")
    ev.add_argument("--embeddings-gen", help="precomputed embedding JSON for the generated side")
    ev.add_argument("--no-embedding", action="store_true", help="skip the embedding metric")
    ev.add_argument("--features", help="comma-separated feature subset (default: all)")
    ev.add_argument("--emotions", choices=("auto", "off"), default="auto",
                    help="auto: parse labels from filenames; off: force unknown")
    ev.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                    help="worker threads; results do not depend on this")
    ev.add_argument("--expected-dim", type=int, help="require this embedding dimension")
    ev.add_argument("--dump-features", help="also write every feature summary to this JSONL file")

    pr = sub.add_parser("prompts", help="draw a text prompt for each sample from the others")
    pr.add_argument("--manifest", required=True, help="TSV: sample_id<TAB>text")
    pr.add_argument("--seed", type=int, required=True)
    pr.add_argument("--out", required=True, help="output TSV: sample_id<TAB>source<TAB>text")

    em = sub.add_parser("embed", help="precompute embeddings for a directory of WAVs")
    em.add_argument("--input-dir", required=True)
    em.add_argument("--model", required=True, help="ONNX speaker-embedding model path")
    em.add_argument("--out", required=True, help="output JSON manifest path")
    return parser


def _parse_features(arg: str | None, parser):
    if arg is None:
        return FEATURE_IDS
    requested = tuple(name.strip() for name in arg.split(",") if name.strip())
    unknown = [name for name in requested if name not in FEATURE_IDS]
    if unknown:
        parser.error(f"unknown features: {', '.join(unknown)}")
    return requested


def _cmd_evaluate(args, parser) -> int:
    embedding_modes = sum(
        [args.embedding_model is not None,
         args.embeddings_ref is not None or args.embeddings_gen is not None,
         args.no_embedding]
    )
    if embedding_modes != 1:
        parser.error(
            "choose exactly one of --embedding-model, "
            "--embeddings-ref/--embeddings-gen, or --no-embedding"
        )
    if (args.embeddings_ref is None) != (args.embeddings_gen is None):
        parser.error("--embeddings-ref and --embeddings-gen must be given together")
    for name in ("reference_dir", "generated_dir"):
        if not Path(getattr(args, name)).is_dir():
            parser.error(f"--{name.replace('_', '-')} is not a directory")
    features = _parse_features(args.features, parser)

    alias_table = None
    alias_path = os.environ.get(ALIAS_TABLE_ENV)
    if alias_path:
        try:
            alias_table = load_alias_table(alias_path)
        except ClonevalError as exc:
            parser.error(str(exc))

    backend_ref = backend_gen = None
    if args.embedding_model:
        backend_ref = backend_gen = load_backend(
            BackendSpec(model_path=args.embedding_model, expected_dim=args.expected_dim)
        )
    elif args.embeddings_ref:
        backend_ref = load_backend(
            BackendSpec(precomputed_path=args.embeddings_ref, expected_dim=args.expected_dim)
        )
        backend_gen = load_backend(
            BackendSpec(precomputed_path=args.embeddings_gen, expected_dim=args.expected_dim)
        )

    pairs, unmatched_ref, unmatched_gen = discover_pairs(args.reference_dir, args.generated_dir)
    for name in unmatched_ref:
        print(f"warning: unmatched reference file {name}", file=sys.stderr)
    for name in unmatched_gen:
        print(f"warning: unmatched generated file {name}", file=sys.stderr)

    dump_lines = []
    dump = None
    if args.dump_features:
        lock = threading.Lock()

        def dump(pair_id, side, summary):
            line = json.dumps(
                {"pair_id": pair_id, "side": side, "feature_id": summary.feature_id,
                 "vector": [float(v) for v in summary.vector]},
                sort_keys=True,
            )
            with lock:
                dump_lines.append(line)

    config = EvalConfig(
        features=features,
        backend_ref=backend_ref,
        backend_gen=backend_gen,
        emotions=args.emotions,
        alias_table=alias_table,
        workers=max(1, args.workers),
    )
    records, errors = evaluate_corpus(pairs, config, dump=dump)
    for pair_id in sorted(errors):
        print(f"warning: pair {pair_id} failed: {errors[pair_id]}", file=sys.stderr)

    summary = aggregate(records, config.fingerprint())
    details_path, summary_path = write_reports(records, summary, args.output_dir, errors)

    if args.dump_features:
        dump_lines.sort()
        with open(args.dump_features, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(dump_lines) + "\n")

    print(f"pairs evaluated: {len(records)} (failed: {len(errors)})")
    for metric, value in summary.overall.items():
        print(f"{metric} {value:.6f}")
    print(f"reports: {details_path} {summary_path}")
    return EXIT_OK


def _cmd_prompts(args) -> int:
    manifest = []
    with open(args.manifest, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ClonevalError(f"{args.manifest}:{line_no}: expected sample_id<TAB>text")
            manifest.append((parts[0], parts[1]))
    assignments = make_prompt_assignments(manifest, args.seed)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        for a in assignments:
            fh.write(f"{a.sample_id}\t{a.source_sample_id}\t{a.assigned_text}\n")
    print(f"wrote {len(assignments)} assignments to {args.out}")
    return EXIT_OK


def _cmd_embed(args) -> int:
    wavs = sorted(
        p for p in Path(args.input_dir).iterdir()
        if p.is_file() and p.suffix.lower() == ".wav"
    )
    if not wavs:
        raise ClonevalError(f"no audio files in {args.input_dir}")
    backend = load_backend(BackendSpec(model_path=args.model))
    manifest = {}
    for path in wavs:
        buf = resample(downmix_mono(decode_wav(path.read_bytes())), PIPELINE_RATE)
        manifest[path.stem] = [float(v) for v in embed(backend, buf, key=path.stem).vector]
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(manifest)} embeddings to {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "evaluate":
            return _cmd_evaluate(args, parser)
        if args.command == "prompts":
            return _cmd_prompts(args)
        return _cmd_embed(args)
    except ClonevalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILURE


if __name__ == "__main__":
    sys.exit(main())
