"""Command line front end: corpus.jsonl in, HAMEMB01 file out."""

from __future__ import annotations

import argparse
import sys

from .backends import BackendError
from .corpus import CorpusError, load_corpus
from .extract import DEFAULT_BATCH_SIZE, DEFAULT_MAX_LENGTH, ExtractConfig, extract

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_BACKEND = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-extract",
        description="Embed a JSON-Lines corpus into a HAMEMB01 embedding file.",
    )
    parser.add_argument("corpus", help="JSON-Lines corpus, one object per line")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--model", help="local transformers checkpoint path or name")
    source.add_argument("--endpoint", help="remote embedding service URL")
    parser.add_argument("--out", required=True, help="output embedding file path")
    parser.add_argument("--text-field", default=None, help="corpus field holding the text")
    parser.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    parser.add_argument("--max-length", type=int, default=DEFAULT_MAX_LENGTH)
    parser.add_argument(
        "--layer",
        type=int,
        default=-1,
        help="hidden-state index to pool; -1 is the final layer (local model only)",
    )
    parser.add_argument("--retries", type=int, default=3, help="endpoint retry count")
    parser.add_argument("--backoff", type=float, default=0.5, help="base retry delay, seconds")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = ExtractConfig(
            model=args.model,
            endpoint=args.endpoint,
            output_path=args.out,
            batch_size=args.batch_size,
            max_length=args.max_length,
            layer=args.layer,
            retries=args.retries,
            backoff=args.backoff,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        corpus = load_corpus(args.corpus, text_field=args.text_field)
    except (CorpusError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        matrix = extract(config, corpus)
    except BackendError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {matrix.shape[0]} x {matrix.shape[1]} embeddings to {config.output_path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
