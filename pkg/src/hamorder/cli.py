"""Command-line pipeline around the library.

corpus + embeddings -> similarity matrix -> minimum-similarity order ->
reordered dataset, plus diversity scoring, stage partitioning, a reusable
similarity cache, and the self-check battery.

Conventions: data goes to files or standard output, progress and warnings
to standard error. Exit codes: 0 success, 1 self-check failure, 2 usage or
configuration error, 3 I/O or file-format error. Every command loads and
validates all its inputs before writing anything, so a failing run leaves
no partial artifacts. HAMORDER_SEED and HAMORDER_THREADS provide
environment defaults; explicit flags win over them.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .corpus_io import (
    apply_order,
    load_corpus,
    load_order,
    read_embeddings,
    read_similarity,
    save_corpus,
    save_order,
    write_similarity,
)
from .diversity import dcscore, ngram_diversity, prefix_curve
from .errors import FormatError
from .ordering import CuriosityOrder, eta_ghs, exact_min_path, partition_stages, path_weight
from .similarity import build_similarity_matrix, extract_grams
from .validation import run_all

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_IO = 3

DEFAULT_SEED = 42
SEED_ENV = "HAMORDER_SEED"
THREADS_ENV = "HAMORDER_THREADS"


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        return int(env)
    return DEFAULT_SEED


def _parse_ratios(text: str) -> list[float]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty ratio list")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _load_matrix(args):
    """Similarity matrix from --similarity (precomputed cache) or
    --embeddings (computed here); returns (matrix, source metadata)."""
    if getattr(args, "similarity", None):
        M = read_similarity(args.similarity)
        return M, {"similarity": os.path.basename(args.similarity)}
    if getattr(args, "embeddings", None):
        E = read_embeddings(args.embeddings)
        _log(f"computing {E.n}x{E.n} similarity matrix from {E.n}x{E.d} embeddings")
        return build_similarity_matrix(E), {
            "embeddings": os.path.basename(args.embeddings)
        }
    raise ValueError("one of --embeddings or --similarity is required")


def _order_from_file(path, M) -> CuriosityOrder:
    of = load_order(path, M)
    p = tuple(of.indices)
    return CuriosityOrder(path=p, weight=path_weight(p, M), generator="loaded")


def cmd_order(args) -> int:
    if args.eta < 1:
        raise ValueError(f"--eta must be >= 1, got {args.eta}")
    if args.restarts is not None and args.restarts < 1:
        raise ValueError(f"--restarts must be >= 1, got {args.restarts}")
    seed = _resolve_seed(args)
    corpus = load_corpus(args.corpus, text_field=args.text_field, id_field=args.id_field)
    M, sources = _load_matrix(args)
    if M.n != corpus.n:
        raise ValueError(
            f"count mismatch: corpus has {corpus.n} samples, matrix is {M.n}x{M.n}"
        )
    if args.exact:
        _log(f"exact search over n={M.n}")
        order = exact_min_path(M, closed=args.cycle)
    else:
        order = eta_ghs(
            M,
            eta=args.eta,
            restarts=args.restarts,
            seed=seed,
            closed=args.cycle,
            threads=args.threads,
        )
        _log(f"best of {order.restarts} restarts (eta={order.eta}, seed={seed})")
    meta = dict(sources)
    meta["corpus"] = os.path.basename(args.corpus)
    meta["cycle"] = bool(args.cycle)
    order_file = order.to_order_file(extra_metadata=meta)
    save_order(order_file, args.order_out)
    save_corpus(apply_order(corpus, order_file), args.corpus_out)
    print(
        json.dumps(
            {
                "n": order.n,
                "weight": order.weight,
                "generator": order.generator,
                "eta": order.eta,
                "restarts": order.restarts,
                "seed": order.seed,
                "cycle": bool(args.cycle),
            }
        )
    )
    return EXIT_OK


def cmd_score(args) -> int:
    if args.p < 0:
        raise ValueError(f"--p must be >= 0, got {args.p}")
    if args.m < 1:
        raise ValueError(f"--m must be >= 1, got {args.m}")
    if args.metric == "ngram":
        if not args.corpus:
            raise ValueError("--metric ngram requires --corpus")
        corpus = load_corpus(args.corpus, text_field=args.text_field)
        report = ngram_diversity(extract_grams(corpus, args.m), p=args.p)
        print(json.dumps(report.as_dict()))
        return EXIT_OK
    M, _ = _load_matrix(args)
    if args.ratios:
        if args.order:
            order = _order_from_file(args.order, M)
        else:
            identity = tuple(range(M.n))
            order = CuriosityOrder(
                path=identity, weight=path_weight(identity, M), generator="identity"
            )
        reports = prefix_curve(order, M, p=args.p, ratios=args.ratios)
        out = open(args.csv_out, "w", newline="") if args.csv_out else sys.stdout
        try:
            writer = csv.writer(out)
            writer.writerow(["ratio", "n", "raw", "adjusted"])
            for ratio, rep in zip(args.ratios, reports):
                writer.writerow([ratio, rep.n, repr(rep.raw), repr(rep.adjusted)])
        finally:
            if out is not sys.stdout:
                out.close()
        return EXIT_OK
    report = dcscore(M, p=args.p)
    print(json.dumps(report.as_dict()))
    return EXIT_OK


def cmd_partition(args) -> int:
    if args.p < 0:
        raise ValueError(f"--p must be >= 0, got {args.p}")
    corpus = load_corpus(args.corpus, text_field=args.text_field)
    M, _ = _load_matrix(args)
    if M.n != corpus.n:
        raise ValueError(
            f"count mismatch: corpus has {corpus.n} samples, matrix is {M.n}x{M.n}"
        )
    order = _order_from_file(args.order, M)
    partition = partition_stages(order, args.k)
    width = len(str(args.k))
    entries = []
    for i, stage in enumerate(partition.stages, start=1):
        rep = dcscore(M.submatrix(stage), p=args.p)
        entries.append(
            {
                "file": f"stage-{i:0{width}d}.jsonl",
                "indices": list(stage),
                "size": len(stage),
                "dcscore_raw": rep.raw,
                "dcscore_adjusted": rep.adjusted,
            }
        )
    os.makedirs(args.out_dir, exist_ok=True)
    for entry, stage in zip(entries, partition.stages):
        rows = [corpus[i] for i in stage]
        with open(os.path.join(args.out_dir, entry["file"]), "w", encoding="utf-8") as fh:
            for sample in rows:
                rec = {corpus.text_field: sample.text}
                rec.update(sample.payload)
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    manifest = {
        "k": args.k,
        "p": args.p,
        "order_weight": order.weight,
        "stages": entries,
    }
    with open(os.path.join(args.out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    print(json.dumps({"k": args.k, "sizes": [e["size"] for e in entries]}))
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.trials < 1:
        raise ValueError(f"--trials must be >= 1, got {args.trials}")
    if args.monotonicity_trials < 1:
        raise ValueError(
            f"--monotonicity-trials must be >= 1, got {args.monotonicity_trials}"
        )
    if args.gap_trials < 1:
        raise ValueError(f"--gap-trials must be >= 1, got {args.gap_trials}")
    seed = _resolve_seed(args)
    reports = run_all(
        seed=seed,
        trials=args.trials,
        monotonicity_trials=args.monotonicity_trials,
        gap_trials=args.gap_trials,
    )
    payload = {
        "seed": seed,
        "all_passed": all(r.passed for r in reports),
        "checks": [r.as_dict() for r in reports],
    }
    text = json.dumps(payload, indent=2) + "\n"
    if args.report_out:
        with open(args.report_out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for r in reports:
        _log(f"{r.check_name}: {'pass' if r.passed else 'FAIL'}")
    return EXIT_OK if payload["all_passed"] else EXIT_VALIDATION


def cmd_sim_cache(args) -> int:
    E = read_embeddings(args.embeddings)
    _log(f"building {E.n}x{E.n} similarity matrix")
    M = build_similarity_matrix(E)
    write_similarity(M, args.out)
    print(json.dumps({"n": M.n, "out": os.path.basename(args.out)}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hamorder",
        description="Reorder a training corpus along a minimum-similarity path "
        "and score dataset diversity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_matrix_source(p, required):
        group = p.add_mutually_exclusive_group(required=required)
        group.add_argument("--embeddings", help="HAMEMB01 embedding file")
        group.add_argument("--similarity", help="HAMSIM01 similarity cache")

    p_order = sub.add_parser("order", help="compute a minimum-similarity order")
    p_order.add_argument("corpus", help="JSONL corpus")
    add_matrix_source(p_order, required=True)
    p_order.add_argument("--order-out", required=True, help="output order file (JSON)")
    p_order.add_argument("--corpus-out", required=True, help="reordered JSONL corpus")
    p_order.add_argument("--eta", type=int, default=3, help="greedy branching width")
    p_order.add_argument(
        "--restarts", type=int, default=None, help="restart count (default min(n//2, 64))"
    )
    p_order.add_argument("--seed", type=int, default=None)
    p_order.add_argument("--threads", type=int, default=None)
    p_order.add_argument(
        "--exact", action="store_true", help="exhaustive solver (small n only)"
    )
    p_order.add_argument(
        "--cycle", action="store_true", help="also count the edge closing the loop"
    )
    p_order.add_argument("--text-field", default=None)
    p_order.add_argument("--id-field", default="id")
    p_order.set_defaults(func=cmd_order)

    p_score = sub.add_parser("score", help="diversity metrics and prefix curves")
    p_score.add_argument("--metric", choices=["dcscore", "ngram"], default="dcscore")
    p_score.add_argument("--corpus", help="JSONL corpus (ngram metric)")
    add_matrix_source(p_score, required=False)
    p_score.add_argument("--p", type=float, default=0.5, help="size-adjustment exponent")
    p_score.add_argument("--m", type=int, default=2, help="gram length")
    p_score.add_argument(
        "--ratios",
        type=_parse_ratios,
        default=None,
        help="comma-separated prefix ratios; emits a CSV curve",
    )
    p_score.add_argument("--order", help="order file defining the prefix sequence")
    p_score.add_argument("--csv-out", help="write the curve here instead of stdout")
    p_score.add_argument("--text-field", default=None)
    p_score.set_defaults(func=cmd_score)

    p_part = sub.add_parser("partition", help="cut an order into training stages")
    p_part.add_argument("corpus", help="JSONL corpus")
    p_part.add_argument("--order", required=True, help="order file (JSON)")
    add_matrix_source(p_part, required=True)
    p_part.add_argument("--k", type=int, required=True, help="stage count")
    p_part.add_argument("--out-dir", required=True)
    p_part.add_argument("--p", type=float, default=0.5)
    p_part.add_argument("--text-field", default=None)
    p_part.set_defaults(func=cmd_partition)

    p_val = sub.add_parser("validate", help="run the self-check battery")
    p_val.add_argument("--seed", type=int, default=None)
    p_val.add_argument("--trials", type=int, default=200)
    p_val.add_argument("--monotonicity-trials", type=int, default=1000)
    p_val.add_argument("--gap-trials", type=int, default=20)
    p_val.add_argument("--report-out", help="write the JSON report here")
    p_val.set_defaults(func=cmd_validate)

    p_sim = sub.add_parser("sim-cache", help="precompute and store the similarity matrix")
    p_sim.add_argument("--embeddings", required=True, help="HAMEMB01 embedding file")
    p_sim.add_argument("--out", required=True, help="HAMSIM01 output path")
    p_sim.set_defaults(func=cmd_sim_cache)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        _log(f"error: {exc}")
        return EXIT_IO
    except OSError as exc:
        _log(f"error: {exc}")
        return EXIT_IO
    except ValueError as exc:
        _log(f"error: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
