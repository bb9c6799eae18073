"""Command-line entry points: offline audits, corpus sampling, the service.

Exit codes: 0 success, 1 runtime failure, 2 input validation. Human-readable
tables go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys
from pathlib import Path

from . import __version__
from .alignment import load_transcripts
from .corpus import (
    DEMOGRAPHIC_ATTRIBUTES,
    corpus_stats,
    load_corpus,
    save_corpus,
    stratified_sample,
)
from .errors import FairauditError
from .fairness import AuditConfig, audit_to_dict, run_audit
from .store import AuditStore, dump_json

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2


def _fail(code: int, exc: BaseException) -> int:
    print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return code


def _format_audit_table(doc: dict) -> str:
    lines = []
    lines.append(f"model_id:      {doc['model_id']}")
    lines.append(f"WER:           {doc['wer']:.4f}")
    lines.append(f"overall score: {doc['overall_score']:.2f}")
    if doc["faas"] is None:
        lines.append(f"FAAS:          undefined ({doc['faas_sentinel']})")
    else:
        lines.append(f"FAAS:          {doc['faas']:.2f}")
    lines.append(f"tier:          {doc['tier']}")
    lines.append("")
    lines.append(f"{'category':<20} {'score':>8} {'adjusted':>9} {'p-value':>9}  tier")
    for cat in doc["categories"]:
        lines.append(
            f"{cat['attribute']:<20} {cat['category_score']:>8.2f} "
            f"{cat['adjusted_score']:>9.2f} {cat['lrt']['p_value']:>9.4f}  {cat['tier']}"
        )
    return "\n".join(lines)


def cmd_audit(args) -> int:
    try:
        corpus = load_corpus(args.corpus)
        transcripts = load_transcripts(args.transcripts)
    except FileNotFoundError as exc:
        return _fail(EXIT_VALIDATION, exc)
    except FairauditError as exc:
        return _fail(EXIT_VALIDATION, exc)
    try:
        result = run_audit(corpus, transcripts, args.model_id, AuditConfig())
    except FairauditError as exc:
        return _fail(EXIT_VALIDATION, exc)
    doc = audit_to_dict(result)
    print(_format_audit_table(doc))
    if args.out:
        Path(args.out).write_text(dump_json(doc), encoding="utf-8")
    if args.store:
        AuditStore(args.store).save_audit(doc)
    return EXIT_OK


def cmd_sample(args) -> int:
    try:
        corpus = load_corpus(args.corpus)
        sampled = stratified_sample(corpus, args.fraction, args.seed)
    except (FileNotFoundError, FairauditError, ValueError) as exc:
        return _fail(EXIT_VALIDATION, exc)
    save_corpus(sampled, args.out)
    print(f"sampled {len(sampled)} of {len(corpus)} records -> {args.out}")
    return EXIT_OK


def cmd_stats(args) -> int:
    try:
        corpus = load_corpus(args.corpus)
    except (FileNotFoundError, FairauditError) as exc:
        return _fail(EXIT_VALIDATION, exc)
    stats = corpus_stats(corpus)
    print(f"records:        {stats.count}")
    print(f"total duration: {stats.total_duration_hrs:.2f} hrs")
    for attribute in DEMOGRAPHIC_ATTRIBUTES:
        print(f"entropy ({attribute}): {stats.entropies[attribute]:.2f}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    try:
        corpus = load_corpus(args.corpus)
        if args.sample_fraction < 1.0:
            corpus = stratified_sample(corpus, args.sample_fraction, args.seed)
    except (FileNotFoundError, FairauditError, ValueError) as exc:
        return _fail(EXIT_VALIDATION, exc)

    host, _, port_text = args.bind.rpartition(":")
    try:
        port = int(port_text)
    except ValueError as exc:
        return _fail(EXIT_VALIDATION, exc)

    # Bind the socket up front so an occupied port fails fast with exit 1.
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        sock.bind((host or "127.0.0.1", port))
        sock.listen(128)
    except OSError as exc:
        sock.close()
        return _fail(EXIT_RUNTIME, exc)

    store = AuditStore(args.store)
    app = create_app(corpus, store, ServiceConfig())
    print(
        f"serving corpus of {len(corpus)} utterances on {args.bind} "
        f"(store: {args.store})",
        file=sys.stderr,
    )
    server = uvicorn.Server(uvicorn.Config(app, fd=sock.fileno(), log_level="warning"))
    try:
        server.run()
    except KeyboardInterrupt:
        # uvicorn re-raises the captured SIGINT after its graceful shutdown.
        pass
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairaudit",
        description="Score ASR transcripts for accuracy and demographic fairness.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_audit = sub.add_parser("audit", help="run one offline audit")
    p_audit.add_argument("--corpus", required=True, help="reference corpus CSV")
    p_audit.add_argument("--transcripts", required=True, help="hypothesis CSV")
    p_audit.add_argument("--model-id", required=True, dest="model_id")
    p_audit.add_argument("--out", help="write the audit JSON here")
    p_audit.add_argument("--store", help="also persist into this store directory")
    p_audit.set_defaults(func=cmd_audit)

    p_sample = sub.add_parser("sample", help="stratified corpus subsample")
    p_sample.add_argument("--corpus", required=True)
    p_sample.add_argument("--fraction", type=float, default=0.1)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--out", required=True)
    p_sample.set_defaults(func=cmd_sample)

    p_stats = sub.add_parser("stats", help="corpus summary table")
    p_stats.add_argument("--corpus", required=True)
    p_stats.set_defaults(func=cmd_stats)

    p_serve = sub.add_parser("serve", help="run the audit web service")
    p_serve.add_argument("--corpus", default=os.environ.get("FAIRAUDIT_CORPUS"))
    p_serve.add_argument("--store", default=os.environ.get("FAIRAUDIT_STORE_DIR", "store"))
    p_serve.add_argument("--bind", default=os.environ.get("FAIRAUDIT_BIND", "127.0.0.1:8400"))
    p_serve.add_argument(
        "--sample-fraction",
        type=float,
        default=float(os.environ.get("FAIRAUDIT_SAMPLE_FRACTION", "1.0")),
    )
    p_serve.add_argument(
        "--seed", type=int, default=int(os.environ.get("FAIRAUDIT_SEED", "0"))
    )
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve" and not args.corpus:
        print("error: ValueError: serve requires --corpus or FAIRAUDIT_CORPUS", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except FairauditError as exc:
        return _fail(EXIT_RUNTIME, exc)


if __name__ == "__main__":
    sys.exit(main())
