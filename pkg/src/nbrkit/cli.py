"""Subcommand front door: ingest, perturb, embed, eval, report, all.

Exit codes: 0 success, 1 validation/usage error, 2 runtime error. Output files
are written atomically (temp file in the target directory, then rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .corpus import Corpus, corpus_stats, load_corpus
from .embed import (
    EmbeddingStore,
    hash_embed,
    load_store,
    remote_embed,
    RemoteConfig,
    save_store,
)
from .errors import FormatError, NbrError, ParseError, ValidationError
from .evaluate import RunConfig, build_report
from .linguistic import PretaggedAnalyzer
from .perturb import expand_codes, generate_variants, read_variants, registry_json, write_variants
from .report import EvalReport, emit, load_report

ENV_EMBED_URL = "NBR_EMBED_URL"

EVAL_TASKS = ("task1", "task2", "nn_ret", "aop", "similarity")


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here is exit 1 + usage text
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(f"{message}\n{self.format_usage()}")


class _UsageError(Exception):
    pass


def main() -> None:
    sys.exit(run(sys.argv[1:]))


def run(argv: Sequence[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help()
            return 1
        handler: Callable[[argparse.Namespace], None] = args.handler
        handler(args)
        return 0
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ParseError, ValidationError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NbrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nbrkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"nbrkit {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate a corpus file and print statistics")
    p.add_argument("--corpus", required=True)
    p.add_argument("--name", default=None)
    p.add_argument("--out", default=None, help="also write the stats JSON here")
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("perturb", help="generate textual-neighbor variants")
    p.add_argument("--corpus", required=True)
    p.add_argument("--codes", default="all", help="'all', a category (e.g. LO-DS), or a comma list")
    p.add_argument("--seed", type=int, default=0, help="global perturbation seed")
    p.add_argument("--pretagged", default=None, help="replay tags from this JSONL file")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_perturb)

    p = sub.add_parser("embed", help="embed a variants file into a vector store")
    p.add_argument("--variants", required=True)
    p.add_argument("--provider", choices=("hash", "file", "remote"), default="hash")
    p.add_argument("--dim", type=int, default=64, help="hash provider dimension")
    p.add_argument("--model", default="", help="model name (remote provider)")
    p.add_argument("--embed-url", default=None, help=f"remote endpoint (or ${ENV_EMBED_URL})")
    p.add_argument("--vectors-file", default=None, help="existing store (file provider)")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--threads", type=int, default=1, help="parallel remote batches")
    p.add_argument("--format", choices=("nbrv", "jsonl"), default="nbrv")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_embed)

    p = sub.add_parser("eval", help="score a store and write the report JSON")
    p.add_argument("--store", required=True)
    p.add_argument("--corpus", default=None, help="optional; document order defaults to sorted store ids")
    p.add_argument("--task", default="all", help=f"one of {', '.join(EVAL_TASKS)}, or 'all'")
    p.add_argument("--codes", default="all")
    p.add_argument("--norm", choices=("none", "l2", "standardize"), default="none")
    p.add_argument("--sample", type=int, default=1000, help="task1/task2 query sample size")
    p.add_argument("--aop-sample", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--pair-cap", type=int, default=2_000_000)
    p.add_argument("--stamp", action="store_true", help="record wall-clock time in the report")
    p.add_argument("--dump-ranked", default=None, metavar="PATH",
                   help="also write task1/task2 ranked lists as JSONL")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("report", help="convert a report JSON to csv or plotdata")
    p.add_argument("--report", required=True)
    p.add_argument("--format", choices=("json", "csv", "plotdata"), required=True)
    p.add_argument("--out", required=True, help="file for json, directory otherwise")
    p.set_defaults(handler=_cmd_report)

    p = sub.add_parser("all", help="full pipeline: perturb, embed, eval, report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--codes", default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--provider", choices=("hash", "remote"), default="hash")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--model", default="")
    p.add_argument("--embed-url", default=None)
    p.add_argument("--norm", choices=("none", "l2", "standardize"), default="none")
    p.add_argument("--task", default="all")
    p.add_argument("--sample", type=int, default=1000)
    p.add_argument("--aop-sample", type=int, default=2000)
    p.add_argument("--pair-cap", type=int, default=2_000_000)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--stamp", action="store_true")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=_cmd_all)

    p = sub.add_parser("registry", help="print the neighbor-class registry as JSON")
    p.set_defaults(handler=lambda args: print(registry_json()))
    return parser


# ---------------------------------------------------------------------------
# Atomic output helpers
# ---------------------------------------------------------------------------


def _atomic_write_via(path: Path, write: Callable[[Path], None]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    os.close(fd)
    tmp = Path(tmp_name)
    try:
        write(tmp)
        os.replace(tmp, path)
    finally:
        tmp.unlink(missing_ok=True)


def _emit_atomic(report: EvalReport, fmt: str, target: Path) -> list[Path]:
    if fmt == "json":
        _atomic_write_via(target, lambda tmp: emit(report, "json", tmp))
        return [target]
    target.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=target.parent) as tmpdir:
        produced = emit(report, fmt, Path(tmpdir))
        final = []
        for src in produced:
            dst = target / src.name
            os.replace(src, dst)
            final.append(dst)
    return final


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_ingest(args: argparse.Namespace) -> None:
    corpus = load_corpus(args.corpus, name=args.name)
    stats = corpus_stats(corpus)
    payload = {
        "corpus": corpus.name,
        "documents": stats.count,
        "mean_title_words": round(stats.mean_title_words, 2),
        "mean_abstract_words": round(stats.mean_abstract_words, 2),
        "empty_abstracts": stats.empty_abstracts,
    }
    text = json.dumps(payload, indent=2)
    print(text)
    if args.out:
        _atomic_write_via(Path(args.out), lambda tmp: tmp.write_text(text + "\n", encoding="utf-8"))


def _cmd_perturb(args: argparse.Namespace) -> None:
    corpus = load_corpus(args.corpus)
    codes = expand_codes(args.codes)
    analyzer = PretaggedAnalyzer.from_jsonl(args.pretagged) if args.pretagged else None
    variants = generate_variants(corpus, codes, args.seed, analyzer=analyzer)
    counter = {"n": 0}

    def write(tmp: Path) -> None:
        counter["n"] = write_variants(variants, tmp)

    _atomic_write_via(Path(args.out), write)
    print(f"wrote {counter['n']} variants ({len(codes)} codes x {len(corpus)} documents) to {args.out}")


def _cmd_embed(args: argparse.Namespace) -> None:
    variants = read_variants(args.variants)
    if args.provider == "hash":
        store = EmbeddingStore(model_name=f"hash3-{args.dim}")
        store.add_all(hash_embed(v, args.dim) for v in variants)
    elif args.provider == "file":
        if not args.vectors_file:
            raise ValidationError("--vectors-file is required with --provider file")
        source = load_store(args.vectors_file)
        store = EmbeddingStore(model_name=source.model_name, dimension=source.dimension)
        for v in variants:
            record = source.get(v.doc_id, v.code)
            if record is None:
                raise ValidationError(f"{args.vectors_file} has no vector for ({v.doc_id}, {v.code})")
            store.add(record)
    else:
        url = args.embed_url or os.environ.get(ENV_EMBED_URL)
        if not url:
            raise ValidationError(f"--embed-url or ${ENV_EMBED_URL} is required with --provider remote")
        config = RemoteConfig(
            endpoint=url, model=args.model, batch_size=args.batch_size, parallelism=args.threads
        )
        records = remote_embed(variants, url, args.model, config=config)
        store = EmbeddingStore(model_name=args.model)
        store.add_all(records)
    _atomic_write_via(Path(args.out), lambda tmp: save_store(store, tmp, fmt=args.format))
    print(f"embedded {len(store)} records (dim {store.dimension}) to {args.out}")


def _tasks_from_flag(flag: str) -> list[str]:
    if flag == "all":
        return list(EVAL_TASKS)
    tasks = [t.strip() for t in flag.split(",") if t.strip()]
    unknown = [t for t in tasks if t not in EVAL_TASKS]
    if unknown:
        raise ValidationError(f"unknown task(s) {unknown}; expected {EVAL_TASKS} or 'all'")
    return tasks


def _eval_codes(args: argparse.Namespace) -> list[str]:
    codes = expand_codes(args.codes)
    return [c for c in codes if c not in ("T", "T+A")]


def _cmd_eval(args: argparse.Namespace) -> None:
    store = load_store(args.store)
    if args.corpus:
        docs: Corpus | list[str] = load_corpus(args.corpus)
        corpus_name = docs.name
    else:
        docs = sorted({doc_id for doc_id, code in store.keys() if code == "T+A"})
        if not docs:
            raise ValidationError("store has no T+A records; cannot derive the document set")
        corpus_name = Path(args.store).stem
    config = RunConfig(
        corpus_path=args.corpus or args.store,
        corpus_name=corpus_name,
        codes=_eval_codes(args),
        sample_seed=args.seed,
        provider="file",
        model=store.model_name,
        dimension=store.dimension or 0,
        normalization=args.norm,
        tasks=_tasks_from_flag(args.task),
        task_sample=args.sample,
        aop_sample=args.aop_sample,
        pair_cap=args.pair_cap,
    )
    created = datetime.now(timezone.utc).isoformat(timespec="seconds") if args.stamp else None
    report = build_report(config, docs, store, created_at=created)
    _emit_atomic(report, "json", Path(args.out))
    if args.dump_ranked:
        from .embed import normalize_store
        from .retrieval import build_task1, build_task2, dump_rankings

        scored = normalize_store(store, args.norm)
        builder = build_task2 if "task2" in config.tasks else build_task1
        task = builder(docs, scored, sample_size=args.sample, seed=args.seed)
        n = dump_rankings(scored, task, args.dump_ranked)
        print(f"ranked lists for {n} {task.task_id} queries written to {args.dump_ranked}")
    print(f"report written to {args.out} (config digest {report.meta['config_digest'][:12]})")


def _cmd_report(args: argparse.Namespace) -> None:
    report = load_report(args.report)
    written = _emit_atomic(report, args.format, Path(args.out))
    print(f"wrote {len(written)} file(s) under {args.out}")


def _cmd_all(args: argparse.Namespace) -> None:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = load_corpus(args.corpus)
    codes = expand_codes(args.codes)
    eval_codes = [c for c in codes if c not in ("T", "T+A")]
    if "T" not in codes or "T+A" not in codes:
        codes = ["T+A", "T", *eval_codes]

    variants_path = out_dir / "variants.jsonl"
    variants = list(generate_variants(corpus, codes, args.seed))
    _atomic_write_via(variants_path, lambda tmp: write_variants(variants, tmp))

    if args.provider == "hash":
        store = EmbeddingStore(model_name=f"hash3-{args.dim}")
        store.add_all(hash_embed(v, args.dim) for v in variants)
    else:
        url = args.embed_url or os.environ.get(ENV_EMBED_URL)
        if not url:
            raise ValidationError(f"--embed-url or ${ENV_EMBED_URL} is required with --provider remote")
        config = RemoteConfig(
            endpoint=url, model=args.model, batch_size=args.batch_size, parallelism=args.threads
        )
        store = EmbeddingStore(model_name=args.model)
        store.add_all(remote_embed(variants, url, args.model, config=config))
    store_path = out_dir / "store.nbrv"
    _atomic_write_via(store_path, lambda tmp: save_store(store, tmp))

    run_config = RunConfig(
        corpus_path=str(args.corpus),
        corpus_name=corpus.name,
        codes=eval_codes,
        global_seed=args.seed,
        sample_seed=args.seed,
        provider=args.provider,
        model=store.model_name,
        dimension=store.dimension or 0,
        normalization=args.norm,
        tasks=_tasks_from_flag(args.task),
        task_sample=args.sample,
        aop_sample=args.aop_sample,
        pair_cap=args.pair_cap,
    )
    created = datetime.now(timezone.utc).isoformat(timespec="seconds") if args.stamp else None
    report = build_report(run_config, corpus, store, created_at=created)
    report_path = out_dir / "report.json"
    _emit_atomic(report, "json", report_path)
    _emit_atomic(report, "csv", out_dir / "csv")
    _emit_atomic(report, "plotdata", out_dir / "plotdata")
    print(f"pipeline complete: {variants_path}, {store_path}, {report_path}")
    print(f"config digest {report.meta['config_digest']}")


if __name__ == "__main__":
    main()
