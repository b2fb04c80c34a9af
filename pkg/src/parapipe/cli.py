"""Command-line surface for the pipeline.

Every artifact-producing subcommand writes a manifest next to each output
file (<artifact>.manifest.json) and is byte-reproducible given the same
inputs and flags. Wall-clock timestamps go into manifests only with
--stamp, keeping unstamped reruns byte-identical.

Exit codes: 0 success, 1 data/backend error (machine-readable JSON on
stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone

from . import __version__
from .corpusio import (
    DatasetManifest,
    SplitSpec,
    aggregate_decay,
    audit_decay,
    carve_dev,
    classifier_profile,
    config_hash,
    decay_from_counts,
    filter_paraphrase_corpus,
    load_corpus_pairs,
    load_dataset,
    load_id_list,
    merge_corpora,
    paraphraser_profile,
    split_dataset,
    write_corpus_pairs,
    write_manifest,
    write_records,
)
from .errors import EmptyAfterNormalization, PipelineError
from .genclient import (
    GenerationParams,
    HttpBackend,
    backend_url_from_env,
    batch_generate,
    load_candidates_file,
)
from .metrics import (
    ScoreTable,
    corpus_bleu_report,
    global_average,
    macro_f1,
    render_table,
)
from .normalize import NormalizationConfig, count_emoji, normalize_tweet, strip_emoji
from .records import DATASET_CLASSES, TweetRecord
from .simfilter import FilterConfig, ParaphraseSet, build_para_clean, select_para_n

SOURCES_HELP = "PIT2015 | LanguageNet | Opusparcus | QQP"


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise PipelineError("config file must hold a JSON object")
    return cfg


def _norm_config(args, file_cfg: dict) -> NormalizationConfig:
    base = dict(file_cfg.get("normalization", {}))
    if getattr(args, "user_token", None) is not None:
        base["user_token"] = args.user_token
    if getattr(args, "url_token", None) is not None:
        base["url_token"] = args.url_token
    if getattr(args, "seed_hashtags", None) is not None:
        base["seed_hashtags"] = [s for s in args.seed_hashtags.split(",") if s.strip()]
    if getattr(args, "strip_emoji", False):
        base["strip_emoji"] = True
    return NormalizationConfig.from_dict(base)


def _filter_config(args, file_cfg: dict) -> FilterConfig:
    base = dict(file_cfg.get("filter", {}))
    for flag, key in (
        ("ngram_order", "ngram_order"),
        ("copy_threshold", "copy_threshold"),
        ("dedup_threshold", "dedup_threshold"),
        ("floor", "floor_similarity"),
    ):
        v = getattr(args, flag, None)
        if v is not None:
            base[key] = v
    return FilterConfig.from_dict(base)


def _gen_params(args, file_cfg: dict) -> GenerationParams:
    base = dict(file_cfg.get("generation", {}))
    for flag in ("num_return", "top_p", "max_length", "seed"):
        v = getattr(args, flag, None)
        if v is not None:
            base[flag] = v
    return GenerationParams.from_dict(base)


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _emit_manifest(args, artifact_path: str, **fields) -> None:
    manifest = DatasetManifest(
        dataset=fields.pop("dataset", ""),
        source=fields.pop("source", ""),
        tool_version=__version__,
        created_at=_now() if getattr(args, "stamp", False) else None,
        **fields,
    ).stamp()
    write_manifest(manifest, artifact_path + ".manifest.json")


def _print(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, ensure_ascii=False) + "\n")


def cmd_normalize(args) -> int:
    file_cfg = _load_config_file(args.config)
    cfg = _norm_config(args, file_cfg)
    records = load_dataset(args.infile, format=args.format, dataset=args.dataset)
    out, dropped, kept_raw = [], 0, 0
    for rec in records:
        try:
            out.append(normalize_tweet(rec, cfg))
        except EmptyAfterNormalization:
            if args.on_empty == "fail":
                raise
            if args.on_empty == "keep":
                out.append(rec)
                kept_raw += 1
            else:
                dropped += 1
    plan = {
        "input": len(records),
        "output": len(out),
        "dropped_empty": dropped,
        "kept_unnormalized": kept_raw,
    }
    if args.dry_run:
        _print({"dry_run": True, **plan})
        return 0
    write_records(out, args.out)
    _emit_manifest(
        args,
        args.out,
        dataset=args.dataset,
        source=args.infile,
        normalization_hash=config_hash(cfg.to_dict()),
        counts={"records": len(out)},
        extra=plan,
    )
    _print(plan)
    return 0


def cmd_split(args) -> int:
    file_cfg = _load_config_file(args.config)
    base = dict(file_cfg.get("split", {}))
    for flag in ("train_fraction", "dev_fraction", "test_fraction", "seed"):
        v = getattr(args, flag, None)
        if v is not None:
            base[flag] = v
    if args.stratify:
        base["stratify_by_label"] = True
    spec = SplitSpec.from_dict(base)
    records = load_dataset(args.infile, format=args.format, dataset=args.dataset)
    train, dev, test = split_dataset(records, spec)
    counts = {"train": len(train), "dev": len(dev), "test": len(test)}
    if args.dry_run:
        _print({"dry_run": True, **counts})
        return 0
    os.makedirs(args.out_dir, exist_ok=True)
    for name, part in (("train", train), ("dev", dev), ("test", test)):
        write_records(part, os.path.join(args.out_dir, f"{name}.jsonl"))
    _emit_manifest(
        args,
        os.path.join(args.out_dir, "split"),
        dataset=args.dataset,
        source=args.infile,
        split=spec.to_dict(),
        counts=counts,
    )
    _print(counts)
    return 0


def cmd_carve_dev(args) -> int:
    records = load_dataset(args.infile, format=args.format, dataset=args.dataset)
    train, dev = carve_dev(records, args.fraction, args.seed)
    counts = {"train": len(train), "dev": len(dev)}
    if args.dry_run:
        _print({"dry_run": True, **counts})
        return 0
    write_records(train, args.out_train)
    write_records(dev, args.out_dev)
    _emit_manifest(
        args,
        args.out_train,
        dataset=args.dataset,
        source=args.infile,
        split={"dev_fraction": args.fraction, "seed": args.seed},
        counts=counts,
    )
    _print(counts)
    return 0


def cmd_audit_decay(args) -> int:
    if args.aggregate:
        reports = []
        for path in args.aggregate:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
            reports.append(audit_decay_from_report(d))
        _print(aggregate_decay(reports))
        return 0
    if not args.orig or not args.retrieved:
        sys.stderr.write("audit-decay: --orig and --retrieved are required (or --aggregate)\n")
        return 2
    orig = load_id_list(args.orig)
    retr = load_id_list(args.retrieved)
    report = audit_decay(orig, retr, args.dataset)
    if args.dry_run:
        _print({"dry_run": True, **report.to_dict()})
        return 0
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n")
        _emit_manifest(
            args,
            args.out,
            dataset=args.dataset,
            source=f"{args.orig} vs {args.retrieved}",
            counts={
                "original": report.original_count,
                "retrieved": report.retrieved_count,
            },
        )
    _print(report.to_dict())
    return 0


def audit_decay_from_report(d: dict):
    return decay_from_counts(
        int(d["original_count"]), int(d["retrieved_count"]), d.get("dataset", "")
    )


def cmd_build_corpus(args) -> int:
    blocks = []
    wanted = []
    for spec in args.sources:
        if "=" not in spec:
            raise PipelineError(f"--sources expects SOURCE=path, got {spec!r}")
        source, path = spec.split("=", 1)
        pairs = load_corpus_pairs(path, source)
        kept = filter_paraphrase_corpus(pairs)
        blocks.append(kept)
        wanted.append((source, len(pairs), len(kept)))
    merged, counts = merge_corpora(blocks, drop_exact_duplicates=args.dedup)
    plan = {
        "per_source": {s: {"read": r, "kept": k} for s, r, k in wanted},
        "merged": len(merged),
        "dedup": args.dedup,
    }
    if args.dry_run:
        _print({"dry_run": True, **plan})
        return 0
    write_corpus_pairs(merged, args.out)
    _emit_manifest(
        args,
        args.out,
        dataset="paraphrase-corpus",
        source=", ".join(s for s, _, _ in wanted),
        counts={**counts, "total": len(merged)},
        extra=plan,
    )
    _print(plan)
    return 0


def cmd_generate(args) -> int:
    file_cfg = _load_config_file(args.config)
    params = _gen_params(args, file_cfg)
    records = load_dataset(args.infile, format=args.format, dataset=args.dataset)
    url = args.backend or file_cfg.get("backend") or backend_url_from_env()
    if args.dry_run:
        _print({"dry_run": True, "records": len(records), "backend": url,
                "params": params.to_dict()})
        return 0
    with HttpBackend(base_url=url) as backend:
        report = batch_generate(
            records, params, backend, args.out, concurrency_limit=args.concurrency
        )
    _emit_manifest(
        args,
        args.out,
        dataset=args.dataset,
        source=url,
        counts={"generated": report.generated, "skipped": report.skipped},
        extra={"params": params.to_dict(), "failures": report.failures},
    )
    _print(report.to_dict())
    if report.failures:
        sys.stderr.write(f"{len(report.failures)} records failed; see report\n")
    all_failed = report.failures and not (report.generated or report.skipped)
    return 1 if all_failed else 0


def cmd_para_clean(args) -> int:
    file_cfg = _load_config_file(args.config)
    cfg = _filter_config(args, file_cfg)
    records = load_dataset(args.infile, format=args.format, dataset=args.dataset)
    sets, unknown = load_candidates_file(args.candidates, records, strict=args.strict_ids)
    cleaned = build_para_clean(sets, cfg)
    survivors = sum(len(s.kept_candidates()) for s in cleaned)
    zero = sum(1 for s in cleaned if not s.kept_candidates())
    plan = {
        "originals": len(cleaned),
        "kept_candidates": survivors,
        "zero_survivor_originals": zero,
        "unknown_ids": len(unknown),
    }
    if args.dry_run:
        _print({"dry_run": True, **plan})
        return 0
    with open(args.out, "w", encoding="utf-8") as fh:
        for s in cleaned:
            fh.write(json.dumps(s.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")
    _emit_manifest(
        args,
        args.out,
        dataset=args.dataset,
        source=f"{args.infile} + {args.candidates}",
        filter_hash=config_hash(cfg.to_dict()),
        counts={"originals": len(cleaned), "kept_candidates": survivors},
        extra=plan,
    )
    _print(plan)
    return 0


def cmd_select_para_n(args) -> int:
    sets = []
    with open(args.infile, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                sets.append(ParaphraseSet.from_dict(json.loads(line)))
    rows = select_para_n(sets, args.n)
    plan = {"originals": len(sets), "n": args.n, "rows": len(rows)}
    if args.dry_run:
        _print({"dry_run": True, **plan})
        return 0
    write_records(rows, args.out)
    _emit_manifest(
        args,
        args.out,
        dataset=args.dataset,
        source=args.infile,
        counts={"rows": len(rows)},
        extra=plan,
    )
    _print(plan)
    return 0


def cmd_strip_emoji(args) -> int:
    records = load_dataset(args.infile, format=args.format, dataset=args.dataset)
    out, dropped, removed = [], 0, 0
    for rec in records:
        removed += count_emoji(rec.text)
        text = strip_emoji(rec.text)
        if not text:
            if args.on_empty == "fail":
                raise EmptyAfterNormalization(f"record {rec.id} is emoji-only")
            if args.on_empty == "keep":
                out.append(rec)
            else:
                dropped += 1
            continue
        out.append(TweetRecord(rec.id, text, rec.label, rec.topic, rec.dataset))
    plan = {"input": len(records), "output": len(out), "emoji_removed": removed,
            "dropped_empty": dropped}
    if args.dry_run:
        _print({"dry_run": True, **plan})
        return 0
    write_records(out, args.out)
    _emit_manifest(
        args,
        args.out,
        dataset=args.dataset,
        source=args.infile,
        counts={"records": len(out)},
        extra=plan,
    )
    _print(plan)
    return 0


def _read_predictions(path: str):
    gold, pred = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            try:
                gold.append(str(obj["gold"]))
                pred.append(str(obj["predicted"]))
            except KeyError as e:
                raise PipelineError(f"{path}:{lineno}: missing {e}") from None
    return gold, pred


def cmd_metrics(args) -> int:
    if args.mode == "bleu":
        if not args.refs or not args.hyps:
            sys.stderr.write("metrics --mode bleu: --refs and --hyps are required\n")
            return 2
        with open(args.refs, encoding="utf-8") as fh:
            refs = [line.split() for line in fh if line.strip()]
        with open(args.hyps, encoding="utf-8") as fh:
            hyps = [line.split() for line in fh if line.strip()]
        rep = corpus_bleu_report(refs, hyps)
        result = {
            "variant": "corpus-bleu4-uniform-bp",
            "score": rep.score,
            "smoothed_score": rep.smoothed_score,
            "precisions": list(rep.precisions),
            "brevity_penalty": rep.brevity_penalty,
        }
        if args.out and not args.dry_run:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(json.dumps(result, sort_keys=True, indent=2) + "\n")
        _print(result)
        return 0
    # f1 mode: repeated --pred dataset=path; same dataset repeated = runs
    if not args.pred:
        sys.stderr.write("metrics --mode f1: at least one --pred DATASET=path is required\n")
        return 2
    runs_by_dataset: dict[str, list] = {}
    for spec in args.pred:
        if "=" not in spec:
            raise PipelineError(f"--pred expects DATASET=path, got {spec!r}")
        name, path = spec.split("=", 1)
        gold, pred = _read_predictions(path)
        classes = list(DATASET_CLASSES.get(name, sorted(set(gold))))
        runs_by_dataset.setdefault(name, []).append(macro_f1(gold, pred, classes))
    scores = {}
    runs_out = {}
    for name, runs in runs_by_dataset.items():
        scores[name] = sum(runs) / len(runs)
        runs_out[name] = runs
    table = ScoreTable(scores=scores)
    result = {
        "per_dataset": scores,
        "runs": runs_out,
        "global_average": global_average(table),
    }
    if args.out and not args.dry_run:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(result, sort_keys=True, indent=2) + "\n")
    sys.stdout.write(render_table(table) + "\n")
    return 0


def cmd_export_train_config(args) -> int:
    if args.role == "paraphraser":
        profile = paraphraser_profile(args.model)
    else:
        profile = classifier_profile(args.model, dataset=args.dataset)
    blob = profile.to_dict()
    if args.dry_run:
        _print({"dry_run": True, **blob})
        return 0
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(blob, sort_keys=True, indent=2) + "\n")
    _print(blob)
    return 0


def _add_common(sp, *, data_in=True):
    sp.add_argument("--dry-run", action="store_true",
                    help="validate inputs and print planned counts; write nothing")
    sp.add_argument("--stamp", action="store_true",
                    help="record wall-clock creation time in manifests")
    sp.add_argument("--config", help="JSON config file; explicit flags win")
    if data_in:
        sp.add_argument("--in", dest="infile", required=True, help="input records file")
        sp.add_argument("--format", choices=("jsonl", "tsv"), default="jsonl")
        sp.add_argument("--dataset", default="", help="dataset tag for validation/manifests")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="parapipe",
        description="Paraphrase-based persistence pipeline for social media datasets",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("normalize", help="mask mentions/URLs, strip seed hashtags")
    _add_common(sp)
    sp.add_argument("--out", required=True)
    sp.add_argument("--user-token", dest="user_token")
    sp.add_argument("--url-token", dest="url_token")
    sp.add_argument("--seed-hashtags", dest="seed_hashtags",
                    help="comma-separated seed hashtags to remove")
    sp.add_argument("--strip-emoji", dest="strip_emoji", action="store_true")
    sp.add_argument("--on-empty", choices=("drop", "keep", "fail"), default="drop",
                    help="records empty after normalization: drop them, keep raw, or abort")
    sp.set_defaults(func=cmd_normalize)

    sp = sub.add_parser("split", help="seeded train/dev/test split")
    _add_common(sp)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--train-fraction", dest="train_fraction", type=float)
    sp.add_argument("--dev-fraction", dest="dev_fraction", type=float)
    sp.add_argument("--test-fraction", dest="test_fraction", type=float)
    sp.add_argument("--stratify", action="store_true")
    sp.set_defaults(func=cmd_split)

    sp = sub.add_parser("carve-dev", help="split a dev set off existing training data")
    _add_common(sp)
    sp.add_argument("--out-train", required=True)
    sp.add_argument("--out-dev", required=True)
    sp.add_argument("--fraction", type=float, default=0.10)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_carve_dev)

    sp = sub.add_parser("audit-decay", help="compare original vs retrieved ID lists")
    _add_common(sp, data_in=False)
    sp.add_argument("--orig", help="newline-delimited original IDs")
    sp.add_argument("--retrieved", help="newline-delimited retrieved IDs")
    sp.add_argument("--dataset", default="")
    sp.add_argument("--out", help="write the JSON report here")
    sp.add_argument("--aggregate", nargs="+",
                    help="aggregate existing report JSON files instead of auditing")
    sp.set_defaults(func=cmd_audit_decay)

    sp = sub.add_parser("build-corpus", help="filter and merge paraphrase pair sources")
    _add_common(sp, data_in=False)
    sp.add_argument("--sources", nargs="+", required=True,
                    help=f"SOURCE=path entries; sources: {SOURCES_HELP}")
    sp.add_argument("--out", required=True)
    sp.add_argument("--dedup", action="store_true",
                    help="drop exact duplicate pairs across sources")
    sp.set_defaults(func=cmd_build_corpus)

    sp = sub.add_parser("generate", help="request candidates from a generation backend")
    _add_common(sp)
    sp.add_argument("--out", required=True)
    sp.add_argument("--backend", help="backend base URL (or set env)")
    sp.add_argument("--num-return", dest="num_return", type=int)
    sp.add_argument("--top-p", dest="top_p", type=float)
    sp.add_argument("--max-length", dest="max_length", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--concurrency", type=int, default=8)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("para-clean", help="similarity-filter generated candidates")
    _add_common(sp)
    sp.add_argument("--candidates", required=True, help="candidates JSONL from generate")
    sp.add_argument("--out", required=True)
    sp.add_argument("--ngram-order", dest="ngram_order", type=int)
    sp.add_argument("--copy-threshold", dest="copy_threshold", type=float)
    sp.add_argument("--dedup-threshold", dest="dedup_threshold", type=float)
    sp.add_argument("--floor", dest="floor", type=float)
    sp.add_argument("--strict-ids", dest="strict_ids", action="store_true",
                    help="fail on candidate ids missing from the dataset")
    sp.set_defaults(func=cmd_para_clean)

    sp = sub.add_parser("select-para-n", help="take first n surviving candidates per original")
    _add_common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_select_para_n)

    sp = sub.add_parser("strip-emoji", help="remove emoji from record texts")
    _add_common(sp)
    sp.add_argument("--out", required=True)
    sp.add_argument("--on-empty", choices=("drop", "keep", "fail"), default="drop")
    sp.set_defaults(func=cmd_strip_emoji)

    sp = sub.add_parser("metrics", help="score predictions (macro F1 tables or BLEU)")
    _add_common(sp, data_in=False)
    sp.add_argument("--mode", choices=("f1", "bleu"), default="f1")
    sp.add_argument("--pred", nargs="+", default=[],
                    help="DATASET=path prediction files; repeat a dataset for runs")
    sp.add_argument("--refs", help="bleu mode: reference texts, one per line")
    sp.add_argument("--hyps", help="bleu mode: hypothesis texts, one per line")
    sp.add_argument("--out", help="write the JSON result here")
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("export-train-config", help="emit hyperparameter profiles for external trainers")
    _add_common(sp, data_in=False)
    sp.add_argument("--role", choices=("paraphraser", "classifier"), required=True)
    sp.add_argument("--model", required=True, help="model name tag for the export")
    sp.add_argument("--dataset", default="", help="classifier role: dataset tag (sets sequence cap)")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_export_train_config)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as e:
        sys.stderr.write(
            json.dumps({"error": type(e).__name__, "message": str(e)}) + "\n"
        )
        return 1
    except (ValueError, OSError) as e:
        sys.stderr.write(
            json.dumps({"error": type(e).__name__, "message": str(e)}) + "\n"
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
