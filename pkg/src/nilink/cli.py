"""Command-line entry point: one subcommand per pipeline stage.

Options can come from a ``key = value`` config file (``--config``); explicit
flags always win. All randomness flows from ``--seed``. The ``NILINK_LOG``
environment variable sets the log level.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import corpus, dataset, evaluation, typesys
from .errors import ContractViolation, ValidationError
from .model import linker

logger = logging.getLogger("nilink")


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated ratios")
    return parts[0], parts[1], parts[2]


def _parse_fractions(text: str) -> list[float]:
    return [float(p) for p in text.split(",")]


def _coerce(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    return value


def load_config_file(path) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, raw = line.partition("=")
            if not _:
                raise ContractViolation(f"config line without '=': {line!r}")
            values[key.strip().replace("-", "_")] = _coerce(raw.strip())
    return values


def _add_model_flags(sp) -> None:
    sp.add_argument("--mode", choices=[linker.BI, linker.CROSS], default=linker.CROSS)
    sp.add_argument("--dim", type=int, default=32, help="embedding dimension")
    sp.add_argument("--vocab", type=int, default=4096, help="hashed vocabulary size")
    sp.add_argument("--lam", type=float, default=0.5, help="semantic/type score weight")
    sp.add_argument("--epsilon", type=float, default=0.5, help="NIL threshold")
    sp.add_argument("--gamma", type=float, default=2.0, help="focal-loss exponent")
    sp.add_argument("--lr", type=float, default=1e-5)
    sp.add_argument("--epochs", type=int, default=4)
    sp.add_argument("--batch-size", type=int, default=1)
    sp.add_argument("--no-typing", action="store_true", help="train without the typing task")


def _model_config(args) -> linker.LinkerConfig:
    return linker.LinkerConfig(
        mode=args.mode,
        embed_dim=args.dim,
        hash_vocab=args.vocab,
        lam=args.lam,
        nil_threshold=args.epsilon,
        focal_gamma=args.gamma,
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        rng_seed=args.seed,
        typing_enabled=not args.no_typing,
    )


def _load_types(types_dir) -> tuple[typesys.TypeSystem, dict[str, str]]:
    tdir = Path(types_dir)
    system = typesys.load_type_system(tdir / "types.tsv")
    assignment = typesys.load_assignment(tdir / "assignments.tsv")
    return system, assignment


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="nilink", description=__doc__)
    parser.add_argument("--config", help="key = value config file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers: dict[str, argparse.ArgumentParser] = {}
    _original_add = sub.add_parser

    def add_parser(name, **kwargs):
        sp = _original_add(name, **kwargs)
        subparsers[name] = sp
        return sp

    sub.add_parser = add_parser

    sp = sub.add_parser("build-alias", help="build the alias table from a corpus")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("build-types", help="build the type system from relation files")
    sp.add_argument("--instance-of", required=True)
    sp.add_argument("--subclass-of", required=True)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--top-level", action="store_true", help="restrict to the 14 top-level types")

    sp = sub.add_parser("make-dataset", help="select seeds, discover and filter entries")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--num-seeds", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-per-provenance", type=int, default=5)

    sp = sub.add_parser("mask", help="mask gold entities out of positive entries")
    sp.add_argument("--entries", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--mask-rate", type=float, default=0.1)
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("split", help="split entries into train/validation/test")
    sp.add_argument("--entries", required=True)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--split", type=_parse_ratios, default=(0.8, 0.1, 0.1))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--group-by-mention", action="store_true")

    sp = sub.add_parser("stats", help="print dataset statistics")
    sp.add_argument("--entries", required=True)

    sp = sub.add_parser("serve", help="run the annotation service")
    sp.add_argument("--port", type=int, default=8080)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--data-dir", required=True)
    sp.add_argument("--session-id", required=True)
    sp.add_argument("--entries", help="entry file (required when creating a session)")
    sp.add_argument("--kb", help="knowledge base file with candidate cards")
    sp.add_argument("--annotators", help="three comma-separated annotator ids")
    sp.add_argument("--expert", help="expert id")
    sp.add_argument("--static-dir", help="directory with the built UI assets")

    sp = sub.add_parser("train", help="train a linker")
    sp.add_argument("--train", dest="train_file", required=True)
    sp.add_argument("--types-dir", required=True)
    sp.add_argument("--kb", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--log", help="per-epoch loss log file")
    sp.add_argument("--seed", type=int, default=0)
    _add_model_flags(sp)

    sp = sub.add_parser("eval", help="evaluate a checkpoint")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--entries", required=True)
    sp.add_argument("--types-dir", required=True)
    sp.add_argument("--kb", required=True)
    sp.add_argument("--out", help="report file (default: print)")
    sp.add_argument("--lam", type=float, help="override the stored lambda")
    sp.add_argument("--epsilon", type=float, help="override the stored threshold")

    sp = sub.add_parser("ablate", help="NIL-data or typing ablation")
    sp.add_argument("--kind", choices=["nil", "typing"], required=True)
    sp.add_argument("--train", dest="train_file", required=True)
    sp.add_argument("--test", dest="test_file", required=True)
    sp.add_argument("--types-dir", required=True)
    sp.add_argument("--kb", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--fractions", type=_parse_fractions, default=[0.0, 0.25, 0.5, 0.75, 1.0])
    sp.add_argument(
        "--pattern-filter",
        choices=[evaluation.ALL_NIL, evaluation.NON_ENTITY_ONLY],
        default=evaluation.ALL_NIL,
    )
    sp.add_argument("--plot", help="also render the curve to this image file")
    sp.add_argument("--seed", type=int, default=0)
    _add_model_flags(sp)

    return parser, subparsers


def cmd_build_alias(args) -> int:
    docs = corpus.read_corpus(args.corpus)
    table = corpus.build_alias_table(docs)
    corpus.save_alias_table(table, args.out)
    print(f"{len(table.entries)} aliases over {len(docs)} documents -> {args.out}")
    return 0


def cmd_build_types(args) -> int:
    instance_of = typesys.load_pairs(args.instance_of)
    subclass_of = typesys.load_pairs(args.subclass_of)
    system, assignment = typesys.build_type_system(instance_of, subclass_of)
    if args.top_level:
        assignment = typesys.restrict_assignment(system, assignment)
        system = typesys.restrict_top_level(system)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    typesys.save_type_system(system, out / "types.tsv")
    typesys.save_assignment(assignment, out / "assignments.tsv")
    typesys.save_type_lines(sorted(assignment), system, assignment, out / "type_lines.tsv")
    print(f"{system.n_t} types, {len(assignment)} assigned entities -> {out}")
    return 0


def cmd_make_dataset(args) -> int:
    docs = corpus.read_corpus(args.corpus)
    table = corpus.build_alias_table(docs)
    seeds = dataset.select_seed_entities(table, k=args.num_seeds, rng_seed=args.seed)
    discovered = dataset.discover_entries(
        seeds, docs, table, max_per_provenance=args.max_per_provenance, rng_seed=args.seed
    )
    kept, reasons = dataset.filter_entries(discovered, table)
    dataset.save_entries(kept, args.out)
    discarded = ", ".join(f"{k}={v}" for k, v in sorted(reasons.items())) or "none"
    print(
        f"{len(seeds)} seeds, {len(discovered)} discovered, {len(kept)} kept "
        f"(discarded: {discarded}) -> {args.out}"
    )
    return 0


def cmd_mask(args) -> int:
    entries = dataset.load_entries(args.entries)
    masked = dataset.mask_positives(entries, args.mask_rate, rng_seed=args.seed)
    dataset.save_entries(masked, args.out)
    n = sum(1 for e in masked if e.masked)
    print(f"masked {n} of {len(entries)} entries -> {args.out}")
    return 0


def cmd_split(args) -> int:
    entries = dataset.load_entries(args.entries)
    splits = dataset.split_dataset(
        entries, args.split, rng_seed=args.seed, group_by_mention=args.group_by_mention
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, part in splits.items():
        dataset.save_entries(part, out / f"{name}.jsonl")
    sizes = "/".join(str(len(splits[k])) for k in ("train", "validation", "test"))
    print(f"split {len(entries)} entries into {sizes} -> {out}")
    return 0


def cmd_stats(args) -> int:
    entries = dataset.load_entries(args.entries)
    print(dataset.format_stats(dataset.dataset_stats(entries)))
    return 0


def cmd_serve(args) -> int:
    import uvicorn
    from fastapi.staticfiles import StaticFiles

    from .annotate.api import create_app
    from .annotate.store import AnnotationSession

    session_dir = Path(args.data_dir) / args.session_id
    if (session_dir / "meta.json").exists():
        session = AnnotationSession.open(args.data_dir, args.session_id)
        logger.info("reopened session %s with %d entries", args.session_id, len(session.entries))
    else:
        if not (args.entries and args.annotators and args.expert):
            raise ContractViolation(
                "creating a session requires --entries, --annotators and --expert"
            )
        entries = dataset.load_entries(args.entries)
        kb = dataset.load_kb(args.kb) if args.kb else {}
        session = AnnotationSession(
            args.session_id,
            entries,
            [a.strip() for a in args.annotators.split(",")],
            args.expert,
            kb,
            args.data_dir,
        )
        session.persist()
        logger.info("created session %s with %d entries", args.session_id, len(entries))
    app = create_app(session)
    if args.static_dir:
        app.mount("/", StaticFiles(directory=args.static_dir, html=True), name="ui")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_train(args) -> int:
    entries = dataset.load_entries(args.train_file)
    system, assignment = _load_types(args.types_dir)
    kb = dataset.load_kb(args.kb)
    config = _model_config(args)
    if config.epochs == 0:
        model = linker.init_model(config, system.n_t)
    else:
        model = linker.train(entries, system, assignment, kb, config, log_path=args.log)
    linker.save_model(model, args.out)
    print(f"trained {config.mode} linker on {len(entries)} entries -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    model = linker.load_model(args.checkpoint)
    entries = dataset.load_entries(args.entries)
    system, assignment = _load_types(args.types_dir)
    kb = dataset.load_kb(args.kb)
    report = evaluation.evaluate_split(
        model, entries, kb, system, assignment, lam=args.lam, epsilon=args.epsilon
    )
    if args.out:
        evaluation.write_eval_report(report, args.out)
        print(f"report -> {args.out}")
    print(f"Non-NAC\t{report.non_nac:.2f}\nNAC\t{report.nac:.2f}\nOAC\t{report.oac:.2f}")
    return 0


def cmd_ablate(args) -> int:
    train_entries = dataset.load_entries(args.train_file)
    test_entries = dataset.load_entries(args.test_file)
    system, assignment = _load_types(args.types_dir)
    kb = dataset.load_kb(args.kb)
    config = _model_config(args)
    if args.kind == "nil":
        rows = evaluation.ablate_nil_fraction(
            train_entries, test_entries, args.fractions,
            args.pattern_filter, system, assignment, kb, config,
        )
        evaluation.write_nil_curve(rows, args.out)
        if args.plot:
            evaluation.plot_nil_curve(rows, args.plot)
        for fraction, nac, oac in rows:
            print(f"{fraction:.2f}\t{nac:.2f}\t{oac:.2f}")
    else:
        with_typing = linker.train(train_entries, system, assignment, kb, config)
        from dataclasses import replace as dc_replace

        without_cfg = dc_replace(config, typing_enabled=False)
        without_typing = linker.train(train_entries, system, assignment, kb, without_cfg)
        result = evaluation.ablate_typing(
            with_typing, without_typing, test_entries, kb, system, assignment
        )
        evaluation.write_typing_report(result, args.out)
        print(
            f"OAC w/ Typing {result.oac_with_typing:.2f}\t"
            f"OAC w/o Typing {result.oac_without_typing:.2f}"
        )
    print(f"ablation report -> {args.out}")
    return 0


_COMMANDS = {
    "build-alias": cmd_build_alias,
    "build-types": cmd_build_types,
    "make-dataset": cmd_make_dataset,
    "mask": cmd_mask,
    "split": cmd_split,
    "stats": cmd_stats,
    "serve": cmd_serve,
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
}


def main(argv=None) -> int:
    level = os.environ.get("NILINK_LOG", "INFO").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        level = "INFO"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    parser, subparsers = build_parser()
    preliminary, _ = parser.parse_known_args(argv)
    if preliminary.config:
        overrides = load_config_file(preliminary.config)
        parser.set_defaults(**overrides)
        for sp in subparsers.values():
            sp.set_defaults(**overrides)
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ContractViolation, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
