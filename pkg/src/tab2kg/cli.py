"""Batch command line for profiling, training-data generation, training,
interpretation and evaluation.

Exit codes: 0 success, 1 usage error, 2 data error (parsing, typing,
missing files), 3 interpretation failure (unmappable column, disconnected
ontology). The environment variable TAB2KG_SEED supplies the default seed;
explicit --seed flags override it. Output files are written atomically.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .catalog import export_profile, import_profile
from .datagen import (
    GenConfig,
    evaluate,
    extract_pairwise,
    extract_setbased,
    load_training_instances,
    make_instances,
    make_training_pairs,
    read_corpus,
    write_corpus,
)
from .errors import (
    CyclicStructureUnsupportedError,
    DegenerateDatasetError,
    DisconnectedOntologyError,
    Tab2KGError,
    UnmappableColumnError,
)
from .graphgen import build_plan, select_mappings
from .matcher import (
    MODEL_VERSION,
    TrainConfig,
    candidate_mappings,
    load_model,
    save_model,
    train,
)
from .profiler import FEATURE_LAYOUT_VERSION, DomainProfile, profile_domain, profile_table
from .rdf import parse_turtle, serialize_turtle
from .rml import emit_rml, materialize, DEFAULT_MAPPING_BASE
from .tabular import Dialect, parse_table

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERPRETATION = 3

_INTERPRETATION_ERRORS = (
    UnmappableColumnError,
    DisconnectedOntologyError,
    CyclicStructureUnsupportedError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("TAB2KG_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def _atomic_write(path: str, data: bytes) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, temp = tempfile.mkstemp(dir=target.parent, prefix=".tab2kg-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(temp, target)
    except BaseException:
        if os.path.exists(temp):
            os.unlink(temp)
        raise


def _dialect_from(args) -> Dialect:
    delimiter = args.delimiter.replace("\\t", "\t") if args.delimiter else "\t"
    return Dialect(delimiter=delimiter, has_header=args.header)


def _build_parser() -> _Parser:
    parser = _Parser(prog="tab2kg", description=__doc__)
    parser.add_argument("--version", action="store_true",
                        help="print format versions and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("profile-table", help="profile a delimited table")
    p.add_argument("table")
    p.add_argument("--out", required=True)
    p.add_argument("--delimiter", default="\t")
    p.add_argument("--header", action="store_true")
    p.add_argument("--dataset-iri", default="http://tab2kg.org/dataset/table")

    p = sub.add_parser("profile-domain", help="profile a knowledge graph")
    p.add_argument("kg")
    p.add_argument("--out", required=True)
    p.add_argument("--dataset-iri", default="http://tab2kg.org/dataset/domain")

    p = sub.add_parser("generate-training-data",
                       help="build a training corpus from knowledge graphs")
    p.add_argument("--kgs", required=True, help="directory of .ttl files")
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--max-rows", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("train", help="train the column mapping model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--batch-size", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.0001)
    p.add_argument("--hidden-dim", type=int, default=256)
    p.add_argument("--patience", type=int, default=100)
    p.add_argument("--balance", action="store_true",
                   help="subsample negatives to the number of positives")
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("interpret", help="map a table against a domain profile")
    p.add_argument("table")
    p.add_argument("--domain-profile", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="RML mapping output (.ttl)")
    p.add_argument("--materialize", help="also write the materialized data graph")
    p.add_argument("--delimiter", default="\t")
    p.add_argument("--header", action="store_true")
    p.add_argument("--entity-base", default=DEFAULT_MAPPING_BASE)
    p.add_argument("--threshold", type=float, default=0.5)

    p = sub.add_parser("evaluate", help="run an evaluation protocol on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--setting", required=True, choices=["pairwise", "set-based"])
    p.add_argument("--report", required=True)
    p.add_argument("--delimiter", default="\t")
    p.add_argument("--header", action="store_true")
    return parser


def _cmd_profile_table(args) -> int:
    table = parse_table(Path(args.table).read_bytes(), _dialect_from(args),
                        source_name=Path(args.table).name)
    profiles = profile_table(table)
    _atomic_write(args.out, serialize_turtle(
        export_profile(profiles, args.dataset_iri)))
    print(f"profiled {len(profiles)} columns -> {args.out}")
    return EXIT_OK


def _cmd_profile_domain(args) -> int:
    graph = parse_turtle(Path(args.kg).read_bytes())
    profile = profile_domain(graph)
    _atomic_write(args.out, serialize_turtle(
        export_profile(profile, args.dataset_iri)))
    print(f"profiled {len(profile.relation_profiles)} relations -> {args.out}")
    return EXIT_OK


def _cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    config = GenConfig(k=args.k, delta=args.delta, seed=seed,
                       max_rows=args.max_rows)
    kg_dir = Path(args.kgs)
    graphs = []
    for path in sorted(kg_dir.glob("*.ttl")):
        graphs.append(parse_turtle(path.read_bytes()))
    if not graphs:
        raise Tab2KGError(f"no .ttl files in {kg_dir}")
    instances = make_instances(graphs, config)
    written = write_corpus(instances, args.out)
    print(f"wrote {len(written)} instances -> {args.out}")
    return EXIT_OK


def _cmd_train(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    instances = load_training_instances(args.corpus)
    pairs = make_training_pairs(instances, balance=args.balance)
    config = TrainConfig(
        epochs=args.epochs, batch_size=args.batch_size, learning_rate=args.lr,
        patience=args.patience, hidden_dim=args.hidden_dim, seed=seed)
    result = train(pairs, config)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    import io

    buffer = io.StringIO()
    save_model(result.model, buffer)
    _atomic_write(args.out, buffer.getvalue().encode("utf-8"))
    last = result.history[-1] if result.history else {}
    print(f"trained on {len(pairs)} pairs, epochs={len(result.history)}, "
          f"val_accuracy={last.get('val_accuracy', 'n/a')} -> {args.out}")
    return EXIT_OK


def _cmd_interpret(args) -> int:
    dialect = _dialect_from(args)
    table = parse_table(Path(args.table).read_bytes(), dialect,
                        source_name=Path(args.table).name)
    profile = import_profile(parse_turtle(Path(args.domain_profile).read_bytes()))
    if not isinstance(profile, DomainProfile):
        raise Tab2KGError("--domain-profile must hold a domain profile document")
    model = load_model(args.model)
    columns = profile_table(table)
    candidates = candidate_mappings(columns, profile, model,
                                    threshold=args.threshold)
    mappings = select_mappings(candidates)
    scores = {col: options[0][1] for col, options in candidates.items() if options}
    plan = build_plan(mappings, profile.ontology, profile, scores=scores)
    print(plan.report())
    mapping_graph = emit_rml(plan, table, dialect, entity_base=args.entity_base)
    _atomic_write(args.out, serialize_turtle(mapping_graph))
    print(f"mapping -> {args.out}")
    if args.materialize:
        data_graph = materialize(mapping_graph, table)
        _atomic_write(args.materialize, serialize_turtle(data_graph))
        print(f"data graph ({len(data_graph)} triples) -> {args.materialize}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    items = read_corpus(args.corpus, _dialect_from(args))
    model = load_model(args.model)
    if args.setting == "pairwise":
        instances = extract_pairwise(items)
    else:
        instances = [
            inst for group in extract_setbased(items) for inst in group.instances()
        ]
    report = evaluate(model, instances, mode=args.setting)
    report.write_csv(args.report)
    print(report.summary())
    print(f"report -> {args.report}")
    return EXIT_OK


_COMMANDS = {
    "profile-table": _cmd_profile_table,
    "profile-domain": _cmd_profile_domain,
    "generate-training-data": _cmd_generate,
    "train": _cmd_train,
    "interpret": _cmd_interpret,
    "evaluate": _cmd_evaluate,
}


def run(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.version:
        print(f"tab2kg {__version__} "
              f"(feature layout v{FEATURE_LAYOUT_VERSION}, "
              f"model format v{MODEL_VERSION})")
        return EXIT_OK
    if not args.command:
        print("usage error: a subcommand is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except _INTERPRETATION_ERRORS as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERPRETATION
    except DegenerateDatasetError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (Tab2KGError, OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
