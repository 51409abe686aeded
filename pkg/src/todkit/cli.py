"""Command-line entry point wiring the library into corpus workflows."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import synth
from .codec import parse_belief
from .db import load_db, query, save_db, validate_db
from .errors import TodkitError
from .evaluate import evaluate, read_predictions
from .labels import CHANGE_NAMES, act_classes, extract_labels, slot_classes
from .matrix import (
    build_matrix,
    collect_vocab,
    load_matrix,
    save_matrix,
)
from .model import (
    BeliefState,
    dialog_to_dict,
    load_ontology,
    read_corpus,
    save_ontology,
    write_corpus,
)
from .scheduler import Schedule, keep_probability, serve_stream


def _add_schedule_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mu", type=float, required=True, help="decay hyperparameter (> 0)")
    parser.add_argument("--time-unit", choices=("epoch", "step", "fraction"),
                        default="epoch", help="unit in which t is measured")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="todkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="validate a corpus and emit its canonical form")
    p.add_argument("--ontology", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("matrix", help="similarity matrix operations")
    msub = p.add_subparsers(dest="matrix_command", required=True)
    b = msub.add_parser("build", help="build and save the action similarity matrix")
    b.add_argument("--ontology", required=True)
    b.add_argument("--corpus", required=True)
    b.add_argument("--matrix", required=True, help="output matrix path")
    b.add_argument("--vocab", help="output vocabulary path (default: <matrix>.vocab)")
    b.add_argument("--threads", type=int, default=1)
    q = msub.add_parser("query", help="print one similarity entry")
    q.add_argument("--matrix", required=True)
    q.add_argument("--vocab")
    q.add_argument("i", type=int)
    q.add_argument("j", type=int)

    p = sub.add_parser("schedule", help="decay schedule operations")
    ssub = p.add_subparsers(dest="schedule_command", required=True)
    e = ssub.add_parser("eval", help="print the keep probability at time t")
    _add_schedule_flags(e)
    e.add_argument("--t", type=float, required=True)

    p = sub.add_parser("sample", help="answer sampling requests on stdin (one JSON per line)")
    p.add_argument("--matrix", required=True)
    p.add_argument("--vocab")
    _add_schedule_flags(p)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("labels", help="emit per-turn auxiliary label records")
    p.add_argument("--ontology", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("db", help="entity database operations")
    dsub = p.add_subparsers(dest="db_command", required=True)
    q = dsub.add_parser("query", help="print entities matching a linear belief state")
    q.add_argument("--ontology", required=True)
    q.add_argument("--db", required=True)
    q.add_argument("--domain", required=True)
    q.add_argument("--belief", default="", help="linear belief text (default: no constraints)")

    p = sub.add_parser("eval", help="score predictions against a gold corpus")
    p.add_argument("--ontology", required=True)
    p.add_argument("--db", required=True)
    p.add_argument("--corpus", required=True, help="gold corpus path")
    p.add_argument("--pred", required=True, help="predictions path")
    p.add_argument("--out", help="write the structured report to this path")

    p = sub.add_parser("synth", help="generate a self-consistent synthetic corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dialogs", type=int, default=10)
    p.add_argument("--domains", type=int, default=2)
    p.add_argument("--slots", type=int, default=3)
    p.add_argument("--entities", type=int, default=8)
    p.add_argument("--min-turns", type=int, default=2)
    p.add_argument("--max-turns", type=int, default=5)
    p.add_argument("--out", required=True, help="output directory")

    return parser


def _open_out(path):
    return open(path, "w", encoding="utf-8") if path else sys.stdout


def _cmd_parse(args) -> int:
    ontology = load_ontology(args.ontology)
    dialogs = read_corpus(args.corpus, ontology)
    out = _open_out(args.out)
    try:
        for dialog in dialogs:
            out.write(json.dumps(dialog_to_dict(dialog), ensure_ascii=False))
            out.write("\n")
    finally:
        if args.out:
            out.close()
    print(f"validated {len(dialogs)} dialogs", file=sys.stderr)
    return 0


def _cmd_matrix_build(args) -> int:
    ontology = load_ontology(args.ontology)
    dialogs = read_corpus(args.corpus, ontology)
    vocab = collect_vocab(dialogs)
    matrix = build_matrix(vocab, ontology, threads=max(1, args.threads))
    save_matrix(matrix, args.matrix, vocab_path=args.vocab)
    print(f"built {matrix.size}x{matrix.size} matrix from {len(dialogs)} dialogs",
          file=sys.stderr)
    return 0


def _cmd_matrix_query(args) -> int:
    matrix = load_matrix(args.matrix, vocab_path=args.vocab)
    n = matrix.size
    if not (0 <= args.i < n and 0 <= args.j < n):
        raise TodkitError(f"indices ({args.i}, {args.j}) out of range for size {n}")
    print(matrix.values[args.i, args.j])
    return 0


def _cmd_schedule_eval(args) -> int:
    schedule = Schedule(mu=args.mu, time_unit=args.time_unit)
    if args.t < 0:
        raise TodkitError(f"t must be nonnegative, got {args.t}")
    print(f"{keep_probability(schedule, args.t):.6f}")
    return 0


def _cmd_sample(args) -> int:
    matrix = load_matrix(args.matrix, vocab_path=args.vocab)
    schedule = Schedule(mu=args.mu, time_unit=args.time_unit)
    serve_stream(matrix, schedule, args.seed, sys.stdin, sys.stdout)
    return 0


def _cmd_labels(args) -> int:
    ontology = load_ontology(args.ontology)
    dialogs = read_corpus(args.corpus, ontology)
    sclasses = slot_classes(ontology)
    aclasses = act_classes(ontology)
    out = _open_out(args.out)
    try:
        for dialog in dialogs:
            prev = BeliefState()
            for turn in dialog.turns:
                labels = extract_labels(ontology, prev, turn.belief, turn.action,
                                        turn.response_delex)
                record = {
                    "dialog_id": dialog.id,
                    "turn": turn.index,
                    "slot_type": [f"{d}-{s}" for (d, s), y in zip(sclasses, labels.slot_type)
                                  if y],
                    "slot_change": {
                        f"{d}-{s}": CHANGE_NAMES[c]
                        for (d, s), c, m in zip(sclasses, labels.slot_change,
                                                labels.slot_change_mask)
                        if m
                    },
                    "action_type": [f"{d}-{a}" for (d, a), y in zip(aclasses, labels.action_type)
                                    if y],
                    "keywords": [kw for kw, y in zip(ontology.keyword_vocab, labels.keywords)
                                 if y],
                }
                out.write(json.dumps(record, ensure_ascii=False))
                out.write("\n")
                prev = turn.belief
    finally:
        if args.out:
            out.close()
    return 0


def _cmd_db_query(args) -> int:
    ontology = load_ontology(args.ontology)
    db = load_db(args.db)
    validate_db(db, ontology)
    belief = parse_belief(args.belief, ontology)
    matches = query(db, belief, args.domain)
    print(json.dumps([e.to_dict() for e in matches], ensure_ascii=False, indent=2))
    return 0


def _cmd_eval(args) -> int:
    ontology = load_ontology(args.ontology)
    db = load_db(args.db)
    validate_db(db, ontology)
    gold = read_corpus(args.corpus, ontology)
    predictions = read_predictions(args.pred, ontology)
    report = evaluate(gold, predictions, db)
    for name, value in (("Inform", report.inform), ("Success", report.success),
                        ("BLEU", report.bleu), ("Combined", report.combined)):
        print(f"{name:<9} {value:.2f}")
    if args.out:
        payload = {
            "inform": report.inform,
            "success": report.success,
            "bleu": report.bleu,
            "combined": report.combined,
            "dialogs": [
                {"id": s.dialog_id, "inform": s.inform, "success": s.success}
                for s in report.dialogs
            ],
        }
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(payload, f, ensure_ascii=False, indent=2)
            f.write("\n")
    return 0


def _cmd_synth(args) -> int:
    cfg = synth.SynthConfig(
        seed=args.seed,
        n_domains=args.domains,
        slots_per_domain=args.slots,
        entities_per_domain=args.entities,
        n_dialogs=args.dialogs,
        min_turns=args.min_turns,
        max_turns=args.max_turns,
    )
    ontology, db, dialogs = synth.generate_corpus(cfg)
    os.makedirs(args.out, exist_ok=True)
    save_ontology(ontology, os.path.join(args.out, "ontology.json"))
    save_db(db, os.path.join(args.out, "db.json"))
    write_corpus(dialogs, os.path.join(args.out, "corpus.jsonl"))
    print(f"wrote ontology.json, db.json, corpus.jsonl to {args.out}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "parse": _cmd_parse,
        "labels": _cmd_labels,
        "sample": _cmd_sample,
        "eval": _cmd_eval,
        "synth": _cmd_synth,
    }
    try:
        if args.command == "matrix":
            handler = _cmd_matrix_build if args.matrix_command == "build" else _cmd_matrix_query
        elif args.command == "schedule":
            handler = _cmd_schedule_eval
        elif args.command == "db":
            handler = _cmd_db_query
        else:
            handler = handlers[args.command]
        return handler(args)
    except BrokenPipeError:
        # downstream consumer (e.g. `head`) closed the pipe; exit quietly
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return 0
    except TodkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
