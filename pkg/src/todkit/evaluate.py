"""Inform, Success, corpus BLEU, and the combined end-to-end score.

A dialog informs when, for every goal domain with constraints, the entity
offered at that domain's first offer turn satisfies all goal constraints;
the offer turn is the first turn whose predicted response carries the
``[value_name]`` placeholder while the predicted belief already mentions the
domain, and the offered entity is the first database match of the predicted
belief at that turn.  A dialog succeeds when it informs and every requested
slot of every goal domain surfaces as ``[value_<slot>]`` in some predicted
response.  No numeric parity with any historical evaluation script is
claimed.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .codec import parse_belief
from .db import EntityDb, entity_matches, query
from .errors import CorpusError, TodkitError
from .model import BeliefState, Dialog, Ontology

OFFER_PLACEHOLDER = "[value_name]"

_BLEU_EPS = 1e-9


@dataclass(frozen=True)
class Prediction:
    """One predicted turn: belief state plus delexicalized response."""

    belief: BeliefState
    response: str


@dataclass(frozen=True)
class DialogScore:
    dialog_id: str
    inform: bool
    success: bool


@dataclass(frozen=True)
class EvalReport:
    inform: float
    success: float
    bleu: float
    combined: float
    dialogs: tuple[DialogScore, ...]


def combined_score(inform: float, success: float, bleu: float) -> float:
    """(Inform + Success) * 0.5 + BLEU."""
    return (inform + success) * 0.5 + bleu


def _tokens(text: str) -> list[str]:
    return text.split()


def _first_offer_turn(preds: Sequence[Prediction], domain: str) -> int | None:
    for t, pred in enumerate(preds):
        if OFFER_PLACEHOLDER in _tokens(pred.response) and pred.belief.has_domain(domain):
            return t
    return None


def inform_dialog(dialog: Dialog, preds: Sequence[Prediction], db: EntityDb) -> bool:
    """True when every goal domain with constraints is offered a valid entity."""
    for goal in dialog.goal.domains:
        if not goal.constraints:
            continue
        t = _first_offer_turn(preds, goal.domain)
        if t is None:
            return False
        matches = query(db, preds[t].belief, goal.domain)
        if not matches:
            return False
        if not entity_matches(matches[0], goal.constraints):
            return False
    return True


def success_dialog(dialog: Dialog, preds: Sequence[Prediction], db: EntityDb) -> bool:
    """Inform plus every requested slot surfacing somewhere in the responses."""
    if not inform_dialog(dialog, preds, db):
        return False
    surfaced = set()
    for pred in preds:
        surfaced.update(_tokens(pred.response))
    for goal in dialog.goal.domains:
        for slot in goal.requested:
            if f"[value_{slot}]" not in surfaced:
                return False
    return True


def corpus_bleu(candidates: Sequence[str], references: Sequence[str]) -> float:
    """Corpus-level BLEU-4 (uniform weights, standard brevity penalty) in [0, 100].

    Tokenization is whitespace.  A corpus-level n-gram precision of zero is
    replaced by 1e-9 before the geometric mean.
    """
    if len(candidates) != len(references):
        raise TodkitError(
            f"candidate/reference count mismatch: {len(candidates)} vs {len(references)}"
        )
    if not candidates:
        raise TodkitError("BLEU is undefined for an empty corpus")
    matched = [0, 0, 0, 0]
    total = [0, 0, 0, 0]
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_toks = _tokens(cand)
        ref_toks = _tokens(ref)
        cand_len += len(cand_toks)
        ref_len += len(ref_toks)
        for n in range(1, 5):
            cand_ngrams = Counter(
                tuple(cand_toks[i:i + n]) for i in range(len(cand_toks) - n + 1)
            )
            ref_ngrams = Counter(
                tuple(ref_toks[i:i + n]) for i in range(len(ref_toks) - n + 1)
            )
            total[n - 1] += sum(cand_ngrams.values())
            matched[n - 1] += sum(
                min(count, ref_ngrams[ng]) for ng, count in cand_ngrams.items()
            )
    precisions = [
        (matched[i] / total[i]) if total[i] > 0 and matched[i] > 0 else _BLEU_EPS
        for i in range(4)
    ]
    log_mean = sum(0.25 * math.log(p) for p in precisions)
    if cand_len > ref_len:
        bp = 1.0
    elif cand_len == 0:
        return 0.0
    else:
        bp = math.exp(1.0 - ref_len / cand_len)
    return 100.0 * bp * math.exp(log_mean)


def evaluate(gold: Sequence[Dialog], predictions: Mapping[str, Sequence[Prediction]],
             db: EntityDb) -> EvalReport:
    """Score predictions against goals and reference responses."""
    if not gold:
        raise TodkitError("cannot evaluate an empty corpus")
    scores = []
    candidates: list[str] = []
    references: list[str] = []
    for dialog in gold:
        preds = predictions.get(dialog.id)
        if preds is None:
            raise CorpusError("missing predictions", dialog.id)
        if len(preds) != len(dialog.turns):
            raise CorpusError(
                f"{len(preds)} predicted turns for {len(dialog.turns)} gold turns",
                dialog.id,
            )
        informed = inform_dialog(dialog, preds, db)
        succeeded = informed and success_dialog(dialog, preds, db)
        scores.append(DialogScore(dialog_id=dialog.id, inform=informed, success=succeeded))
        for turn, pred in zip(dialog.turns, preds):
            candidates.append(pred.response)
            references.append(turn.response_delex)
    inform = 100.0 * sum(s.inform for s in scores) / len(scores)
    success = 100.0 * sum(s.success for s in scores) / len(scores)
    bleu = corpus_bleu(candidates, references)
    return EvalReport(
        inform=inform,
        success=success,
        bleu=bleu,
        combined=combined_score(inform, success, bleu),
        dialogs=tuple(scores),
    )


def gold_predictions(gold: Sequence[Dialog]) -> dict[str, list[Prediction]]:
    """Self-evaluation predictions: the gold annotations themselves."""
    return {
        d.id: [Prediction(belief=t.belief, response=t.response_delex) for t in d.turns]
        for d in gold
    }


def read_predictions(path, ontology: Ontology) -> dict[str, list[Prediction]]:
    """Predictions file: one JSON object per line.

    Fields: ``id`` plus ``turns``, a list of {"belief": <linear belief text>,
    "response": <delexicalized response>}.
    """
    out: dict[str, list[Prediction]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                dialog_id = record["id"]
                turns = [
                    Prediction(
                        belief=parse_belief(turn["belief"], ontology),
                        response=turn["response"],
                    )
                    for turn in record["turns"]
                ]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"predictions line {lineno}: {exc}") from exc
            if dialog_id in out:
                raise CorpusError(f"duplicate predictions for dialog {dialog_id!r}")
            out[dialog_id] = turns
    return out


def write_predictions(predictions: Mapping[str, Sequence[Prediction]], path) -> None:
    from .codec import serialize_belief

    with open(path, "w", encoding="utf-8") as f:
        for dialog_id, preds in predictions.items():
            record = {
                "id": dialog_id,
                "turns": [
                    {"belief": serialize_belief(p.belief), "response": p.response}
                    for p in preds
                ],
            }
            f.write(json.dumps(record, ensure_ascii=False))
            f.write("\n")
