"""Canonical in-memory data model for dialogs, turns, goals, and context memory.

Belief states and action sequences are stored in canonical tuple form so that
equality is structural and order-sensitive: iteration order always equals
insertion order, which the downstream tree construction relies on.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .db import DbBucket
from .errors import CorpusError

END_OF_TURN = "<eot>"

_KEYWORD_RE = re.compile(r"^\[value_[A-Za-z0-9_]+\]$")


@dataclass(frozen=True)
class Ontology:
    """Closed vocabularies of a corpus: domains, slots, acts, and keywords.

    ``slots`` holds the informable (belief) slots per domain; ``requestables``
    the slots the system can be asked to surface.  ``keyword_vocab`` is the
    closed set of delexicalized placeholder tokens such as ``[value_name]``.
    """

    domains: tuple[str, ...]
    slots: Mapping[str, tuple[str, ...]]
    acts: tuple[str, ...]
    requestables: Mapping[str, tuple[str, ...]]
    keyword_vocab: tuple[str, ...]

    def __post_init__(self):
        names = list(self.domains) + list(self.acts)
        for name in names:
            if not name:
                raise CorpusError("ontology names must be nonempty")
        if len(set(self.domains)) != len(self.domains):
            raise CorpusError("duplicate domain names")
        if len(set(self.acts)) != len(self.acts):
            raise CorpusError("duplicate act names")
        if set(self.domains) & set(self.acts):
            raise CorpusError("domain and act names must be disjoint")
        for domain in self.domains:
            dslots = self.slots.get(domain, ())
            if len(set(dslots)) != len(dslots):
                raise CorpusError(f"duplicate slots in domain {domain!r}")
            if not all(dslots):
                raise CorpusError(f"empty slot name in domain {domain!r}")
        for kw in self.keyword_vocab:
            if not _KEYWORD_RE.match(kw):
                raise CorpusError(f"bad keyword token {kw!r}")

    def domain_slots(self, domain: str) -> tuple[str, ...]:
        return tuple(self.slots.get(domain, ()))

    def domain_requestables(self, domain: str) -> tuple[str, ...]:
        return tuple(self.requestables.get(domain, ()))

    def entity_slots(self, domain: str) -> frozenset[str]:
        """Slot names that may appear on entities and in actions of a domain."""
        return frozenset(self.domain_slots(domain)) | frozenset(self.domain_requestables(domain))

    def is_domain(self, name: str) -> bool:
        return name in self.domains

    def is_act(self, name: str) -> bool:
        return name in self.acts

    def to_dict(self) -> dict:
        return {
            "domains": {
                d: {
                    "slots": list(self.domain_slots(d)),
                    "requestables": list(self.domain_requestables(d)),
                }
                for d in self.domains
            },
            "acts": list(self.acts),
            "keyword_vocab": list(self.keyword_vocab),
        }

    @staticmethod
    def from_dict(data: Mapping) -> "Ontology":
        try:
            domains = tuple(data["domains"].keys())
            slots = {d: tuple(spec.get("slots", ())) for d, spec in data["domains"].items()}
            requestables = {
                d: tuple(spec.get("requestables", ())) for d, spec in data["domains"].items()
            }
            acts = tuple(data["acts"])
            keywords = tuple(data.get("keyword_vocab", ()))
        except (KeyError, AttributeError, TypeError) as exc:
            raise CorpusError(f"malformed ontology: {exc}") from exc
        return Ontology(
            domains=domains,
            slots=slots,
            acts=acts,
            requestables=requestables,
            keyword_vocab=keywords,
        )


@dataclass(frozen=True)
class BeliefState:
    """Ordered domain -> slot -> value constraints accumulated so far."""

    entries: tuple[tuple[str, tuple[tuple[str, str], ...]], ...] = ()

    @staticmethod
    def from_dict(data: Mapping[str, Mapping[str, str]]) -> "BeliefState":
        return BeliefState(
            entries=tuple(
                (domain, tuple((slot, value) for slot, value in pairs.items()))
                for domain, pairs in data.items()
            )
        )

    def to_dict(self) -> dict[str, dict[str, str]]:
        return {d: {s: v for s, v in pairs} for d, pairs in self.entries}

    def domains(self) -> tuple[str, ...]:
        return tuple(d for d, _ in self.entries)

    def has_domain(self, domain: str) -> bool:
        return any(d == domain for d, _ in self.entries)

    def domain_items(self, domain: str) -> tuple[tuple[str, str], ...]:
        for d, pairs in self.entries:
            if d == domain:
                return pairs
        return ()

    def get(self, domain: str, slot: str) -> str | None:
        for s, v in self.domain_items(domain):
            if s == slot:
                return v
        return None

    def items(self) -> Iterable[tuple[str, str, str]]:
        for d, pairs in self.entries:
            for s, v in pairs:
                yield d, s, v

    def is_empty(self) -> bool:
        return not self.entries


@dataclass(frozen=True)
class ActionSeq:
    """Ordered (domain, (act, slots)) plan; order is significant end-to-end."""

    entries: tuple[tuple[str, tuple[tuple[str, tuple[str, ...]], ...]], ...] = ()

    @staticmethod
    def from_lists(data: Sequence) -> "ActionSeq":
        return ActionSeq(
            entries=tuple(
                (domain, tuple((act, tuple(slots)) for act, slots in acts))
                for domain, acts in data
            )
        )

    def to_lists(self) -> list:
        return [[d, [[a, list(slots)] for a, slots in acts]] for d, acts in self.entries]

    def domains(self) -> tuple[str, ...]:
        return tuple(d for d, _ in self.entries)

    def items(self) -> Iterable[tuple[str, str, tuple[str, ...]]]:
        for d, acts in self.entries:
            for a, slots in acts:
                yield d, a, slots

    def is_empty(self) -> bool:
        return not self.entries


@dataclass(frozen=True)
class DomainGoal:
    """Informable constraints plus requested slots for one goal domain."""

    domain: str
    constraints: tuple[tuple[str, str], ...] = ()
    requested: tuple[str, ...] = ()


@dataclass(frozen=True)
class Goal:
    domains: tuple[DomainGoal, ...] = ()

    def domain_names(self) -> tuple[str, ...]:
        return tuple(g.domain for g in self.domains)

    def get(self, domain: str) -> DomainGoal | None:
        for g in self.domains:
            if g.domain == domain:
                return g
        return None

    def to_dict(self) -> dict:
        return {
            g.domain: {
                "constraints": {s: v for s, v in g.constraints},
                "requested": list(g.requested),
            }
            for g in self.domains
        }

    @staticmethod
    def from_dict(data: Mapping) -> "Goal":
        return Goal(
            domains=tuple(
                DomainGoal(
                    domain=d,
                    constraints=tuple(spec.get("constraints", {}).items()),
                    requested=tuple(spec.get("requested", ())),
                )
                for d, spec in data.items()
            )
        )


@dataclass(frozen=True)
class Turn:
    """One annotated dialog turn."""

    index: int
    user: str
    belief: BeliefState
    db_bucket: DbBucket
    action: ActionSeq
    response_delex: str
    response_lex: str | None = None


@dataclass(frozen=True)
class Dialog:
    id: str
    goal: Goal
    turns: tuple[Turn, ...]


# ---------------------------------------------------------------------------
# Context memory


def db_token(bucket: DbBucket) -> str:
    return f"[db_{bucket.value}]"


def build_context(dialog: Dialog, t: int) -> list[str]:
    """Linearize history turns 0..t-1 plus the current user utterance.

    Each history turn contributes its user text, belief, DB bucket token,
    action, and delexicalized response, terminated by one ``<eot>`` marker,
    so the result carries exactly ``t`` markers.
    """
    from .codec import serialize_action, serialize_belief

    if not 0 <= t < len(dialog.turns):
        raise IndexError(f"turn index {t} out of range for dialog with {len(dialog.turns)} turns")
    tokens: list[str] = []
    for turn in dialog.turns[:t]:
        tokens.extend(turn.user.split())
        tokens.extend(serialize_belief(turn.belief).split())
        tokens.append(db_token(turn.db_bucket))
        tokens.extend(serialize_action(turn.action).split())
        tokens.extend(turn.response_delex.split())
        tokens.append(END_OF_TURN)
    tokens.extend(dialog.turns[t].user.split())
    return tokens


def turn_end_positions(context: Sequence[str]) -> list[int]:
    """Indices of every turn-boundary marker, ascending."""
    return [i for i, tok in enumerate(context) if tok == END_OF_TURN]


# ---------------------------------------------------------------------------
# Corpus file format: one dialog per line, JSON

_TURN_FIELDS = {"index", "user", "belief", "db", "action", "response", "response_lex"}


def dialog_to_dict(dialog: Dialog) -> dict:
    turns = []
    for turn in dialog.turns:
        rec = {
            "index": turn.index,
            "user": turn.user,
            "belief": turn.belief.to_dict(),
            "db": turn.db_bucket.value,
            "action": turn.action.to_lists(),
            "response": turn.response_delex,
        }
        if turn.response_lex is not None:
            rec["response_lex"] = turn.response_lex
        turns.append(rec)
    return {"id": dialog.id, "goal": dialog.goal.to_dict(), "turns": turns}


def dialog_from_dict(data: Mapping) -> Dialog:
    try:
        turns = []
        for rec in data["turns"]:
            unknown = set(rec) - _TURN_FIELDS
            if unknown:
                raise CorpusError(f"unknown turn fields {sorted(unknown)}", data.get("id"))
            turns.append(
                Turn(
                    index=rec["index"],
                    user=rec["user"],
                    belief=BeliefState.from_dict(rec["belief"]),
                    db_bucket=DbBucket(rec["db"]),
                    action=ActionSeq.from_lists(rec["action"]),
                    response_delex=rec["response"],
                    response_lex=rec.get("response_lex"),
                )
            )
        return Dialog(id=data["id"], goal=Goal.from_dict(data["goal"]), turns=tuple(turns))
    except CorpusError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise CorpusError(f"malformed dialog record: {exc}", data.get("id")) from exc


def validate_dialog(dialog: Dialog, ontology: Ontology) -> None:
    """Enforce structural invariants against an ontology.

    Raises CorpusError naming the dialog and turn on the first violation.
    Belief values that contain a slot-name token of their own domain are
    rejected here because they cannot survive the linear text round trip.
    """
    if not dialog.turns:
        raise CorpusError("dialog has no turns", dialog.id)
    for pos, turn in enumerate(dialog.turns):
        if turn.index != pos:
            raise CorpusError(
                f"turn indices must be consecutive from 0, got {turn.index} at position {pos}",
                dialog.id,
                pos,
            )
        if not turn.response_delex.strip():
            raise CorpusError("empty delexicalized response", dialog.id, pos)
        for domain, slot, value in turn.belief.items():
            if not ontology.is_domain(domain):
                raise CorpusError(f"unknown belief domain {domain!r}", dialog.id, pos)
            if slot not in ontology.domain_slots(domain):
                raise CorpusError(
                    f"unknown belief slot {slot!r} in domain {domain!r}", dialog.id, pos
                )
            if not value.strip():
                raise CorpusError(f"empty value for slot {slot!r}", dialog.id, pos)
            reserved = set(ontology.domain_slots(domain))
            for token in value.split():
                if token in reserved:
                    raise CorpusError(
                        f"value {value!r} for slot {slot!r} collides with a slot name",
                        dialog.id,
                        pos,
                    )
        for domain, act, slots in turn.action.items():
            if not ontology.is_domain(domain):
                raise CorpusError(f"unknown action domain {domain!r}", dialog.id, pos)
            if not ontology.is_act(act):
                raise CorpusError(f"unknown act {act!r}", dialog.id, pos)
            allowed = ontology.entity_slots(domain)
            for slot in slots:
                if slot not in allowed:
                    raise CorpusError(
                        f"unknown action slot {slot!r} in domain {domain!r}", dialog.id, pos
                    )
    for g in dialog.goal.domains:
        if not ontology.is_domain(g.domain):
            raise CorpusError(f"unknown goal domain {g.domain!r}", dialog.id)
        for slot, value in g.constraints:
            if slot not in ontology.domain_slots(g.domain):
                raise CorpusError(f"unknown goal slot {slot!r}", dialog.id)
            if not value.strip():
                raise CorpusError(f"empty goal value for slot {slot!r}", dialog.id)
        requestable = set(ontology.domain_requestables(g.domain))
        for slot in g.requested:
            if slot not in requestable:
                raise CorpusError(f"requested slot {slot!r} not requestable", dialog.id)


def read_corpus(path, ontology: Ontology | None = None) -> list[Dialog]:
    """Read a one-dialog-per-line corpus; validate when an ontology is given."""
    dialogs = []
    ids = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: invalid JSON: {exc}") from exc
            dialog = dialog_from_dict(data)
            if dialog.id in ids:
                raise CorpusError(f"duplicate dialog id {dialog.id!r} on line {lineno}")
            ids.add(dialog.id)
            if ontology is not None:
                validate_dialog(dialog, ontology)
            dialogs.append(dialog)
    return dialogs


def write_corpus(dialogs: Iterable[Dialog], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for dialog in dialogs:
            f.write(json.dumps(dialog_to_dict(dialog), ensure_ascii=False))
            f.write("\n")


def load_ontology(path) -> Ontology:
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"ontology file {path}: {exc}") from exc
    return Ontology.from_dict(data)


def save_ontology(ontology: Ontology, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(ontology.to_dict(), f, ensure_ascii=False, indent=2)
        f.write("\n")
