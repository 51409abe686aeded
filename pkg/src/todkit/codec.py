"""Linear text codecs for belief states and action sequences, plus delexicalization.

Wire format: domains and acts appear as bracketed tokens (``[restaurant]``,
``[inform]``), slot names and values as plain tokens.  A belief value spans
tokens until the next slot name of the current domain or the next bracketed
token, so values must not contain their domain's slot names (enforced at
corpus ingest).
"""

from __future__ import annotations

import re
from typing import Mapping

from .errors import ParseError
from .model import ActionSeq, BeliefState, Ontology

_BRACKETED = re.compile(r"^\[([^\[\]\s]+)\]$")


def _bracket_name(token: str) -> str | None:
    m = _BRACKETED.match(token)
    return m.group(1) if m else None


def parse_belief(text: str, ontology: Ontology) -> BeliefState:
    """Parse ``[domain] slot value... slot value... [domain] ...`` text."""
    tokens = text.split()
    entries: list[tuple[str, list[tuple[str, list[str]]]]] = []
    domain: str | None = None
    domain_slots: tuple[str, ...] = ()
    slot: str | None = None
    value: list[str] = []

    def close_slot(pos: int):
        nonlocal slot, value
        if slot is not None:
            if not value:
                raise ParseError(f"slot {slot!r} has an empty value", pos)
            entries[-1][1].append((slot, value))
            slot, value = None, []

    for pos, token in enumerate(tokens):
        name = _bracket_name(token)
        if name is not None:
            if not ontology.is_domain(name):
                raise ParseError(f"unknown domain token {token!r}", pos)
            if any(d == name for d, _ in entries):
                raise ParseError(f"domain {name!r} listed twice", pos)
            close_slot(pos)
            domain = name
            domain_slots = ontology.domain_slots(domain)
            entries.append((domain, []))
        elif domain is None:
            raise ParseError(f"token {token!r} appears before any domain", pos)
        elif token in domain_slots:
            close_slot(pos)
            if any(s == token for s, _ in entries[-1][1]):
                raise ParseError(f"slot {token!r} repeated in domain {domain!r}", pos)
            slot = token
        elif slot is None:
            raise ParseError(f"unknown slot token {token!r} in domain {domain!r}", pos)
        else:
            value.append(token)
    close_slot(len(tokens))
    return BeliefState(
        entries=tuple(
            (d, tuple((s, " ".join(v)) for s, v in pairs)) for d, pairs in entries
        )
    )


def serialize_belief(belief: BeliefState) -> str:
    """Inverse of parse_belief; empty state serializes to the empty string."""
    parts: list[str] = []
    for domain, pairs in belief.entries:
        parts.append(f"[{domain}]")
        for slot, value in pairs:
            parts.append(slot)
            parts.extend(value.split())
    return " ".join(parts)


def parse_action(text: str, ontology: Ontology) -> ActionSeq:
    """Parse ``[domain] [act] slot... [act] ...`` text, order-preserving."""
    tokens = text.split()
    entries: list[tuple[str, list[tuple[str, list[str]]]]] = []
    domain: str | None = None
    act_open = False

    for pos, token in enumerate(tokens):
        name = _bracket_name(token)
        if name is not None and ontology.is_domain(name):
            domain = name
            act_open = False
            entries.append((domain, []))
        elif name is not None:
            if not ontology.is_act(name):
                raise ParseError(f"unknown act token {token!r}", pos)
            if domain is None:
                raise ParseError(f"act token {token!r} appears before any domain", pos)
            entries[-1][1].append((name, []))
            act_open = True
        else:
            if not act_open:
                raise ParseError(f"slot token {token!r} appears before any act", pos)
            if token not in ontology.entity_slots(domain):
                raise ParseError(f"unknown slot token {token!r} in domain {domain!r}", pos)
            entries[-1][1][-1][1].append(token)
    return ActionSeq(
        entries=tuple(
            (d, tuple((a, tuple(slots)) for a, slots in acts)) for d, acts in entries
        )
    )


def serialize_action(action: ActionSeq) -> str:
    parts: list[str] = []
    for domain, acts in action.entries:
        parts.append(f"[{domain}]")
        for act, slots in acts:
            parts.append(f"[{act}]")
            parts.extend(slots)
    return " ".join(parts)


def delexicalize(response_lex: str, bindings: Mapping[str, str]) -> str:
    """Replace every bound surface value with its ``[value_<slot>]`` placeholder.

    Matching is case-insensitive and longest-match first, so an entity name
    is never partially rewritten by one of its substrings.  Text without any
    bound value is returned unchanged.
    """
    surfaces = [(slot, value) for slot, value in bindings.items() if value.strip()]
    if not surfaces:
        return response_lex
    surfaces.sort(key=lambda kv: len(kv[1]), reverse=True)
    pattern = re.compile(
        "|".join(f"({re.escape(value)})" for _, value in surfaces), re.IGNORECASE
    )
    slots = [slot for slot, _ in surfaces]

    def repl(match: re.Match) -> str:
        return f"[value_{slots[match.lastindex - 1]}]"

    return pattern.sub(repl, response_lex)
