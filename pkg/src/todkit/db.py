"""Entity database: ingestion, constraint matching, and match-count buckets."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

from .errors import CorpusError, TodkitError

if TYPE_CHECKING:
    from .model import BeliefState, Ontology


class DbBucket(enum.Enum):
    """Discretized count of entities matching the current belief state."""

    ZERO = "zero"
    ONE = "one"
    TWO = "two"
    THREE = "three"
    MANY = "many"


def bucketize(count: int) -> DbBucket:
    """Map a nonnegative match count onto its bucket (0, 1, 2, 3, >=4)."""
    if count < 0:
        raise ValueError(f"match count must be nonnegative, got {count}")
    if count >= 4:
        return DbBucket.MANY
    return (DbBucket.ZERO, DbBucket.ONE, DbBucket.TWO, DbBucket.THREE)[count]


@dataclass(frozen=True)
class Entity:
    """One database row: a canonical name plus slot values."""

    name: str
    values: tuple[tuple[str, str], ...]

    def get(self, slot: str) -> str | None:
        for s, v in self.values:
            if s == slot:
                return v
        return None

    def to_dict(self) -> dict[str, str]:
        d = {"name": self.name}
        d.update({s: v for s, v in self.values if s != "name"})
        return d


@dataclass(frozen=True)
class EntityDb:
    """Per-domain entity lists, immutable after ingest."""

    domains: tuple[tuple[str, tuple[Entity, ...]], ...]

    def entities(self, domain: str) -> tuple[Entity, ...]:
        for d, ents in self.domains:
            if d == domain:
                return ents
        raise TodkitError(f"unknown DB domain: {domain!r}")

    def has_domain(self, domain: str) -> bool:
        return any(d == domain for d, _ in self.domains)

    @staticmethod
    def from_dict(data: Mapping[str, Sequence[Mapping[str, str]]]) -> "EntityDb":
        domains = []
        for domain, rows in data.items():
            ents = []
            seen = set()
            for row in rows:
                if "name" not in row:
                    raise CorpusError(f"DB entity in domain {domain!r} lacks a name")
                name = row["name"]
                if name in seen:
                    raise CorpusError(f"duplicate entity name {name!r} in domain {domain!r}")
                seen.add(name)
                ents.append(Entity(name=name, values=tuple(row.items())))
            domains.append((domain, tuple(ents)))
        return EntityDb(domains=tuple(domains))

    def to_dict(self) -> dict[str, list[dict[str, str]]]:
        return {d: [e.to_dict() for e in ents] for d, ents in self.domains}


def entity_matches(entity: Entity, constraints: Sequence[tuple[str, str]]) -> bool:
    """True when every constrained slot equals the entity value, case-insensitively.

    A constraint on a slot the entity does not carry never matches.
    """
    for slot, value in constraints:
        have = entity.get(slot)
        if have is None or have.lower() != value.lower():
            return False
    return True


def query(db: EntityDb, belief: "BeliefState", domain: str) -> tuple[Entity, ...]:
    """Entities of ``domain`` satisfying the belief constraints, in DB order."""
    constraints = belief.domain_items(domain)
    return tuple(e for e in db.entities(domain) if entity_matches(e, constraints))


def validate_db(db: EntityDb, ontology: "Ontology") -> None:
    """Check every entity slot against the ontology; raise CorpusError otherwise."""
    for domain, ents in db.domains:
        if domain not in ontology.domains:
            raise CorpusError(f"DB domain {domain!r} not in ontology")
        allowed = ontology.entity_slots(domain)
        for e in ents:
            for slot, _ in e.values:
                if slot not in allowed:
                    raise CorpusError(
                        f"DB entity {e.name!r} has slot {slot!r} unknown to domain {domain!r}"
                    )


def load_db(path) -> EntityDb:
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"DB file {path}: {exc}") from exc
    return EntityDb.from_dict(data)


def save_db(db: EntityDb, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(db.to_dict(), f, ensure_ascii=False, indent=2)
        f.write("\n")
