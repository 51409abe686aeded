import random

import pytest

from todkit.db import DbBucket, EntityDb
from todkit.model import (
    ActionSeq,
    BeliefState,
    Dialog,
    DomainGoal,
    Goal,
    Ontology,
    Turn,
)


@pytest.fixture(scope="session")
def ontology() -> Ontology:
    return Ontology(
        domains=("restaurant", "hotel"),
        slots={
            "restaurant": ("pricerange", "area", "food"),
            "hotel": ("pricerange", "area", "type"),
        },
        acts=("inform", "request", "offerbook"),
        requestables={
            "restaurant": ("name", "address", "phone"),
            "hotel": ("name", "address", "phone"),
        },
        keyword_vocab=(
            "[value_pricerange]", "[value_area]", "[value_food]", "[value_type]",
            "[value_name]", "[value_address]", "[value_phone]",
        ),
    )


@pytest.fixture(scope="session")
def restaurant_db() -> EntityDb:
    """Ten restaurants; exactly two are expensive + centre + chinese."""
    rows = [
        ("golden wok", "expensive", "centre", "chinese", "12 king road", "01223 111222"),
        ("jade palace", "expensive", "centre", "chinese", "3 mill road", "01223 333444"),
        ("river thai", "expensive", "centre", "thai", "8 bridge road", "01223 555666"),
        ("cheap chai", "cheap", "centre", "indian", "21 park road", "01223 777888"),
        ("north star", "moderate", "north", "british", "44 station road", "01223 999000"),
        ("old mill", "expensive", "west", "chinese", "2 mill lane", "01223 121212"),
        ("blue lagoon", "cheap", "south", "seafood", "9 quay side", "01223 343434"),
        ("spice garden", "moderate", "centre", "indian", "17 king road", "01223 565656"),
        ("royal oak", "expensive", "centre", "british", "5 oak lane", "01223 787878"),
        ("corner cafe", "cheap", "east", "italian", "1 corner way", "01223 909090"),
    ]
    return EntityDb.from_dict({
        "restaurant": [
            {
                "name": name, "pricerange": price, "area": area, "food": food,
                "address": address, "phone": phone,
            }
            for name, price, area, food, address, phone in rows
        ],
        "hotel": [
            {
                "name": "gonville hotel", "pricerange": "expensive", "area": "centre",
                "type": "hotel", "address": "7 gonville place", "phone": "01223 242424",
            },
        ],
    })


@pytest.fixture(scope="session")
def example_dialog(ontology, restaurant_db) -> Dialog:
    """Two-turn restaurant booking with a fully consistent annotation."""
    belief0 = BeliefState.from_dict(
        {"restaurant": {"pricerange": "expensive", "area": "centre"}}
    )
    belief1 = BeliefState.from_dict(
        {"restaurant": {"pricerange": "expensive", "area": "centre", "food": "chinese"}}
    )
    turn0 = Turn(
        index=0,
        user="i am looking for an expensive restaurant in the centre",
        belief=belief0,
        db_bucket=DbBucket.MANY,
        action=ActionSeq.from_lists([["restaurant", [["request", ["food"]]]]]),
        response_delex="do you have a preferred [value_food] ?",
        response_lex="do you have a preferred chinese ?",
    )
    turn1 = Turn(
        index=1,
        user="chinese food please",
        belief=belief1,
        db_bucket=DbBucket.TWO,
        action=ActionSeq.from_lists(
            [["restaurant", [["inform", ["address", "name"]], ["offerbook", []]]]]
        ),
        response_delex="the [value_name] is located at [value_address] . shall i book it ?",
        response_lex="the golden wok is located at 12 king road . shall i book it ?",
    )
    goal = Goal(domains=(
        DomainGoal(
            domain="restaurant",
            constraints=(("pricerange", "expensive"), ("area", "centre"),
                         ("food", "chinese")),
            requested=("address",),
        ),
    ))
    return Dialog(id="example-0001", goal=goal, turns=(turn0, turn1))


# ---------------------------------------------------------------------------
# Random generators for round-trip and property tests

_VALUE_WORDS = (
    "expensive", "cheap", "moderate", "centre", "north", "south", "east", "west",
    "chinese", "italian", "indian", "thai", "british", "gonville", "plaza",
    "grand", "villa", "corner", "royal", "little",
)


def random_belief(rng: random.Random, ontology: Ontology) -> BeliefState:
    entries = []
    domains = rng.sample(list(ontology.domains), rng.randint(0, len(ontology.domains)))
    for domain in domains:
        slots = rng.sample(
            list(ontology.domain_slots(domain)),
            rng.randint(1, len(ontology.domain_slots(domain))),
        )
        pairs = []
        for slot in slots:
            value = " ".join(
                rng.choice(_VALUE_WORDS) for _ in range(rng.randint(1, 3))
            )
            pairs.append((slot, value))
        entries.append((domain, tuple(pairs)))
    return BeliefState(entries=tuple(entries))


def random_action(rng: random.Random, ontology: Ontology) -> ActionSeq:
    entries = []
    for _ in range(rng.randint(0, 3)):
        domain = rng.choice(list(ontology.domains))
        acts = []
        for _ in range(rng.randint(1, 2)):
            act = rng.choice(list(ontology.acts))
            slots = rng.sample(
                sorted(ontology.entity_slots(domain)),
                rng.randint(0, 3),
            )
            acts.append((act, tuple(slots)))
        entries.append((domain, tuple(acts)))
    return ActionSeq(entries=tuple(entries))
