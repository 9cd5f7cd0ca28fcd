"""Generator for a small separable linking benchmark.

Entities are grouped under shared aliases (the ambiguous mentions); each
entity belongs to one leaf type and its description carries that type's
signature vocabulary. Positive entries surround the mention with the gold
entity's signature words, missing-entity NIL entries use the signature of a
type absent from the candidate set (their referent exists in the KB but not
among the candidates), and non-entity-phrase NIL entries read like ordinary
prose with no signature at all.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import ContextWindow
from .dataset import (
    HYPERLINK,
    MISSING_ENTITY,
    NIL,
    NON_ENTITY_PHRASE,
    PLAIN_TEXT,
    Entity,
    Entry,
    round_half_away,
)
from .typesys import TypeSystem, build_type_system

LEAF_PARENTS = {
    "Athlete": "Person",
    "Politician": "Person",
    "Film": "Work",
    "Song": "Work",
    "City": "Place",
    "River": "Place",
    "Company": "Organization",
    "Team": "Organization",
    "Battle": "Event",
    "Festival": "Event",
}

SIGNATURES = {
    "Athlete": ["league", "season", "coach", "trophy", "match", "stadium"],
    "Politician": ["election", "parliament", "minister", "campaign", "policy", "senate"],
    "Film": ["director", "screenplay", "premiere", "cinema", "cast", "studio"],
    "Song": ["album", "chart", "melody", "vocals", "record", "single"],
    "City": ["population", "mayor", "district", "suburb", "harbor", "municipal"],
    "River": ["tributary", "basin", "delta", "upstream", "floodplain", "estuary"],
    "Company": ["revenue", "shareholders", "merger", "headquarters", "subsidiary", "profits"],
    "Team": ["roster", "playoffs", "franchise", "championship", "lineup", "division"],
    "Battle": ["troops", "siege", "regiment", "offensive", "casualties", "armistice"],
    "Festival": ["parade", "lanterns", "pilgrims", "carnival", "feast", "rituals"],
}

LEAF_NOUNS = {
    "Athlete": "athlete",
    "Politician": "politician",
    "Film": "film",
    "Song": "song",
    "City": "city",
    "River": "river",
    "Company": "company",
    "Team": "team",
    "Battle": "battle",
    "Festival": "festival",
}

FILLER = (
    "the of and in was a to for with on by that from at as its it an this also "
    "after before during early later known first new among between under over "
    "while where which into about through along near"
).split()

PHRASE_WORDS = (
    "duty family stage life custom everyday phrase saying habit notion idea "
    "manner common usual ordinary typical general sense way speaking figure "
    "speech expression proverb"
).split()

_SYLLABLES = "va re ko ta mi so lu ne da ri po za fe gu ha be".split()


@dataclass
class ToyBenchmark:
    entries: list[Entry]
    kb: dict[str, Entity]
    system: TypeSystem
    assignment: dict[str, str]


def _invent_name(rng: random.Random, taken: set[str]) -> str:
    while True:
        name = "".join(rng.choice(_SYLLABLES) for _ in range(3)).capitalize()
        if name not in taken:
            taken.add(name)
            return name


def make_toy_benchmark(
    rng_seed: int = 0,
    n_entries: int = 600,
    nil_fraction: float = 0.30,
    n_groups: int = 40,
    shadows_per_leaf: int = 2,
) -> ToyBenchmark:
    rng = random.Random(rng_seed)
    leaves = sorted(LEAF_PARENTS)
    taken_names: set[str] = set()

    kb: dict[str, Entity] = {}
    instance_of: list[tuple[str, str]] = []

    def add_entity(name: str, leaf: str) -> str:
        entity_id = f"{name}_({leaf})"
        sig = rng.sample(SIGNATURES[leaf], 3)
        description = (
            f"{name} is a {LEAF_NOUNS[leaf]} associated with "
            f"{sig[0]} {sig[1]} and {sig[2]}"
        )
        kb[entity_id] = Entity(
            entity_id,
            f"{name} ({leaf})",
            description,
            f"https://kb.example/{entity_id}",
        )
        instance_of.append((entity_id, leaf))
        return entity_id

    # Alias groups: one shared mention name, 2-4 members with distinct types.
    # Anchored groups have one dominant sense that is always the gold answer;
    # in the remaining groups the gold varies with the context's type.
    groups: list[tuple[str, list[str], list[str], int | None]] = []
    for g in range(n_groups):
        mention = _invent_name(rng, taken_names)
        member_leaves = rng.sample(leaves, rng.randint(2, 4))
        members = [add_entity(mention, leaf) for leaf in member_leaves]
        anchor = rng.randrange(len(members)) if g % 5 < 3 else None
        groups.append((mention, members, member_leaves, anchor))

    # shadow entities: in the KB, never offered as candidates
    shadows: dict[str, list[str]] = {leaf: [] for leaf in leaves}
    for leaf in leaves:
        for _ in range(shadows_per_leaf):
            shadows[leaf].append(add_entity(_invent_name(rng, taken_names), leaf))

    subclass_of = sorted(LEAF_PARENTS.items())
    system, assignment = build_type_system(instance_of, subclass_of)

    n_nil = round_half_away(nil_fraction * n_entries)
    n_missing = n_nil // 2
    n_phrase = n_nil - n_missing
    kinds = (
        ["positive"] * (n_entries - n_nil)
        + ["missing"] * n_missing
        + ["phrase"] * n_phrase
    )
    rng.shuffle(kinds)

    def draw_context(signature_leaf: str | None, hint_token: str | None) -> tuple[list[str], list[str]]:
        tokens = rng.choices(FILLER, k=rng.randint(6, 9))
        if signature_leaf is not None:
            tokens += rng.choices(SIGNATURES[signature_leaf], k=rng.randint(5, 8))
        else:
            tokens += rng.choices(PHRASE_WORDS, k=rng.randint(6, 9))
        if hint_token is not None:
            tokens.append(hint_token)
        rng.shuffle(tokens)
        cut = rng.randint(2, len(tokens) - 2)
        return tokens[:cut], tokens[cut:]

    entries: list[Entry] = []
    gold_cycle = [0] * len(groups)  # balances gold picks inside ambiguous groups
    for i, kind in enumerate(kinds):
        g = rng.randrange(len(groups))
        mention, members, member_leaves, anchor = groups[g]
        if kind == "positive":
            if anchor is not None:
                pick = anchor
            else:
                pick = gold_cycle[g] % len(members)
                gold_cycle[g] += 1
            gold, leaf = members[pick], member_leaves[pick]
            hint = LEAF_NOUNS[leaf] if rng.random() < 0.5 else None
            left, right = draw_context(leaf, hint)
            answer, pattern, seed, provenance = gold, None, gold, HYPERLINK
        elif kind == "missing":
            leaf = rng.choice([l for l in leaves if l not in member_leaves])
            left, right = draw_context(leaf, None)
            answer, pattern = NIL, MISSING_ENTITY
            seed, provenance = rng.choice(shadows[leaf]), PLAIN_TEXT
        else:
            left, right = draw_context(None, None)
            answer, pattern = NIL, NON_ENTITY_PHRASE
            seed, provenance = members[0], PLAIN_TEXT
        entries.append(
            Entry(
                entry_id=f"toy-{i:05d}",
                context=ContextWindow(tuple(left), (mention,), tuple(right)),
                candidates=list(members),
                answer=answer,
                provenance=provenance,
                nil_pattern=pattern,
                seed_entity=seed,
            )
        )
    return ToyBenchmark(entries, kb, system, assignment)
