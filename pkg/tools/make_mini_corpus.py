#!/usr/bin/env python3
"""Regenerate the bundled miniature corpus under tests/data/mini/.

The corpus is tuned so seed selection finds a healthy set of ambiguous
entities: most aliases map to 2-3 entities with balanced hyperlink counts
(probability exactly 0.5 stays eligible), one alias has a dominant sense,
and a couple of documents carry '*' tokens to exercise the noise filter.
"""

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "mini"

# alias -> [(entity id, leaf type, hyperlink count)]
ALIASES = {
    "Mercury": [("Mercury (planet)", "Planet", 6), ("Mercury (element)", "ChemicalElement", 6)],
    "Phoenix": [("Phoenix (city)", "City", 5), ("Phoenix (bird)", "MythicalCreature", 5), ("Phoenix (band)", "Band", 5)],
    "Jaguar": [("Jaguar (animal)", "Animal", 6), ("Jaguar (car)", "Company", 6)],
    "Orion": [("Orion (constellation)", "Constellation", 5), ("Orion (spacecraft)", "Spacecraft", 5)],
    "Vesta": [("Vesta (asteroid)", "Asteroid", 6), ("Vesta (goddess)", "Deity", 6)],
    "Aurora": [("Aurora (phenomenon)", "NaturalPhenomenon", 5), ("Aurora (city)", "City", 5), ("Aurora (film)", "Film", 5)],
    "Titan": [("Titan (moon)", "Moon", 6), ("Titan (mythology)", "Deity", 6)],
    "Delta": [("Delta (airline)", "Company", 5), ("Delta (letter)", "Letter", 5)],
    "Sparta": [("Sparta (city)", "City", 5), ("Sparta (band)", "Band", 5)],
    "Lotus": [("Lotus (plant)", "Plant", 6), ("Lotus (cars)", "Company", 6)],
    "Nova": [("Nova (astronomy)", "NaturalPhenomenon", 5), ("Nova (series)", "TelevisionShow", 5)],
    "New Holland": [("New Holland (continent)", "Continent", 5), ("New Holland (company)", "Company", 5)],
    # dominant sense: the company soaks up 90% of the links
    "Amazon": [("Amazon (company)", "Company", 9), ("Amazon (river)", "River", 1)],
}

SUBCLASS_OF = [
    ("Planet", "AstronomicalObject"),
    ("Moon", "AstronomicalObject"),
    ("Asteroid", "AstronomicalObject"),
    ("Constellation", "AstronomicalObject"),
    ("AstronomicalObject", "Place"),
    ("City", "Settlement"),
    ("Settlement", "Place"),
    ("Continent", "Place"),
    ("River", "Place"),
    ("ChemicalElement", "Substance"),
    ("Substance", "Topical Concept"),
    ("Letter", "Symbol"),
    ("Symbol", "Topical Concept"),
    ("Animal", "Species"),
    ("Plant", "Species"),
    ("Band", "MusicalGroup"),
    ("MusicalGroup", "Organization"),
    ("Company", "Organization"),
    ("Deity", "MythologicalFigure"),
    ("MythicalCreature", "MythologicalFigure"),
    ("MythologicalFigure", "Fictional Character"),
    ("Film", "Work"),
    ("TelevisionShow", "Work"),
    ("NaturalPhenomenon", "Event"),
    ("Spacecraft", "Vehicle"),
    ("Vehicle", "Device"),
]

FILLER = (
    "survey records describe how local archives mention the subject in several "
    "catalogued reports compiled by regional historians during the early decades "
    "while later studies revisited those observations and expanded the notes with "
    "further commentary about origins usage and reception across many sources"
).split()

PLAIN_PER_ALIAS = 4


def sentence(rng, words=10):
    return " ".join(rng.choice(FILLER) for _ in range(words))


def main():
    rng = random.Random(42)
    OUT.mkdir(parents=True, exist_ok=True)

    events = []  # (alias, entity or None); None = plain-text occurrence
    for alias, senses in ALIASES.items():
        for entity_id, _leaf, count in senses:
            events.extend((alias, entity_id) for _ in range(count))
        events.extend((alias, None) for _ in range(PLAIN_PER_ALIAS))
    rng.shuffle(events)

    docs = []
    i = 0
    while i < len(events):
        take = rng.randint(2, 3)
        chunk = events[i:i + take]
        parts = [sentence(rng, rng.randint(4, 7))]
        for alias, entity_id in chunk:
            if entity_id is None:
                parts.append(f"{alias} {sentence(rng, rng.randint(4, 8))}")
            else:
                parts.append(f"[[{entity_id}|{alias}]] {sentence(rng, rng.randint(4, 8))}")
        docs.append(" ".join(parts) + " .")
        i += take

    # noise documents: '*' tokens around an ambiguous alias occurrence
    docs.append(f"* Mercury listing {sentence(rng, 5)} * {sentence(rng, 4)}")
    docs.append(f"* Phoenix table {sentence(rng, 5)} * {sentence(rng, 4)}")
    # a lowercase occurrence: alias matching is case-sensitive
    docs.append(f"the mercury reading rose {sentence(rng, 6)}")

    while len(docs) < 56:
        docs.append(sentence(rng, rng.randint(8, 14)) + " .")
    rng.shuffle(docs)

    with open(OUT / "corpus.tsv", "w", encoding="utf-8") as fh:
        for n, body in enumerate(docs):
            fh.write(f"doc-{n:03d}\t{body}\n")
        fh.write("doc-empty\t\n")

    with open(OUT / "instance_of.tsv", "w", encoding="utf-8") as fh:
        for alias, senses in sorted(ALIASES.items()):
            for entity_id, leaf, _count in senses:
                fh.write(f"{entity_id}\t{leaf}\n")

    with open(OUT / "subclass_of.tsv", "w", encoding="utf-8") as fh:
        for child, parent in SUBCLASS_OF:
            fh.write(f"{child}\t{parent}\n")

    with open(OUT / "kb.jsonl", "w", encoding="utf-8") as fh:
        for alias, senses in sorted(ALIASES.items()):
            for entity_id, leaf, _count in senses:
                rec = {
                    "id": entity_id,
                    "title": entity_id,
                    "description": f"{entity_id} is a {leaf.lower()} frequently called {alias} in the sources",
                    "url": f"https://kb.example/{entity_id.replace(' ', '_')}",
                }
                fh.write(json.dumps(rec, ensure_ascii=False, separators=(",", ":")) + "\n")

    print(f"wrote {len(docs) + 1} corpus records to {OUT}")


if __name__ == "__main__":
    main()
