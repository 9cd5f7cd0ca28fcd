"""Dataset construction: seed selection, entry discovery, noise filters,
entity masking, splits, and statistics.

Entries are stored one JSON record per line with a stable field order
(id, left, mention, right, candidates, answer, provenance, masked,
nil_pattern, seed_entity). NIL answers serialize as the literal string
``"NIL"``; unannotated answers as ``null``.
"""

from __future__ import annotations

import json
import logging
import math
import random
from collections import Counter
from dataclasses import dataclass, field, replace

from .corpus import AliasTable, ContextWindow, extract_context, find_occurrences
from .errors import ContractViolation

logger = logging.getLogger(__name__)

NIL = "NIL"
UNANNOTATED = None

MISSING_ENTITY = "MissingEntity"
NON_ENTITY_PHRASE = "NonEntityPhrase"

HYPERLINK = "Hyperlink"
PLAIN_TEXT = "PlainText"

MIN_CANDIDATES = 2
MAX_CANDIDATES = 20
MIN_INCOMING_LINKS = 5
DOMINANT_SENSE_THRESHOLD = 0.5  # strictly greater discards


@dataclass(frozen=True)
class Entity:
    """A knowledge-base entry shown to annotators and rendered for scoring."""

    entity_id: str
    title: str
    description: str = ""
    url: str = ""


@dataclass
class Entry:
    entry_id: str
    context: ContextWindow
    candidates: list[str]
    answer: str | None  # entity id, NIL, or None when unannotated
    provenance: str
    masked: bool = False
    nil_pattern: str | None = None
    seed_entity: str | None = None

    def __post_init__(self):
        if self.answer not in (NIL, UNANNOTATED) and self.answer not in self.candidates:
            raise ContractViolation(
                f"entry {self.entry_id}: answer {self.answer!r} not among candidates"
            )
        if self.masked and self.answer != NIL:
            raise ContractViolation(f"entry {self.entry_id}: masked entries must answer NIL")

    @property
    def mention_surface(self) -> str:
        return " ".join(self.context.mention)

    @property
    def is_positive(self) -> bool:
        return self.answer not in (NIL, UNANNOTATED)


@dataclass(frozen=True)
class DatasetStats:
    entry_count: int
    positive_count: int
    nil_count: int
    nil_percentage: float
    mention_count: int
    entity_count: int
    avg_candidates: float


def round_half_away(x: float) -> int:
    """round() with .5 going away from zero, identically on every platform."""
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def select_seed_entities(
    table: AliasTable,
    hyperlink_counts: dict[str, int] | None = None,
    k: int = 1000,
    rng_seed: int = 0,
) -> list[str]:
    """Sample ambiguous seed entities.

    Keeps entities that share an alias with at least one other entity, have at
    least MIN_INCOMING_LINKS incoming hyperlinks, and whose best per-alias link
    probability does not exceed 0.5 (strictly greater is discarded); then
    samples ``k`` of the survivors with the given seed.
    """
    shared: set[str] = set()
    for pairs in table.entries.values():
        if len(pairs) >= 2:
            shared.update(eid for eid, _ in pairs)

    if hyperlink_counts is None:
        hyperlink_counts = {}
        for pairs in table.entries.values():
            for eid, count in pairs:
                hyperlink_counts[eid] = hyperlink_counts.get(eid, 0) + count

    max_prob: dict[str, float] = {}
    for alias, pairs in table.entries.items():
        total = table.alias_totals[alias]
        for eid, count in pairs:
            p = count / total
            if p > max_prob.get(eid, 0.0):
                max_prob[eid] = p

    survivors = sorted(
        eid
        for eid in shared
        if hyperlink_counts.get(eid, 0) >= MIN_INCOMING_LINKS
        and max_prob.get(eid, 0.0) <= DOMINANT_SENSE_THRESHOLD
    )
    if len(survivors) <= k:
        if len(survivors) < k:
            logger.warning("only %d seed candidates survive filtering (k=%d)", len(survivors), k)
        return survivors
    rng = random.Random(rng_seed)
    return sorted(rng.sample(survivors, k))


def discover_entries(
    seeds,
    docs,
    table: AliasTable,
    max_per_provenance: int = 5,
    rng_seed: int = 0,
) -> list[Entry]:
    """Gather candidate-bearing entries for every alias of every seed entity.

    Per alias, up to ``max_per_provenance`` hyperlink and plain-text
    occurrences are sampled (seeded). Hyperlink entries come with their link
    target pre-filled as the answer; plain-text entries are unannotated.
    """
    seed_set = set(seeds)
    doc_map = {d.doc_id: d for d in docs}
    aliases = sorted(
        alias
        for alias, pairs in table.entries.items()
        if any(eid in seed_set for eid, _ in pairs)
    )
    rng = random.Random(rng_seed)
    entries: list[Entry] = []
    counter = 0
    for alias in aliases:
        occs = find_occurrences(alias, docs)
        if not occs:
            continue
        candidates = table.entities(alias)
        seed_entity = min(eid for eid in candidates if eid in seed_set)
        hyper = [o for o in occs if o.is_hyperlink]
        plain = [o for o in occs if not o.is_hyperlink]
        chosen = []
        for group in (hyper, plain):
            if len(group) > max_per_provenance:
                keep = sorted(rng.sample(range(len(group)), max_per_provenance))
                group = [group[i] for i in keep]
            chosen.extend(group)
        for occ in chosen:
            if occ.is_hyperlink and occ.linked_target not in candidates:
                logger.debug("dropping %s: link target %s outside alias candidates", alias, occ.linked_target)
                continue
            context = extract_context(doc_map[occ.doc_id], occ.span)
            entries.append(
                Entry(
                    entry_id=f"entry-{counter:06d}",
                    context=context,
                    candidates=list(candidates),
                    answer=occ.linked_target if occ.is_hyperlink else UNANNOTATED,
                    provenance=HYPERLINK if occ.is_hyperlink else PLAIN_TEXT,
                    seed_entity=seed_entity,
                )
            )
            counter += 1
    return entries


# Discard reasons reported by filter_entry. Sub-span-of-word matches never
# reach this stage: occurrence search only matches whole token sequences.
STAR_TOKEN = "StarToken"
SINGLE_CANDIDATE = "SingleCandidate"
TOO_MANY_CANDIDATES = "TooManyCandidates"
DOMINANT_SENSE = "DominantSense"


def filter_entry(entry: Entry, table: AliasTable | None = None) -> str | None:
    """Return None to keep the entry, or the discard reason."""
    window = entry.context
    if "*" in window.left or "*" in window.mention or "*" in window.right:
        return STAR_TOKEN
    if len(entry.candidates) < MIN_CANDIDATES:
        return SINGLE_CANDIDATE
    if len(entry.candidates) > MAX_CANDIDATES:
        return TOO_MANY_CANDIDATES
    if table is not None:
        alias = entry.mention_surface
        best = max((table.link_probability(alias, eid) for eid in entry.candidates), default=0.0)
        if best > DOMINANT_SENSE_THRESHOLD:
            return DOMINANT_SENSE
    return None


def filter_entries(entries, table: AliasTable | None = None) -> tuple[list[Entry], Counter]:
    kept: list[Entry] = []
    reasons: Counter = Counter()
    for entry in entries:
        reason = filter_entry(entry, table)
        if reason is None:
            kept.append(entry)
        else:
            reasons[reason] += 1
    if reasons:
        logger.info("filtered %d entries: %s", sum(reasons.values()), dict(reasons))
    return kept, reasons


def mask_positives(entries, rate: float, rng_seed: int = 0) -> list[Entry]:
    """Convert round(rate * positives) positive entries into NIL entries by
    removing the gold entity from their candidate sets."""
    if not 0.0 <= rate <= 1.0:
        raise ContractViolation(f"mask rate {rate} outside [0, 1]")
    positives = [i for i, e in enumerate(entries) if e.is_positive]
    n_mask = round_half_away(rate * len(positives))
    rng = random.Random(rng_seed)
    chosen = set(rng.sample(positives, n_mask)) if n_mask else set()
    out: list[Entry] = []
    for i, entry in enumerate(entries):
        if i in chosen:
            out.append(
                replace(
                    entry,
                    candidates=[c for c in entry.candidates if c != entry.answer],
                    answer=NIL,
                    masked=True,
                    nil_pattern=MISSING_ENTITY,
                )
            )
        else:
            out.append(entry)
    return out


def split_dataset(
    entries,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    rng_seed: int = 0,
    group_by_mention: bool = False,
) -> dict[str, list[Entry]]:
    """Seeded shuffle followed by a contiguous cut; validation and test sizes
    are floored and the remainder goes to train. ``group_by_mention`` keeps
    every entry of one mention surface inside a single split."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ContractViolation(f"split ratios {ratios} must sum to 1")
    entries = list(entries)
    n = len(entries)
    n_val = math.floor(n * ratios[1])
    n_test = math.floor(n * ratios[2])
    n_train = n - n_val - n_test
    rng = random.Random(rng_seed)

    if group_by_mention:
        groups: dict[str, list[Entry]] = {}
        for e in entries:
            groups.setdefault(e.mention_surface, []).append(e)
        keys = sorted(groups)
        rng.shuffle(keys)
        splits = {"train": [], "validation": [], "test": []}
        placed = 0
        for key in keys:
            if placed < n_train:
                splits["train"].extend(groups[key])
            elif placed < n_train + n_val:
                splits["validation"].extend(groups[key])
            else:
                splits["test"].extend(groups[key])
            placed += len(groups[key])
        return splits

    order = list(range(n))
    rng.shuffle(order)
    shuffled = [entries[i] for i in order]
    return {
        "train": shuffled[:n_train],
        "validation": shuffled[n_train:n_train + n_val],
        "test": shuffled[n_train + n_val:],
    }


def dataset_stats(entries) -> DatasetStats:
    entries = list(entries)
    positives = sum(1 for e in entries if e.is_positive)
    nils = sum(1 for e in entries if e.answer == NIL)
    mentions = {e.mention_surface for e in entries}
    related: set[str] = set()
    for e in entries:
        related.update(e.candidates)
        if e.is_positive:
            related.add(e.answer)
    return DatasetStats(
        entry_count=len(entries),
        positive_count=positives,
        nil_count=nils,
        nil_percentage=nils / len(entries) if entries else 0.0,
        mention_count=len(mentions),
        entity_count=len(related),
        avg_candidates=(
            sum(len(e.candidates) for e in entries) / len(entries) if entries else 0.0
        ),
    )


def format_stats(stats: DatasetStats) -> str:
    lines = [
        f"entries\t{stats.entry_count}",
        f"positive\t{stats.positive_count}",
        f"nil\t{stats.nil_count}",
        f"nil_percentage\t{stats.nil_percentage * 100:.2f}%",
        f"mentions\t{stats.mention_count}",
        f"entities\t{stats.entity_count}",
        f"avg_candidates\t{stats.avg_candidates:.2f}",
    ]
    return "\n".join(lines)


def entry_to_record(entry: Entry) -> dict:
    return {
        "id": entry.entry_id,
        "left": list(entry.context.left),
        "mention": list(entry.context.mention),
        "right": list(entry.context.right),
        "candidates": list(entry.candidates),
        "answer": entry.answer,
        "provenance": entry.provenance,
        "masked": entry.masked,
        "nil_pattern": entry.nil_pattern,
        "seed_entity": entry.seed_entity,
    }


def entry_from_record(rec: dict) -> Entry:
    return Entry(
        entry_id=rec["id"],
        context=ContextWindow(tuple(rec["left"]), tuple(rec["mention"]), tuple(rec["right"])),
        candidates=list(rec["candidates"]),
        answer=rec["answer"],
        provenance=rec["provenance"],
        masked=rec.get("masked", False),
        nil_pattern=rec.get("nil_pattern"),
        seed_entity=rec.get("seed_entity"),
    )


def save_entries(entries, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(entry_to_record(entry), ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")


def load_entries(path) -> list[Entry]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                entries.append(entry_from_record(json.loads(line)))
    return entries


def save_kb(entities, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ent in entities:
            rec = {
                "id": ent.entity_id,
                "title": ent.title,
                "description": ent.description,
                "url": ent.url,
            }
            fh.write(json.dumps(rec, ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")


def load_kb(path) -> dict[str, Entity]:
    kb: dict[str, Entity] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            kb[rec["id"]] = Entity(rec["id"], rec["title"], rec.get("description", ""), rec.get("url", ""))
    return kb
