"""Hyperlinked corpus handling: parsing, alias table, mention search, context windows.

The corpus format is one UTF-8 record per line, ``doc_id<TAB>body``, where the
body is a wikitext subset: ``[[Target|anchor]]`` and ``[[Target]]`` hyperlinks
embedded in plain text. Anything else (templates, media, tables) is assumed to
have been stripped before ingest. Malformed link markup degrades to plain
tokens rather than failing the document.
"""

from __future__ import annotations

import logging
import re
import unicodedata
from dataclasses import dataclass, field

from .errors import ContractViolation

logger = logging.getLogger(__name__)

# Context windowing budgets: up to SIDE_BUDGET tokens per side, and the whole
# window (left + mention + right) never exceeds CONTEXT_BUDGET tokens.
SIDE_BUDGET = 64
CONTEXT_BUDGET = 128

_LINK_RE = re.compile(r"\[\[([^\[\]|]+)(?:\|([^\[\]]*))?\]\]")
_WS_RE = re.compile(r"\s+")


def _is_separator(ch: str) -> bool:
    # Brackets are kept attached so that broken link markup survives as-is.
    if ch in "[]":
        return False
    return unicodedata.category(ch)[0] in ("P", "S")


def tokenize(text: str) -> list[str]:
    """Split on whitespace, then peel leading/trailing punctuation into
    single-character tokens. Interior punctuation (hyphens, apostrophes)
    stays attached."""
    tokens: list[str] = []
    for chunk in text.split():
        head: list[str] = []
        tail: list[str] = []
        while chunk and _is_separator(chunk[0]):
            head.append(chunk[0])
            chunk = chunk[1:]
        while chunk and _is_separator(chunk[-1]):
            tail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(head)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(tail))
    return tokens


def normalize_ws(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


@dataclass(frozen=True)
class Link:
    start: int
    stop: int  # exclusive
    target: str


@dataclass
class Document:
    doc_id: str
    tokens: list[str]
    links: list[Link] = field(default_factory=list)

    def __post_init__(self):
        if not self.tokens:
            raise ContractViolation(f"document {self.doc_id!r} has no tokens")
        last = 0
        for link in sorted(self.links, key=lambda l: l.start):
            if link.start < last or link.stop > len(self.tokens) or link.stop <= link.start:
                raise ContractViolation(
                    f"document {self.doc_id!r} has an out-of-bounds or overlapping link span"
                )
            last = link.stop


@dataclass(frozen=True)
class Occurrence:
    doc_id: str
    span: tuple[int, int]
    surface: str
    is_hyperlink: bool
    linked_target: str | None = None

    def __post_init__(self):
        if self.is_hyperlink != (self.linked_target is not None):
            raise ContractViolation("linked_target must be present iff is_hyperlink")


@dataclass(frozen=True)
class ContextWindow:
    left: tuple[str, ...]
    mention: tuple[str, ...]
    right: tuple[str, ...]

    def __post_init__(self):
        if len(self.left) + len(self.mention) + len(self.right) > CONTEXT_BUDGET:
            raise ContractViolation("context window exceeds the token budget")


def parse_body(body: str) -> tuple[list[str], list[Link]]:
    """Tokenize one document body, turning well-formed link markup into spans."""
    tokens: list[str] = []
    links: list[Link] = []
    pos = 0
    for m in _LINK_RE.finditer(body):
        tokens.extend(tokenize(body[pos:m.start()]))
        target = normalize_ws(m.group(1))
        anchor = m.group(2) if m.group(2) is not None else m.group(1)
        anchor_tokens = tokenize(anchor)
        if target and anchor_tokens:
            start = len(tokens)
            tokens.extend(anchor_tokens)
            links.append(Link(start, len(tokens), target))
        else:
            # [[|x]], [[Target|]] and friends degrade to plain tokens
            tokens.extend(tokenize(m.group(0)))
        pos = m.end()
    tokens.extend(tokenize(body[pos:]))
    return tokens, links


def parse_documents(lines) -> list[Document]:
    """Parse a corpus stream of ``doc_id<TAB>body`` lines.

    Empty-bodied or malformed records are skipped; one warning reports the
    total skipped count.
    """
    docs: list[Document] = []
    skipped = 0
    for line in lines:
        line = line.rstrip("\n")
        if not line:
            continue
        doc_id, sep, body = line.partition("\t")
        if not sep or not doc_id.strip():
            skipped += 1
            continue
        tokens, links = parse_body(body)
        if not tokens:
            skipped += 1
            continue
        docs.append(Document(doc_id.strip(), tokens, links))
    if skipped:
        logger.warning("skipped %d empty or malformed corpus records", skipped)
    return docs


def read_corpus(path) -> list[Document]:
    with open(path, encoding="utf-8") as fh:
        return parse_documents(fh)


def serialize_document(doc: Document) -> str:
    """Render a document back into the corpus line format. Parsing the result
    yields the same tokens and links (links are emitted in piped form)."""
    parts: list[str] = []
    by_start = {l.start: l for l in doc.links}
    i = 0
    while i < len(doc.tokens):
        link = by_start.get(i)
        if link is not None:
            anchor = " ".join(doc.tokens[link.start:link.stop])
            parts.append(f"[[{link.target}|{anchor}]]")
            i = link.stop
        else:
            parts.append(doc.tokens[i])
            i += 1
    return f"{doc.doc_id}\t{' '.join(parts)}"


def write_corpus(docs, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(serialize_document(doc) + "\n")


@dataclass
class AliasTable:
    """alias -> [(entity_id, link_count)] with per-alias totals.

    Entity lists are kept sorted by (count desc, entity id asc); totals always
    equal the sum of per-entity counts for that alias.
    """

    entries: dict[str, list[tuple[str, int]]] = field(default_factory=dict)
    alias_totals: dict[str, int] = field(default_factory=dict)

    def entities(self, alias: str) -> list[str]:
        return [eid for eid, _ in self.entries.get(alias, [])]

    def link_probability(self, alias: str, entity_id: str) -> float:
        total = self.alias_totals.get(alias, 0)
        if total == 0:
            return 0.0
        for eid, count in self.entries.get(alias, []):
            if eid == entity_id:
                return count / total
        return 0.0

    def aliases_of(self, entity_id: str) -> list[str]:
        return sorted(a for a, pairs in self.entries.items() if any(e == entity_id for e, _ in pairs))

    def incoming_links(self, entity_id: str) -> int:
        return sum(c for pairs in self.entries.values() for e, c in pairs if e == entity_id)


def build_alias_table(docs) -> AliasTable:
    counts: dict[str, dict[str, int]] = {}
    for doc in docs:
        for link in doc.links:
            surface = " ".join(doc.tokens[link.start:link.stop])
            per_alias = counts.setdefault(surface, {})
            per_alias[link.target] = per_alias.get(link.target, 0) + 1
    table = AliasTable()
    for alias, per_alias in counts.items():
        pairs = sorted(per_alias.items(), key=lambda kv: (-kv[1], kv[0]))
        table.entries[alias] = pairs
        table.alias_totals[alias] = sum(per_alias.values())
    return table


def save_alias_table(table: AliasTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for alias in sorted(table.entries):
            for eid, count in table.entries[alias]:
                fh.write(f"{alias}\t{eid}\t{count}\n")


def load_alias_table(path) -> AliasTable:
    table = AliasTable()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            alias, eid, count = line.split("\t")
            table.entries.setdefault(alias, []).append((eid, int(count)))
            table.alias_totals[alias] = table.alias_totals.get(alias, 0) + int(count)
    for alias in table.entries:
        table.entries[alias].sort(key=lambda kv: (-kv[1], kv[0]))
    return table


def find_occurrences(alias: str, docs) -> list[Occurrence]:
    """All token-boundary-aligned matches of the alias across the corpus.

    A match whose span equals a hyperlink span is that hyperlink occurrence;
    a match that merely overlaps some link span is dropped (it would cut
    through another mention); everything else is a plain-text occurrence.
    """
    if not alias:
        raise ContractViolation("alias must be non-empty")
    alias_tokens = tokenize(alias)
    if not alias_tokens:
        raise ContractViolation(f"alias {alias!r} has no tokens")
    n = len(alias_tokens)
    found: list[Occurrence] = []
    for doc in docs:
        spans = {(l.start, l.stop): l.target for l in doc.links}
        for i in range(len(doc.tokens) - n + 1):
            if doc.tokens[i:i + n] != alias_tokens:
                continue
            span = (i, i + n)
            target = spans.get(span)
            if target is not None:
                found.append(Occurrence(doc.doc_id, span, " ".join(alias_tokens), True, target))
            elif any(l.start < span[1] and span[0] < l.stop for l in doc.links):
                continue
            else:
                found.append(Occurrence(doc.doc_id, span, " ".join(alias_tokens), False))
    return found


def extract_context(doc: Document, span: tuple[int, int]) -> ContextWindow:
    """Window up to SIDE_BUDGET tokens per side around the span; a side's
    unused allowance is granted to the other side; the total is then trimmed
    back to CONTEXT_BUDGET by discarding outermost tokens, longest side first.
    Mention tokens are never trimmed."""
    start, stop = span
    if not (0 <= start < stop <= len(doc.tokens)):
        raise ContractViolation(f"span {span} out of bounds for document {doc.doc_id!r}")
    mention = doc.tokens[start:stop]
    if len(mention) > CONTEXT_BUDGET:
        raise ContractViolation("mention alone exceeds the context budget")
    avail_left, avail_right = start, len(doc.tokens) - stop
    want_left = min(avail_left, SIDE_BUDGET + max(0, SIDE_BUDGET - avail_right))
    want_right = min(avail_right, SIDE_BUDGET + max(0, SIDE_BUDGET - avail_left))
    left = doc.tokens[start - want_left:start]
    right = doc.tokens[stop:stop + want_right]
    while len(left) + len(mention) + len(right) > CONTEXT_BUDGET:
        if len(left) >= len(right):
            left = left[1:]
        else:
            right = right[:-1]
    return ContextWindow(tuple(left), tuple(mention), tuple(right))
