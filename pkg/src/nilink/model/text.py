"""Textual rendering of entries and entities, and hashed token ids.

Context:  [CLS] C_l [m_start] m [m_end] C_r [SEP]
Entity:   [CLS] title [m_title] description [SEP]
Cross:    the two concatenated around the shared [SEP].

Marker strings contain brackets, which the corpus tokenizer never emits as
part of a token, so markers cannot collide with corpus text. They also get
reserved hash slots below the ordinary token range.
"""

from __future__ import annotations

import hashlib

import numpy as np

from ..corpus import tokenize
from ..dataset import Entity, Entry

CLS = "[CLS]"
SEP = "[SEP]"
M_START = "[m_start]"
M_END = "[m_end]"
M_TITLE = "[m_title]"

_MARKER_IDS = {CLS: 0, SEP: 1, M_START: 2, M_END: 3, M_TITLE: 4}
N_RESERVED = len(_MARKER_IDS)

SEQUENCE_BUDGET = 128  # applies to entity renderings; context windows are pre-capped


def token_id(token: str, vocab_size: int) -> int:
    if token in _MARKER_IDS:
        return _MARKER_IDS[token]
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return N_RESERVED + int.from_bytes(digest, "little") % (vocab_size - N_RESERVED)


def encode(tokens, vocab_size: int) -> np.ndarray:
    return np.array([token_id(t, vocab_size) for t in tokens], dtype=np.int64)


def render_context(entry: Entry) -> list[str]:
    w = entry.context
    return [CLS, *w.left, M_START, *w.mention, M_END, *w.right, SEP]


def render_entity(entity: Entity) -> list[str]:
    title = tokenize(entity.title)
    desc = tokenize(entity.description)
    budget = SEQUENCE_BUDGET - 3  # CLS, M_TITLE, SEP
    if len(title) > budget:
        title = title[:budget]
    desc = desc[:budget - len(title)]
    return [CLS, *title, M_TITLE, *desc, SEP]


def render_cross(entry: Entry, entity: Entity) -> list[str]:
    return render_context(entry)[:-1] + [SEP] + render_entity(entity)[1:]
