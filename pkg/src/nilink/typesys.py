"""Tree-form type system built from instance-of / subclass-of relations.

Each type has at most one parent (multi-parent inputs keep the
lexicographically smallest), cycles are broken deterministically, and every
entity resolves to a primary type whose ancestor line supplies both the
human-readable ``A->B->C`` type line and the multi-hot label vector used by
the typing heads.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

OTHER = "Other"

# Top-level set used when transferring a model across corpora with different
# type distributions.
TOP_LEVEL_TYPES = (
    OTHER,
    "Person",
    "Place",
    "Work",
    "Organization",
    "Event",
    "Fictional Character",
    "Species",
    "Activity",
    "Device",
    "Topical Concept",
    "Ethnic Group",
    "Food",
    "Disease",
)


@dataclass
class TypeSystem:
    nodes: dict[str, str | None] = field(default_factory=dict)  # type id -> parent id
    index: dict[str, int] = field(default_factory=dict)

    @property
    def n_t(self) -> int:
        return len(self.nodes)

    @property
    def roots(self) -> set[str]:
        return {t for t, parent in self.nodes.items() if parent is None}

    def line(self, type_id: str) -> list[str]:
        """Path from a type up to its root, inclusive."""
        path = [type_id]
        seen = {type_id}
        parent = self.nodes.get(type_id)
        while parent is not None and parent not in seen:
            path.append(parent)
            seen.add(parent)
            parent = self.nodes.get(parent)
        return path

    def root_of(self, type_id: str) -> str:
        return self.line(type_id)[-1]

    def _reindex(self) -> None:
        self.index = {t: i for i, t in enumerate(sorted(self.nodes))}


def build_type_system(instance_of, subclass_of) -> tuple[TypeSystem, dict[str, str]]:
    """Build the tree and the entity -> primary type assignment.

    ``instance_of`` is an iterable of (entity, type) pairs, ``subclass_of`` of
    (child, parent) pairs. Multiple parents collapse to the lexicographically
    smallest; cycles are cut at their smallest member; entities with several
    instance-of targets take the smallest.
    """
    parents: dict[str, str] = {}
    types: set[str] = {OTHER}
    for child, parent in subclass_of:
        types.add(child)
        types.add(parent)
        if child == parent:
            continue
        if child not in parents or parent < parents[child]:
            parents[child] = parent

    assignment: dict[str, str] = {}
    for entity, type_id in instance_of:
        types.add(type_id)
        if entity not in assignment or type_id < assignment[entity]:
            assignment[entity] = type_id

    system = TypeSystem(nodes={t: parents.get(t) for t in types})

    # Cut each parent cycle at its lexicographically smallest member.
    resolved: set[str] = set()
    for start in sorted(system.nodes):
        path: list[str] = []
        on_path: set[str] = set()
        node = start
        while node is not None and node not in resolved:
            if node in on_path:
                cycle = path[path.index(node):]
                cut = min(cycle)
                system.nodes[cut] = None
                logger.debug("type cycle %s cut at %s", cycle, cut)
                break
            path.append(node)
            on_path.add(node)
            node = system.nodes[node]
        resolved.update(path)

    system._reindex()
    return system, assignment


def primary_type(entity_id: str, assignment: dict[str, str]) -> str:
    return assignment.get(entity_id, OTHER)


def type_line(entity_id: str, system: TypeSystem, assignment: dict[str, str]) -> str:
    """The entity's type path rendered root-last, e.g. ``Song->MusicalWork->Work``."""
    t = primary_type(entity_id, assignment)
    if t not in system.nodes:
        t = OTHER
    return "->".join(system.line(t))


def type_vector(entity_id: str, system: TypeSystem, assignment: dict[str, str]) -> np.ndarray:
    """Multi-hot labels over all ``n_t`` types: the primary type and every
    ancestor on its line are 1."""
    vec = np.zeros(system.n_t, dtype=np.float64)
    t = primary_type(entity_id, assignment)
    if t not in system.nodes:
        t = OTHER
    for node in system.line(t):
        vec[system.index[node]] = 1.0
    return vec


def restrict_top_level(system: TypeSystem) -> TypeSystem:
    """The fixed 14-type top-level system (idempotent)."""
    del system  # the restricted system does not depend on the source tree
    restricted = TypeSystem(nodes={t: None for t in TOP_LEVEL_TYPES})
    restricted._reindex()
    return restricted


def restrict_assignment(
    system: TypeSystem, assignment: dict[str, str]
) -> dict[str, str]:
    """Remap each entity to the root of its former line, or Other when that
    root is not one of the 14 top-level types."""
    top = set(TOP_LEVEL_TYPES)
    out: dict[str, str] = {}
    for entity, t in assignment.items():
        root = system.root_of(t) if t in system.nodes else OTHER
        out[entity] = root if root in top else OTHER
    return out


def load_pairs(path) -> list[tuple[str, str]]:
    """Read tab-separated pair lines (``entity<TAB>type`` or ``child<TAB>parent``)."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            a, b = line.split("\t")
            pairs.append((a, b))
    return pairs


def save_type_system(system: TypeSystem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in sorted(system.nodes):
            fh.write(f"{t}\t{system.nodes[t] or ''}\n")


def load_type_system(path) -> TypeSystem:
    system = TypeSystem()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            t, parent = line.split("\t")
            system.nodes[t] = parent or None
    system._reindex()
    return system


def save_assignment(assignment: dict[str, str], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entity in sorted(assignment):
            fh.write(f"{entity}\t{assignment[entity]}\n")


def load_assignment(path) -> dict[str, str]:
    return dict(load_pairs(path))


def save_type_lines(entities, system: TypeSystem, assignment: dict[str, str], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entity in sorted(entities):
            fh.write(f"{entity}\t{type_line(entity, system, assignment)}\n")
