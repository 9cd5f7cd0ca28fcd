"""Desk-scale trainable linkers.

Two scorer structures share one interface: the bi-encoder embeds context and
entity separately and scores them by sigmoid inner product; the cross-encoder
embeds the concatenated pair and scores it with a linear head. Both carry
sigmoid typing heads trained with focal loss, and the final score is a
weighted sum of semantic and type-cosine similarity. A mention links to NIL
when no candidate reaches the threshold.

Encoders are hashed-token embedding tables with mean pooling, which keeps
every gradient exact and checkable; heavier encoders can replace them behind
the same functions.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field

import numpy as np

from ..dataset import NIL, NON_ENTITY_PHRASE, UNANNOTATED, Entity, Entry
from ..errors import ContractViolation
from ..typesys import OTHER, TypeSystem, type_vector
from . import kernels as K
from .text import encode, render_context, render_cross, render_entity

logger = logging.getLogger(__name__)

BI = "bi"
CROSS = "cross"

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

CHECKPOINT_MAGIC = b"NLNK"
CHECKPOINT_VERSION = 1
_HEADER_FMT = "<4sIBIIIddd"


@dataclass
class LinkerConfig:
    mode: str = CROSS
    embed_dim: int = 32
    hash_vocab: int = 4096
    lam: float = 0.5
    nil_threshold: float = 0.5
    focal_gamma: float = 2.0
    learning_rate: float = 1e-5
    epochs: int = 4
    batch_size: int = 1
    rng_seed: int = 0
    typing_enabled: bool = True

    def __post_init__(self):
        if self.mode not in (BI, CROSS):
            raise ContractViolation(f"mode must be {BI!r} or {CROSS!r}, not {self.mode!r}")
        if not 0.0 <= self.lam <= 1.0:
            raise ContractViolation(f"lambda {self.lam} outside [0, 1]")
        if self.focal_gamma < 0.0:
            raise ContractViolation(f"gamma {self.focal_gamma} must be nonnegative")
        if self.embed_dim <= 0 or self.hash_vocab <= 8:
            raise ContractViolation("embed_dim and hash_vocab must be positive (vocab > 8)")


def param_shapes(mode: str, vocab: int, dim: int, n_t: int) -> list[tuple[str, tuple[int, ...]]]:
    """Declared parameter order; the checkpoint stores blocks in this order."""
    if mode == BI:
        return [
            ("ctx_embed", (vocab, dim)),
            ("ent_embed", (vocab, dim)),
            ("type_ctx_w", (n_t, dim)),
            ("type_ctx_b", (n_t,)),
            ("type_ent_w", (n_t, dim)),
            ("type_ent_b", (n_t,)),
        ]
    return [
        ("joint_embed", (vocab, dim)),
        ("score_w", (dim,)),
        ("score_b", (1,)),
        ("type_w", (2 * n_t, dim)),
        ("type_b", (2 * n_t,)),
    ]


@dataclass
class LinkerModel:
    config: LinkerConfig
    n_t: int
    params: dict[str, np.ndarray] = field(default_factory=dict)

    def check_finite(self) -> bool:
        return all(np.isfinite(p).all() for p in self.params.values())


def init_model(config: LinkerConfig, n_t: int) -> LinkerModel:
    """Seeded initialization: small random embeddings, zero heads (so fresh
    models emit probability 0.5 everywhere)."""
    rng = np.random.default_rng(config.rng_seed)
    params: dict[str, np.ndarray] = {}
    for name, shape in param_shapes(config.mode, config.hash_vocab, config.embed_dim, n_t):
        if name.endswith("_embed"):
            params[name] = rng.normal(0.0, 0.1, shape)
        else:
            params[name] = np.zeros(shape, dtype=np.float64)
    return LinkerModel(config, n_t, params)


@dataclass
class TrainingPair:
    label: float
    y_ctx: np.ndarray
    y_ent: np.ndarray
    ctx_ids: np.ndarray | None = None
    ent_ids: np.ndarray | None = None
    joint_ids: np.ndarray | None = None


def context_type_labels(entry: Entry, system: TypeSystem, assignment: dict[str, str]) -> np.ndarray:
    """Gold type labels for the context side.

    Positive entries use the answer entity's line. Missing-entity NIL entries
    use the seed entity's line (the referent exists, just not among the
    candidates); the first candidate is the fallback anchor. Non-entity
    phrases denote no entity, so their context is labeled with the reserved
    Other type: a real direction in type space, which keeps the prediction
    away from the degenerate uniform vector that cosine similarity cannot
    tell apart from anything.
    """
    if entry.is_positive:
        return type_vector(entry.answer, system, assignment)
    if entry.nil_pattern == NON_ENTITY_PHRASE:
        vec = np.zeros(system.n_t, dtype=np.float64)
        if OTHER in system.index:
            vec[system.index[OTHER]] = 1.0
        return vec
    anchor = entry.seed_entity or (entry.candidates[0] if entry.candidates else None)
    if anchor is None:
        return np.zeros(system.n_t, dtype=np.float64)
    return type_vector(anchor, system, assignment)


def make_training_pairs(
    entry: Entry,
    system: TypeSystem,
    assignment: dict[str, str],
    kb: dict[str, Entity],
    config: LinkerConfig,
) -> list[TrainingPair]:
    """One pair per candidate; the label is 1 exactly for the answer entity,
    and every pair of a NIL entry is negative."""
    if entry.answer is UNANNOTATED:
        raise ContractViolation(f"entry {entry.entry_id} is unannotated")
    y_ctx = context_type_labels(entry, system, assignment)
    pairs: list[TrainingPair] = []
    for candidate in entry.candidates:
        entity = kb.get(candidate) or Entity(candidate, candidate)
        label = 1.0 if candidate == entry.answer else 0.0
        y_ent = type_vector(candidate, system, assignment)
        if config.mode == BI:
            pairs.append(
                TrainingPair(
                    label, y_ctx, y_ent,
                    ctx_ids=encode(render_context(entry), config.hash_vocab),
                    ent_ids=encode(render_entity(entity), config.hash_vocab),
                )
            )
        else:
            pairs.append(
                TrainingPair(
                    label, y_ctx, y_ent,
                    joint_ids=encode(render_cross(entry, entity), config.hash_vocab),
                )
            )
    return pairs


# -- forward ---------------------------------------------------------------


def _pool(model: LinkerModel, table: str, ids: np.ndarray) -> np.ndarray:
    return K.mean_pool(model.params[table], ids)


def score_semantic(model: LinkerModel, entry: Entry, entity: Entity) -> float:
    """Semantic similarity in (0, 1) for one (context, entity) pair."""
    cfg = model.config
    if cfg.mode == BI:
        f = _pool(model, "ctx_embed", encode(render_context(entry), cfg.hash_vocab))
        g = _pool(model, "ent_embed", encode(render_entity(entity), cfg.hash_vocab))
        return float(K.sigmoid(float(f @ g)))
    h = _pool(model, "joint_embed", encode(render_cross(entry, entity), cfg.hash_vocab))
    return float(K.sigmoid(float(model.params["score_w"] @ h + model.params["score_b"][0])))


def entity_embedding(model: LinkerModel, entity: Entity) -> np.ndarray:
    """Bi-encoder entity vector; context-independent, so it can be precomputed."""
    if model.config.mode != BI:
        raise ContractViolation("entity embeddings are only separable in bi mode")
    return _pool(model, "ent_embed", encode(render_entity(entity), model.config.hash_vocab))


def predict_types(model: LinkerModel, entry: Entry, entity: Entity) -> tuple[np.ndarray, np.ndarray]:
    """Sigmoid type predictions (t_c, t_e), each of length n_t."""
    cfg = model.config
    if cfg.mode == BI:
        f = _pool(model, "ctx_embed", encode(render_context(entry), cfg.hash_vocab))
        g = _pool(model, "ent_embed", encode(render_entity(entity), cfg.hash_vocab))
        t_c = K.sigmoid(model.params["type_ctx_w"] @ f + model.params["type_ctx_b"])
        t_e = K.sigmoid(model.params["type_ent_w"] @ g + model.params["type_ent_b"])
        return t_c, t_e
    h = _pool(model, "joint_embed", encode(render_cross(entry, entity), cfg.hash_vocab))
    both = K.sigmoid(model.params["type_w"] @ h + model.params["type_b"])
    return both[: model.n_t], both[model.n_t:]


def focal_loss(t: np.ndarray, y: np.ndarray, gamma: float) -> float:
    """Multi-label focal loss; gamma = 0 reduces to binary cross-entropy."""
    t = np.asarray(t, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(K.focal_loss_value(t, y, gamma))


def type_similarity(t_c: np.ndarray, t_e: np.ndarray) -> float:
    """Cosine similarity of the two type predictions."""
    denom = float(np.linalg.norm(t_c) * np.linalg.norm(t_e))
    if denom == 0.0:
        return 0.0
    return float(t_c @ t_e) / denom


def combined_score(s_s: float, s_t: float, lam: float) -> float:
    if not 0.0 <= lam <= 1.0:
        raise ContractViolation(f"lambda {lam} outside [0, 1]")
    return lam * s_s + (1.0 - lam) * s_t


@dataclass(frozen=True)
class LinkResult:
    answer: str  # entity id or NIL
    scores: tuple[float, ...] = ()
    semantic: tuple[float, ...] = ()
    type_sim: tuple[float, ...] = ()
    empty_candidates: bool = False


def decide_link(candidates, scores, epsilon: float) -> str:
    """The thresholded argmax rule: the highest-scoring candidate wins when
    its score is at or above epsilon (first in list order on ties), otherwise
    the answer is NIL."""
    if len(candidates) != len(scores):
        raise ContractViolation("one score per candidate is required")
    if not candidates:
        return NIL
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return candidates[best] if scores[best] >= epsilon else NIL


def link_entry(
    model: LinkerModel,
    entry: Entry,
    kb: dict[str, Entity],
    lam: float | None = None,
    epsilon: float | None = None,
) -> LinkResult:
    """Score every candidate and link: the highest-scoring candidate at or
    above the threshold wins (first one on ties); NIL when none reaches it."""
    lam = model.config.lam if lam is None else lam
    epsilon = model.config.nil_threshold if epsilon is None else epsilon
    if not entry.candidates:
        return LinkResult(NIL, empty_candidates=True)
    semantic: list[float] = []
    typesim: list[float] = []
    scores: list[float] = []
    for candidate in entry.candidates:
        entity = kb.get(candidate) or Entity(candidate, candidate)
        s_s = score_semantic(model, entry, entity)
        if model.n_t > 0:
            t_c, t_e = predict_types(model, entry, entity)
            s_t = type_similarity(t_c, t_e)
            s = combined_score(s_s, s_t, lam)
        else:
            s_t = 0.0
            s = s_s
        semantic.append(s_s)
        typesim.append(s_t)
        scores.append(s)
    answer = decide_link(entry.candidates, scores, epsilon)
    return LinkResult(answer, tuple(scores), tuple(semantic), tuple(typesim))


# -- loss and gradients ------------------------------------------------------


def loss_and_grads(
    model: LinkerModel, pairs: list[TrainingPair]
) -> tuple[float, float, float, dict[str, np.ndarray]]:
    """Batch-averaged total loss (semantic + typing) and exact gradients for
    every parameter tensor."""
    cfg = model.config
    p = model.params
    grads = {name: np.zeros_like(arr) for name, arr in p.items()}
    use_typing = cfg.typing_enabled and model.n_t > 0
    total_ls = 0.0
    total_lt = 0.0

    for pair in pairs:
        if cfg.mode == BI:
            f = K.mean_pool(p["ctx_embed"], pair.ctx_ids)
            g = K.mean_pool(p["ent_embed"], pair.ent_ids)
            s = float(K.sigmoid(float(f @ g)))
            total_ls += K.bce_value(s, pair.label)
            delta_s = s - pair.label
            df = delta_s * g
            dg = delta_s * f
            if use_typing:
                t_c = K.sigmoid(p["type_ctx_w"] @ f + p["type_ctx_b"])
                t_e = K.sigmoid(p["type_ent_w"] @ g + p["type_ent_b"])
                total_lt += 0.5 * (
                    K.focal_loss_value(t_c, pair.y_ctx, cfg.focal_gamma)
                    + K.focal_loss_value(t_e, pair.y_ent, cfg.focal_gamma)
                )
                delta_c = 0.5 * K.focal_grad_logits(t_c, pair.y_ctx, cfg.focal_gamma)
                delta_e = 0.5 * K.focal_grad_logits(t_e, pair.y_ent, cfg.focal_gamma)
                grads["type_ctx_w"] += np.outer(delta_c, f)
                grads["type_ctx_b"] += delta_c
                grads["type_ent_w"] += np.outer(delta_e, g)
                grads["type_ent_b"] += delta_e
                df = df + p["type_ctx_w"].T @ delta_c
                dg = dg + p["type_ent_w"].T @ delta_e
            K.scatter_add_rows(grads["ctx_embed"], pair.ctx_ids, df / len(pair.ctx_ids))
            K.scatter_add_rows(grads["ent_embed"], pair.ent_ids, dg / len(pair.ent_ids))
        else:
            h = K.mean_pool(p["joint_embed"], pair.joint_ids)
            z = float(p["score_w"] @ h + p["score_b"][0])
            s = float(K.sigmoid(z))
            total_ls += K.bce_value(s, pair.label)
            delta_s = s - pair.label
            grads["score_w"] += delta_s * h
            grads["score_b"][0] += delta_s
            dh = delta_s * p["score_w"]
            if use_typing:
                t = K.sigmoid(p["type_w"] @ h + p["type_b"])
                y = np.concatenate([pair.y_ctx, pair.y_ent])
                total_lt += K.focal_loss_value(t, y, cfg.focal_gamma)
                delta_t = K.focal_grad_logits(t, y, cfg.focal_gamma)
                grads["type_w"] += np.outer(delta_t, h)
                grads["type_b"] += delta_t
                dh = dh + p["type_w"].T @ delta_t
            K.scatter_add_rows(grads["joint_embed"], pair.joint_ids, dh / len(pair.joint_ids))

    n = len(pairs)
    for arr in grads.values():
        arr /= n
    mean_ls = total_ls / n
    mean_lt = total_lt / n
    return mean_ls + mean_lt, mean_ls, mean_lt, grads


def total_loss(model: LinkerModel, pairs: list[TrainingPair]) -> float:
    return loss_and_grads(model, pairs)[0]


def train(
    entries,
    system: TypeSystem,
    assignment: dict[str, str],
    kb: dict[str, Entity],
    config: LinkerConfig,
    log_path=None,
) -> LinkerModel:
    """Seeded minibatch training with adaptive moment estimation. Returns the
    final-epoch model and logs one ``epoch<TAB>loss<TAB>Ls<TAB>Lt`` line per
    epoch."""
    pairs: list[TrainingPair] = []
    for entry in entries:
        pairs.extend(make_training_pairs(entry, system, assignment, kb, config))
    if not pairs:
        raise ContractViolation("training split is empty")

    model = init_model(config, system.n_t)
    mstate = {k: np.zeros_like(v) for k, v in model.params.items()}
    vstate = {k: np.zeros_like(v) for k, v in model.params.items()}
    rng = np.random.default_rng(config.rng_seed)
    step = 0
    log_fh = open(log_path, "w", encoding="utf-8") if log_path else None
    try:
        for epoch in range(config.epochs):
            order = rng.permutation(len(pairs))
            sum_loss = sum_ls = sum_lt = 0.0
            for start in range(0, len(order), config.batch_size):
                batch = [pairs[i] for i in order[start:start + config.batch_size]]
                loss, ls, lt, grads = loss_and_grads(model, batch)
                if not np.isfinite(loss):
                    raise ContractViolation(
                        f"non-finite loss in epoch {epoch} batch {start // config.batch_size}"
                    )
                step += 1
                for name, param in model.params.items():
                    K.adam_step(
                        param, grads[name], mstate[name], vstate[name],
                        step, config.learning_rate, ADAM_BETA1, ADAM_BETA2, ADAM_EPS,
                    )
                sum_loss += loss * len(batch)
                sum_ls += ls * len(batch)
                sum_lt += lt * len(batch)
            n = len(pairs)
            line = f"{epoch}\t{sum_loss / n:.6f}\t{sum_ls / n:.6f}\t{sum_lt / n:.6f}"
            logger.info("train %s", line)
            if log_fh:
                log_fh.write(line + "\n")
    finally:
        if log_fh:
            log_fh.close()
    return model


# -- checkpoints -------------------------------------------------------------


def save_model(model: LinkerModel, path) -> None:
    cfg = model.config
    header = struct.pack(
        _HEADER_FMT,
        CHECKPOINT_MAGIC,
        CHECKPOINT_VERSION,
        0 if cfg.mode == BI else 1,
        cfg.embed_dim,
        cfg.hash_vocab,
        model.n_t,
        cfg.focal_gamma,
        cfg.lam,
        cfg.nil_threshold,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for name, _ in param_shapes(cfg.mode, cfg.hash_vocab, cfg.embed_dim, model.n_t):
            fh.write(np.ascontiguousarray(model.params[name], dtype="<f4").tobytes())


def load_model(path) -> LinkerModel:
    with open(path, "rb") as fh:
        header = fh.read(struct.calcsize(_HEADER_FMT))
        if len(header) < struct.calcsize(_HEADER_FMT) or header[:4] != CHECKPOINT_MAGIC:
            raise ContractViolation(f"not a nilink v{CHECKPOINT_VERSION} checkpoint: {path}")
        magic, version, mode_byte, dim, vocab, n_t, gamma, lam, epsilon = struct.unpack(
            _HEADER_FMT, header
        )
        if version != CHECKPOINT_VERSION:
            raise ContractViolation(f"not a nilink v{CHECKPOINT_VERSION} checkpoint: {path}")
        mode = BI if mode_byte == 0 else CROSS
        config = LinkerConfig(
            mode=mode, embed_dim=dim, hash_vocab=vocab,
            lam=lam, nil_threshold=epsilon, focal_gamma=gamma,
        )
        params: dict[str, np.ndarray] = {}
        for name, shape in param_shapes(mode, vocab, dim, n_t):
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(4 * count)
            if len(raw) != 4 * count:
                raise ContractViolation(f"truncated checkpoint block {name!r} in {path}")
            params[name] = np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(shape)
    return LinkerModel(config, n_t, params)
