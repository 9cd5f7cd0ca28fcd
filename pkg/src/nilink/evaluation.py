"""Accuracy metrics (NAC / Non-NAC / OAC) and the two ablation studies."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

import numpy as np

from .dataset import (
    NIL,
    NON_ENTITY_PHRASE,
    UNANNOTATED,
    Entity,
    Entry,
    round_half_away,
)
from .errors import ContractViolation
from .model.linker import (
    LinkerConfig,
    LinkerModel,
    context_type_labels,
    link_entry,
    predict_types,
    train,
)
from .typesys import TypeSystem, type_vector

logger = logging.getLogger(__name__)

ALL_NIL = "all"
NON_ENTITY_ONLY = "nonentity"

TYPE_DECISION_THRESHOLD = 0.5


@dataclass(frozen=True)
class EvalReport:
    n_nil_gold: int
    n_nonnil_gold: int
    nac: float  # accuracy on gold-NIL entries, percent
    non_nac: float  # accuracy on gold-entity entries, percent
    oac: float  # overall accuracy, percent
    per_pattern: dict[str, float | None]
    context_type_accuracy: float | None = None
    candidate_type_accuracy: float | None = None


def predict_answers(
    model: LinkerModel,
    entries: list[Entry],
    kb: dict[str, Entity],
    lam: float | None = None,
    epsilon: float | None = None,
) -> list[str]:
    return [link_entry(model, e, kb, lam=lam, epsilon=epsilon).answer for e in entries]


def metrics_from_predictions(entries: list[Entry], predictions: list[str]) -> EvalReport:
    """NAC / Non-NAC / OAC and per-NIL-pattern accuracy from gold answers and
    predicted answers. Predicting NIL for a gold entity, or any wrong entity,
    both count as errors."""
    if len(entries) != len(predictions):
        raise ContractViolation("one prediction per entry is required")
    if not entries:
        raise ContractViolation("cannot evaluate an empty split")
    nil_total = nil_hit = pos_total = pos_hit = 0
    pattern_totals: dict[str, list[int]] = {}
    for entry, predicted in zip(entries, predictions):
        if entry.answer is UNANNOTATED:
            raise ContractViolation(f"entry {entry.entry_id} is unannotated")
        if entry.answer == NIL:
            nil_total += 1
            hit = int(predicted == NIL)
            nil_hit += hit
            if entry.nil_pattern:
                bucket = pattern_totals.setdefault(entry.nil_pattern, [0, 0])
                bucket[0] += 1
                bucket[1] += hit
        else:
            pos_total += 1
            pos_hit += int(predicted == entry.answer)
    nac = 100.0 * nil_hit / nil_total if nil_total else 0.0
    non_nac = 100.0 * pos_hit / pos_total if pos_total else 0.0
    oac = 100.0 * (nil_hit + pos_hit) / (nil_total + pos_total)
    per_pattern = {
        pattern: 100.0 * hit / total if total else None
        for pattern, (total, hit) in sorted(pattern_totals.items())
    }
    return EvalReport(nil_total, pos_total, nac, non_nac, oac, per_pattern)


def type_accuracies(
    model: LinkerModel,
    entries: list[Entry],
    kb: dict[str, Entity],
    system: TypeSystem,
    assignment: dict[str, str],
) -> tuple[float, float]:
    """Exact-match accuracy of thresholded type predictions against gold
    multi-hot vectors, over every (entry, candidate) pair."""
    ctx_total = ctx_hit = cand_total = cand_hit = 0
    for entry in entries:
        y_ctx = context_type_labels(entry, system, assignment)
        for candidate in entry.candidates:
            entity = kb.get(candidate) or Entity(candidate, candidate)
            t_c, t_e = predict_types(model, entry, entity)
            y_ent = type_vector(candidate, system, assignment)
            ctx_total += 1
            cand_total += 1
            ctx_hit += int(np.array_equal(t_c >= TYPE_DECISION_THRESHOLD, y_ctx > 0.5))
            cand_hit += int(np.array_equal(t_e >= TYPE_DECISION_THRESHOLD, y_ent > 0.5))
    if ctx_total == 0:
        return 0.0, 0.0
    return 100.0 * ctx_hit / ctx_total, 100.0 * cand_hit / cand_total


def evaluate_split(
    model: LinkerModel,
    entries: list[Entry],
    kb: dict[str, Entity],
    system: TypeSystem | None = None,
    assignment: dict[str, str] | None = None,
    lam: float | None = None,
    epsilon: float | None = None,
    with_types: bool = True,
) -> EvalReport:
    predictions = predict_answers(model, entries, kb, lam=lam, epsilon=epsilon)
    report = metrics_from_predictions(entries, predictions)
    if with_types and system is not None and model.n_t > 0:
        ctx_acc, cand_acc = type_accuracies(model, entries, kb, system, assignment or {})
        report = EvalReport(
            report.n_nil_gold, report.n_nonnil_gold, report.nac, report.non_nac,
            report.oac, report.per_pattern, ctx_acc, cand_acc,
        )
    return report


# -- ablations ----------------------------------------------------------------


def subsample_nil(entries, fraction: float, pattern_filter: str, rng_seed: int) -> list[Entry]:
    """Keep round(fraction * N) of the matching NIL entries (seeded, order
    preserved); everything else stays."""
    if not 0.0 <= fraction <= 1.0:
        raise ContractViolation(f"fraction {fraction} outside [0, 1]")
    if pattern_filter not in (ALL_NIL, NON_ENTITY_ONLY):
        raise ContractViolation(f"unknown pattern filter {pattern_filter!r}")

    def matches(e: Entry) -> bool:
        if e.answer != NIL:
            return False
        return pattern_filter == ALL_NIL or e.nil_pattern == NON_ENTITY_PHRASE

    matching = [i for i, e in enumerate(entries) if matches(e)]
    matching_set = set(matching)
    keep_count = round_half_away(fraction * len(matching))
    rng = random.Random(rng_seed)
    kept = set(rng.sample(matching, keep_count)) if keep_count else set()
    return [e for i, e in enumerate(entries) if i in kept or i not in matching_set]


def ablate_nil_fraction(
    train_entries,
    test_entries,
    fractions,
    pattern_filter: str,
    system: TypeSystem,
    assignment: dict[str, str],
    kb: dict[str, Entity],
    config: LinkerConfig,
) -> list[tuple[float, float, float]]:
    """Retrain from scratch per fraction of retained NIL training data and
    report (fraction, NAC, OAC) rows."""
    rows = []
    for fraction in fractions:
        retained = subsample_nil(train_entries, fraction, pattern_filter, config.rng_seed)
        model = train(retained, system, assignment, kb, config)
        report = evaluate_split(model, test_entries, kb, with_types=False)
        logger.info(
            "nil ablation fraction=%.2f kept=%d NAC=%.2f OAC=%.2f",
            fraction, len(retained), report.nac, report.oac,
        )
        rows.append((fraction, report.nac, report.oac))
    return rows


@dataclass(frozen=True)
class TypingAblation:
    context_type_accuracy: float
    candidate_type_accuracy: float
    oac_with_typing: float
    oac_without_typing: float


def ablate_typing(
    model_with_typing: LinkerModel,
    model_without_typing: LinkerModel,
    test_entries,
    kb: dict[str, Entity],
    system: TypeSystem,
    assignment: dict[str, str],
) -> TypingAblation:
    """Both models evaluated with lambda = 1 so type similarity plays no part
    in the score; the delta isolates what the typing task did to the shared
    embeddings."""
    with_report = evaluate_split(
        model_with_typing, test_entries, kb, system, assignment, lam=1.0
    )
    without_report = evaluate_split(
        model_without_typing, test_entries, kb, lam=1.0, with_types=False
    )
    return TypingAblation(
        context_type_accuracy=with_report.context_type_accuracy or 0.0,
        candidate_type_accuracy=with_report.candidate_type_accuracy or 0.0,
        oac_with_typing=with_report.oac,
        oac_without_typing=without_report.oac,
    )


# -- report files --------------------------------------------------------------


def write_eval_report(report: EvalReport, path) -> None:
    lines = [
        "Non-NAC\tNAC\tOAC",
        f"{report.non_nac:.2f}\t{report.nac:.2f}\t{report.oac:.2f}",
    ]
    for pattern, acc in report.per_pattern.items():
        if acc is not None:
            lines.append(f"{pattern} NAC\t{acc:.2f}")
    if report.context_type_accuracy is not None:
        lines.append(f"Ctxt Type Acc.\t{report.context_type_accuracy:.2f}")
        lines.append(f"Cand Type Acc.\t{report.candidate_type_accuracy:.2f}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_typing_report(result: TypingAblation, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("Ctxt Type Acc.\tCand Type Acc.\tOAC w/ Typing\tOAC w/o Typing\n")
        fh.write(
            f"{result.context_type_accuracy:.2f}\t{result.candidate_type_accuracy:.2f}"
            f"\t{result.oac_with_typing:.2f}\t{result.oac_without_typing:.2f}\n"
        )


def write_nil_curve(rows, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("fraction\tNAC\tOAC\n")
        for fraction, nac, oac in rows:
            fh.write(f"{fraction:.2f}\t{nac:.2f}\t{oac:.2f}\n")


def plot_nil_curve(rows, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fractions = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(fractions, [r[1] for r in rows], marker="o", label="NAC")
    ax.plot(fractions, [r[2] for r in rows], marker="s", label="OAC")
    ax.set_xlabel("fraction of NIL training data")
    ax.set_ylabel("accuracy (%)")
    ax.set_ylim(0, 100)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
