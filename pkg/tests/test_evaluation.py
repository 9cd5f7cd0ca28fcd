"""Metric computation against brute-force recounts, and ablation mechanics."""

import random

import numpy as np
import pytest

from nilink import dataset as D
from nilink import evaluation as E
from nilink.errors import ContractViolation
from nilink.model import linker as L
from nilink.typesys import build_type_system
from tests.test_dataset import make_entry
from tests.test_model import small_config, tiny_kb, tiny_types


def random_fixture(rng, n=100):
    """Entries with gold answers plus an arbitrary prediction per entry."""
    entries, predictions = [], []
    for i in range(n):
        cands = [f"e{j}" for j in range(rng.randint(2, 5))]
        gold_is_nil = rng.random() < 0.4
        if gold_is_nil:
            pattern = rng.choice([D.MISSING_ENTITY, D.NON_ENTITY_PHRASE])
            entry = make_entry(i, candidates=tuple(cands), answer=D.NIL, nil_pattern=pattern)
        else:
            entry = make_entry(i, candidates=tuple(cands), answer=rng.choice(cands))
        entries.append(entry)
        predictions.append(rng.choice(cands + [D.NIL]))
    return entries, predictions


def brute_force_recount(entries, predictions):
    """Independent per-entry loop re-deriving all the accuracies."""
    nil_gold = [(e, p) for e, p in zip(entries, predictions) if e.answer == D.NIL]
    pos_gold = [(e, p) for e, p in zip(entries, predictions) if e.answer != D.NIL]
    nac = 100.0 * sum(p == D.NIL for _, p in nil_gold) / len(nil_gold) if nil_gold else 0.0
    non_nac = 100.0 * sum(p == e.answer for e, p in pos_gold) / len(pos_gold) if pos_gold else 0.0
    correct = sum(p == e.answer for e, p in zip(entries, predictions))
    oac = 100.0 * correct / len(entries)
    return nac, non_nac, oac


class TestMetrics:
    def test_hand_counted_example(self):
        # 4 gold-NIL with 3 predicted NIL, 6 gold-entity with 5 exactly right
        entries, predictions = [], []
        for i in range(4):
            entries.append(make_entry(i, answer=D.NIL, nil_pattern=D.MISSING_ENTITY))
            predictions.append(D.NIL if i < 3 else "e1")
        for i in range(6):
            entries.append(make_entry(10 + i, candidates=("e1", "e2"), answer="e1"))
            predictions.append("e1" if i < 5 else D.NIL)
        report = E.metrics_from_predictions(entries, predictions)
        assert report.nac == pytest.approx(75.0)
        assert report.non_nac == pytest.approx(83.33, abs=0.01)
        assert report.oac == pytest.approx(80.0)

    def test_all_correct(self):
        entries = [make_entry(0, answer="e1"), make_entry(1, answer=D.NIL,
                                                          nil_pattern=D.MISSING_ENTITY)]
        report = E.metrics_from_predictions(entries, ["e1", D.NIL])
        assert (report.nac, report.non_nac, report.oac) == (100.0, 100.0, 100.0)

    def test_wrong_entity_and_nil_both_count_as_errors(self):
        entries = [make_entry(0, candidates=("e1", "e2"), answer="e1") for _ in range(2)]
        report = E.metrics_from_predictions(entries, ["e2", D.NIL])
        assert report.non_nac == 0.0

    def test_per_pattern_accuracy(self):
        entries = [
            make_entry(0, answer=D.NIL, nil_pattern=D.MISSING_ENTITY),
            make_entry(1, answer=D.NIL, nil_pattern=D.NON_ENTITY_PHRASE),
            make_entry(2, answer=D.NIL, nil_pattern=D.NON_ENTITY_PHRASE),
        ]
        report = E.metrics_from_predictions(entries, [D.NIL, D.NIL, "e1"])
        assert report.per_pattern[D.MISSING_ENTITY] == pytest.approx(100.0)
        assert report.per_pattern[D.NON_ENTITY_PHRASE] == pytest.approx(50.0)

    def test_empty_split_rejected(self):
        with pytest.raises(ContractViolation):
            E.metrics_from_predictions([], [])

    def test_unannotated_rejected(self):
        with pytest.raises(ContractViolation):
            E.metrics_from_predictions([make_entry(0, answer=None)], ["e1"])

    def test_matches_brute_force_recount_randomized(self):
        rng = random.Random(77)
        for _ in range(30):
            entries, predictions = random_fixture(rng, n=rng.randint(5, 60))
            report = E.metrics_from_predictions(entries, predictions)
            nac, non_nac, oac = brute_force_recount(entries, predictions)
            assert report.nac == pytest.approx(nac, abs=1e-12)
            assert report.non_nac == pytest.approx(non_nac, abs=1e-12)
            assert report.oac == pytest.approx(oac, abs=1e-12)

    def test_oac_weighted_average_identity(self):
        rng = random.Random(3)
        for _ in range(50):
            entries, predictions = random_fixture(rng, n=rng.randint(2, 80))
            r = E.metrics_from_predictions(entries, predictions)
            if r.n_nil_gold and r.n_nonnil_gold:
                weighted = (r.nac * r.n_nil_gold + r.non_nac * r.n_nonnil_gold) / (
                    r.n_nil_gold + r.n_nonnil_gold
                )
                assert abs(r.oac - weighted) < 1e-12
                assert min(r.nac, r.non_nac) - 1e-12 <= r.oac <= max(r.nac, r.non_nac) + 1e-12


class TestSubsampleNil:
    def entries(self):
        out = [make_entry(i, answer="e1") for i in range(10)]
        out += [make_entry(100 + i, answer=D.NIL, nil_pattern=D.MISSING_ENTITY) for i in range(6)]
        out += [make_entry(200 + i, answer=D.NIL, nil_pattern=D.NON_ENTITY_PHRASE) for i in range(8)]
        return out

    def test_fraction_one_is_identity(self):
        entries = self.entries()
        kept = E.subsample_nil(entries, 1.0, E.ALL_NIL, rng_seed=0)
        assert [e.entry_id for e in kept] == [e.entry_id for e in entries]

    def test_fraction_zero_drops_all_matching(self):
        kept = E.subsample_nil(self.entries(), 0.0, E.ALL_NIL, rng_seed=0)
        assert all(e.answer != D.NIL for e in kept)
        assert len(kept) == 10

    def test_retained_count_rounds(self):
        kept = E.subsample_nil(self.entries(), 0.25, E.ALL_NIL, rng_seed=0)
        # 14 matching NIL entries -> round(3.5) = 4 retained
        assert sum(1 for e in kept if e.answer == D.NIL) == 4

    def test_pattern_filter_only_touches_phrases(self):
        kept = E.subsample_nil(self.entries(), 0.0, E.NON_ENTITY_ONLY, rng_seed=0)
        assert sum(1 for e in kept if e.nil_pattern == D.MISSING_ENTITY) == 6
        assert sum(1 for e in kept if e.nil_pattern == D.NON_ENTITY_PHRASE) == 0

    def test_deterministic_per_fraction(self):
        a = E.subsample_nil(self.entries(), 0.5, E.ALL_NIL, rng_seed=9)
        b = E.subsample_nil(self.entries(), 0.5, E.ALL_NIL, rng_seed=9)
        assert [e.entry_id for e in a] == [e.entry_id for e in b]

    def test_bad_fraction_rejected(self):
        with pytest.raises(ContractViolation):
            E.subsample_nil(self.entries(), 1.2, E.ALL_NIL, rng_seed=0)


class TestEvaluateSplit:
    def test_runs_with_type_accuracies(self):
        system, assignment = tiny_types()
        kb = tiny_kb()
        cfg = small_config(L.CROSS)
        model = L.init_model(cfg, system.n_t)
        entries = [make_entry(0, candidates=("e1", "e2"), answer="e1"),
                   make_entry(1, candidates=("e1", "e2"), answer=D.NIL,
                              nil_pattern=D.MISSING_ENTITY)]
        report = E.evaluate_split(model, entries, kb, system, assignment)
        assert report.context_type_accuracy is not None
        assert 0.0 <= report.context_type_accuracy <= 100.0
        assert 0.0 <= report.oac <= 100.0

    def test_typing_ablation_identical_models_zero_delta(self):
        system, assignment = tiny_types()
        kb = tiny_kb()
        model = L.init_model(small_config(L.CROSS), system.n_t)
        entries = [make_entry(0, candidates=("e1", "e2"), answer="e1")]
        result = E.ablate_typing(model, model, entries, kb, system, assignment)
        assert result.oac_with_typing == result.oac_without_typing


class TestReportFiles:
    def test_eval_report_layout(self, tmp_path):
        report = E.EvalReport(4, 6, 75.0, 83.333333, 80.0,
                              {D.MISSING_ENTITY: 75.0}, 90.0, 95.5)
        path = tmp_path / "report.tsv"
        E.write_eval_report(report, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "Non-NAC\tNAC\tOAC"
        assert lines[1] == "83.33\t75.00\t80.00"
        assert any(l.startswith("Ctxt Type Acc.") for l in lines)

    def test_typing_report_layout(self, tmp_path):
        result = E.TypingAblation(83.75, 93.46, 78.35, 77.74)
        path = tmp_path / "typing.tsv"
        E.write_typing_report(result, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "Ctxt Type Acc.\tCand Type Acc.\tOAC w/ Typing\tOAC w/o Typing"
        assert lines[1] == "83.75\t93.46\t78.35\t77.74"

    def test_nil_curve_layout(self, tmp_path):
        path = tmp_path / "curve.tsv"
        E.write_nil_curve([(0.0, 30.0, 60.0), (1.0, 90.0, 95.0)], path)
        lines = path.read_text().splitlines()
        assert lines[0] == "fraction\tNAC\tOAC"
        assert lines[1] == "0.00\t30.00\t60.00"

    def test_plot_written(self, tmp_path):
        pytest.importorskip("matplotlib")
        path = tmp_path / "curve.png"
        E.plot_nil_curve([(0.0, 30.0, 60.0), (0.5, 80.0, 90.0), (1.0, 90.0, 95.0)], path)
        assert path.stat().st_size > 0
