"""CLI subcommands over the bundled miniature corpus."""

from pathlib import Path

import pytest

from nilink import dataset as D
from nilink.cli import load_config_file, main
from nilink.model import linker as L

MINI = Path(__file__).parent / "data" / "mini"


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def entries_file(tmp_path):
    out = tmp_path / "entries.jsonl"
    assert run("make-dataset", "--corpus", MINI / "corpus.tsv", "--out", out,
               "--seed", "7") == 0
    return out


@pytest.fixture()
def types_dir(tmp_path):
    out = tmp_path / "types"
    assert run("build-types", "--instance-of", MINI / "instance_of.tsv",
               "--subclass-of", MINI / "subclass_of.tsv", "--out-dir", out) == 0
    return out


class TestHelpAndErrors:
    @pytest.mark.parametrize("command", [
        "build-alias", "build-types", "make-dataset", "mask", "split",
        "stats", "serve", "train", "eval", "ablate",
    ])
    def test_help_exits_zero(self, command, capsys):
        with pytest.raises(SystemExit) as err:
            run(command, "--help")
        assert err.value.code == 0
        assert "--" in capsys.readouterr().out

    def test_unknown_flag_exits_two(self):
        with pytest.raises(SystemExit) as err:
            run("stats", "--no-such-flag")
        assert err.value.code == 2

    def test_missing_file_exits_one(self, tmp_path, capsys):
        assert run("stats", "--entries", tmp_path / "missing.jsonl") == 1
        assert "error" in capsys.readouterr().err


class TestBuildAlias:
    def test_writes_sorted_table(self, tmp_path):
        out = tmp_path / "alias.tsv"
        assert run("build-alias", "--corpus", MINI / "corpus.tsv", "--out", out) == 0
        lines = out.read_text().splitlines()
        aliases = [l.split("\t")[0] for l in lines]
        assert aliases == sorted(aliases)
        assert any(l.startswith("Mercury\t") for l in lines)


class TestBuildTypes:
    def test_outputs(self, types_dir):
        assert (types_dir / "types.tsv").exists()
        assert (types_dir / "assignments.tsv").exists()
        lines = (types_dir / "type_lines.tsv").read_text()
        assert "Mercury (planet)\tPlanet->AstronomicalObject->Place" in lines

    def test_top_level_restriction(self, tmp_path):
        out = tmp_path / "types14"
        assert run("build-types", "--instance-of", MINI / "instance_of.tsv",
                   "--subclass-of", MINI / "subclass_of.tsv", "--out-dir", out,
                   "--top-level") == 0
        types = [l.split("\t")[0] for l in (out / "types.tsv").read_text().splitlines()]
        assert len(types) == 14
        assignments = dict(
            l.split("\t") for l in (out / "assignments.tsv").read_text().splitlines()
        )
        assert assignments["Mercury (planet)"] == "Place"


class TestMakeDataset:
    def test_byte_identical_across_runs(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        for out in (a, b):
            assert run("make-dataset", "--corpus", MINI / "corpus.tsv", "--out", out,
                       "--seed", "7") == 0
        assert a.read_bytes() == b.read_bytes()

    def test_different_seed_differs(self, tmp_path, entries_file):
        other = tmp_path / "other.jsonl"
        assert run("make-dataset", "--corpus", MINI / "corpus.tsv", "--out", other,
                   "--seed", "8") == 0
        assert other.read_bytes() != entries_file.read_bytes()

    def test_entries_respect_candidate_bounds(self, entries_file):
        entries = D.load_entries(entries_file)
        assert entries
        for e in entries:
            assert 2 <= len(e.candidates) <= 20


class TestMaskSplitStats:
    def test_mask_arithmetic(self, tmp_path, entries_file):
        out = tmp_path / "masked.jsonl"
        assert run("mask", "--entries", entries_file, "--out", out,
                   "--mask-rate", "0.1", "--seed", "3") == 0
        before = D.load_entries(entries_file)
        after = D.load_entries(out)
        positives = sum(1 for e in before if e.is_positive)
        masked = [e for e in after if e.masked]
        assert len(masked) == D.round_half_away(0.1 * positives)
        for e in masked:
            assert e.answer == D.NIL

    def test_split_sizes_and_determinism(self, tmp_path, entries_file):
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        for out in (out1, out2):
            assert run("split", "--entries", entries_file, "--out-dir", out,
                       "--split", "0.8,0.1,0.1", "--seed", "5") == 0
        n = len(D.load_entries(entries_file))
        parts = {k: len(D.load_entries(out1 / f"{k}.jsonl"))
                 for k in ("train", "validation", "test")}
        assert parts["validation"] == n * 10 // 100 or parts["validation"] == int(n * 0.1)
        assert sum(parts.values()) == n
        for k in parts:
            assert (out1 / f"{k}.jsonl").read_bytes() == (out2 / f"{k}.jsonl").read_bytes()

    def test_stats_output(self, entries_file, capsys):
        assert run("stats", "--entries", entries_file) == 0
        out = capsys.readouterr().out
        assert "entries\t" in out and "nil_percentage\t" in out


class TestTrainEval:
    def annotate_all(self, entries):
        """Give plain-text entries a deterministic gold so training can run."""
        out = []
        for e in entries:
            if e.answer is None:
                e.answer = e.candidates[0]
            out.append(e)
        return out

    def test_zero_epochs_equals_initialization(self, tmp_path, entries_file, types_dir):
        ckpt = tmp_path / "model.ckpt"
        assert run("train", "--train", entries_file, "--types-dir", types_dir,
                   "--kb", MINI / "kb.jsonl", "--out", ckpt, "--mode", "cross",
                   "--epochs", "0", "--seed", "11", "--dim", "8", "--vocab", "128") == 0
        loaded = L.load_model(ckpt)
        system_nt = loaded.n_t
        cfg = L.LinkerConfig(mode="cross", embed_dim=8, hash_vocab=128, rng_seed=11)
        fresh = L.init_model(cfg, system_nt)
        ref = tmp_path / "ref.ckpt"
        L.save_model(fresh, ref)
        assert ckpt.read_bytes() == ref.read_bytes()

    def test_train_then_eval(self, tmp_path, entries_file, types_dir, capsys):
        annotated = tmp_path / "annotated.jsonl"
        D.save_entries(self.annotate_all(D.load_entries(entries_file)), annotated)
        ckpt = tmp_path / "model.ckpt"
        log = tmp_path / "train.log"
        assert run("train", "--train", annotated, "--types-dir", types_dir,
                   "--kb", MINI / "kb.jsonl", "--out", ckpt, "--mode", "bi",
                   "--epochs", "1", "--batch-size", "4", "--lr", "0.01",
                   "--dim", "8", "--vocab", "256", "--seed", "2", "--log", log) == 0
        assert len(log.read_text().splitlines()) == 1
        report = tmp_path / "report.tsv"
        assert run("eval", "--checkpoint", ckpt, "--entries", annotated,
                   "--types-dir", types_dir, "--kb", MINI / "kb.jsonl",
                   "--out", report) == 0
        lines = report.read_text().splitlines()
        assert lines[0] == "Non-NAC\tNAC\tOAC"
        out = capsys.readouterr().out
        assert "OAC" in out


class TestConfigFile:
    def test_config_supplies_defaults_flags_win(self, tmp_path, entries_file):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("mask_rate = 0.5\nseed = 3\n")
        out = tmp_path / "masked.jsonl"
        assert run("--config", cfg, "mask", "--entries", entries_file, "--out", out) == 0
        before = D.load_entries(entries_file)
        positives = sum(1 for e in before if e.is_positive)
        masked = sum(1 for e in D.load_entries(out) if e.masked)
        assert masked == D.round_half_away(0.5 * positives)

        out2 = tmp_path / "masked2.jsonl"
        assert run("--config", cfg, "mask", "--entries", entries_file, "--out", out2,
                   "--mask-rate", "0.0") == 0
        assert sum(1 for e in D.load_entries(out2) if e.masked) == 0

    def test_parse_helpers(self, tmp_path):
        cfg = tmp_path / "x.cfg"
        cfg.write_text("# comment\nlr = 0.05\nepochs = 4\nmode = cross\nno-typing = true\n")
        values = load_config_file(cfg)
        assert values == {"lr": 0.05, "epochs": 4, "mode": "cross", "no_typing": True}
