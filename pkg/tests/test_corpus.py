"""Parsing, alias table, occurrence search, and context windowing."""

import random

import pytest

from nilink import corpus as C
from nilink.errors import ContractViolation


class TestTokenize:
    def test_plain_words(self):
        assert C.tokenize("born in Paris") == ["born", "in", "Paris"]

    def test_punctuation_peeled(self):
        assert C.tokenize("lamb. (maybe) EU-wide") == ["lamb", ".", "(", "maybe", ")", "EU-wide"]

    def test_star_is_a_token(self):
        assert "*" in C.tokenize("* item one")

    def test_brackets_stay_attached(self):
        assert C.tokenize("broken [[link") == ["broken", "[[link"]


class TestParseDocuments:
    def test_single_well_formed_link(self):
        docs = C.parse_documents(["d\tborn in [[Paris]]"])
        assert docs[0].tokens == ["born", "in", "Paris"]
        assert docs[0].links == [C.Link(2, 3, "Paris")]

    def test_piped_anchor(self):
        docs = C.parse_documents(["d\tthe [[The Householder (film)|householder]] stage"])
        assert docs[0].tokens == ["the", "householder", "stage"]
        assert docs[0].links == [C.Link(1, 2, "The Householder (film)")]

    def test_malformed_markup_degrades_to_plain(self):
        docs = C.parse_documents(["d\tbroken [[link"])
        assert docs[0].tokens == ["broken", "[[link"]
        assert docs[0].links == []

    def test_empty_anchor_degrades(self):
        docs = C.parse_documents(["d\tx [[Target|]] y"])
        assert docs[0].links == []

    def test_empty_body_skipped_with_warning(self, caplog):
        with caplog.at_level("WARNING"):
            docs = C.parse_documents(["a\tsome text", "b\t", "no-tab-line"])
        assert [d.doc_id for d in docs] == ["a"]
        assert "2" in caplog.text

    def test_unreadable_stream_raises(self, tmp_path):
        with pytest.raises(OSError):
            C.read_corpus(tmp_path / "missing.tsv")

    def test_parse_serialize_parse_fixed_point(self):
        rng = random.Random(5)
        vocab = ["alpha", "beta", "gamma", "delta", ",", "omega"]
        lines = []
        for n in range(30):
            parts = []
            for _ in range(rng.randint(3, 12)):
                if rng.random() < 0.25:
                    parts.append(f"[[Target {rng.randint(0, 5)}|{rng.choice(vocab)}]]")
                else:
                    parts.append(rng.choice(vocab))
            lines.append(f"doc-{n}\t{' '.join(parts)}")
        once = C.parse_documents(lines)
        again = C.parse_documents(C.serialize_document(d) for d in once)
        assert [(d.tokens, d.links) for d in once] == [(d.tokens, d.links) for d in again]


class TestAliasTable:
    def test_single_alias_counted(self):
        docs = C.parse_documents(["d\t[[Paris]] then [[Paris]] again"])
        table = C.build_alias_table(docs)
        assert table.entries["Paris"] == [("Paris", 2)]
        assert table.alias_totals["Paris"] == 2

    def test_entity_order_count_desc_then_id(self):
        lines = ["a\t[[European Union|EU]]", "b\t[[European Union|EU]]",
                 "c\t[[European Union|EU]]", "d\t[[Europe|EU]]"]
        table = C.build_alias_table(C.parse_documents(lines))
        assert table.entries["EU"] == [("European Union", 3), ("Europe", 1)]
        assert table.alias_totals["EU"] == 4

    def test_empty_corpus(self):
        table = C.build_alias_table([])
        assert table.entries == {} and table.alias_totals == {}

    def test_conservation_total_counts_equal_link_spans(self):
        rng = random.Random(11)
        lines = []
        total_links = 0
        for n in range(40):
            parts = []
            for _ in range(rng.randint(1, 8)):
                if rng.random() < 0.4:
                    parts.append(f"[[E{rng.randint(0, 9)}|a{rng.randint(0, 4)}]]")
                    total_links += 1
                else:
                    parts.append("word")
            lines.append(f"doc-{n}\t{' '.join(parts)}")
        table = C.build_alias_table(C.parse_documents(lines))
        assert sum(table.alias_totals.values()) == total_links
        for alias, pairs in table.entries.items():
            assert sum(c for _, c in pairs) == table.alias_totals[alias]
            assert all(c >= 1 for _, c in pairs)

    def test_save_load_roundtrip(self, tmp_path):
        docs = C.parse_documents(["a\t[[X|x]] [[Y|x]] [[X|x]] plain", "b\t[[Z|q]]"])
        table = C.build_alias_table(docs)
        path = tmp_path / "alias.tsv"
        C.save_alias_table(table, path)
        loaded = C.load_alias_table(path)
        assert loaded.entries == table.entries
        assert loaded.alias_totals == table.alias_totals


class TestFindOccurrences:
    def docs(self):
        return C.parse_documents([
            "d1\t[[Paris]] is far but Paris is close",
            "d2\tnothing here about Europa at all",
            "d3\t[[Paris Region|Paris Region]] holds Paris",
        ])

    def test_hyperlink_and_plain(self):
        occs = C.find_occurrences("Paris", self.docs()[:1])
        assert len(occs) == 2
        assert [o.is_hyperlink for o in occs] == [True, False]
        assert occs[0].linked_target == "Paris"

    def test_no_substring_matches(self):
        assert C.find_occurrences("EU", self.docs()) == []
        assert C.find_occurrences("Euro", self.docs()) == []

    def test_absent_alias(self):
        assert C.find_occurrences("Tokyo", self.docs()) == []

    def test_match_inside_other_link_excluded(self):
        occs = C.find_occurrences("Paris", [self.docs()[2]])
        # the "Paris" inside the "Paris Region" anchor does not count
        assert len(occs) == 1 and not occs[0].is_hyperlink

    def test_multi_token_alias(self):
        occs = C.find_occurrences("Paris Region", self.docs())
        assert len(occs) == 1 and occs[0].is_hyperlink

    def test_hyperlink_occurrences_are_superset_of_anchors(self):
        docs = self.docs()
        for alias in ("Paris", "Paris Region"):
            found = {
                (o.doc_id, o.span) for o in C.find_occurrences(alias, docs) if o.is_hyperlink
            }
            expected = set()
            for doc in docs:
                for link in doc.links:
                    if " ".join(doc.tokens[link.start:link.stop]) == alias:
                        expected.add((doc.doc_id, (link.start, link.stop)))
            assert found == expected

    def test_empty_alias_rejected(self):
        with pytest.raises(ContractViolation):
            C.find_occurrences("", self.docs())


class TestExtractContext:
    def test_mid_document_budget(self):
        doc = C.Document("d", [f"t{i}" for i in range(300)])
        w = C.extract_context(doc, (150, 151))
        assert (len(w.left), len(w.mention), len(w.right)) == (63, 1, 64)

    def test_deficit_granted_to_other_side(self):
        doc = C.Document("d", [f"t{i}" for i in range(300)])
        w = C.extract_context(doc, (5, 6))
        assert len(w.left) == 5
        assert len(w.left) + len(w.mention) + len(w.right) == 128

    def test_mention_covering_whole_document(self):
        doc = C.Document("d", ["a"] * 10)
        w = C.extract_context(doc, (0, 10))
        assert w.left == () and w.right == () and len(w.mention) == 10

    def test_out_of_bounds_rejected(self):
        doc = C.Document("d", ["a"] * 10)
        with pytest.raises(ContractViolation):
            C.extract_context(doc, (5, 12))

    def test_budget_and_mention_preserved_randomized(self):
        rng = random.Random(3)
        for _ in range(200):
            n = rng.randint(1, 400)
            doc = C.Document("d", [f"t{i}" for i in range(n)])
            start = rng.randrange(n)
            stop = min(n, start + rng.randint(1, 8))
            w = C.extract_context(doc, (start, stop))
            assert len(w.left) + len(w.mention) + len(w.right) <= C.CONTEXT_BUDGET
            assert list(w.mention) == doc.tokens[start:stop]
            assert list(w.left) == doc.tokens[start - len(w.left):start]
            assert list(w.right) == doc.tokens[stop:stop + len(w.right)]
