import random

import pytest

from vidtutor.citations import (
    CitationSet,
    extract_footnote_refs,
    finalize_feedback,
    footnote_definition,
    format_display_time,
)


class TestFootnoteDefinition:
    def test_rendered_format(self):
        d = footnote_definition(1, "lecture_03.mp4", 872_000)
        assert d.rendered == "[^1]: [lecture_03.mp4 @ 00:14:32](video://lecture_03.mp4#t=872)"

    def test_zero_timestamp(self):
        d = footnote_definition(2, "l01.mp4", 0)
        assert d.rendered == "[^2]: [l01.mp4 @ 00:00:00](video://l01.mp4#t=0)"

    def test_seconds_floor_not_round(self):
        d = footnote_definition(3, "l01.mp4", 872_999)
        assert d.rendered.endswith("#t=872)")
        assert "@ 00:14:32]" in d.rendered

    def test_display_time_truncates(self):
        assert format_display_time(3_723_999) == "01:02:03"

    def test_validation(self):
        with pytest.raises(ValueError):
            footnote_definition(0, "v.mp4", 0)
        with pytest.raises(ValueError):
            footnote_definition(1, "", 0)
        with pytest.raises(ValueError):
            footnote_definition(1, "v.mp4", -5)


class TestExtractFootnoteRefs:
    def test_order_and_dedup(self):
        text = "Use recursion.[^1] See also[^2]. More on[^1]"
        assert extract_footnote_refs(text) == [1, 2]

    def test_definition_lines_are_not_references(self):
        assert extract_footnote_refs("[^1]: [v @ 00:00:01](video://v#t=1)") == []

    def test_empty(self):
        assert extract_footnote_refs("") == []

    def test_mixed_body_and_definitions(self):
        text = "Claim.[^2]\n\n[^1]: def one\n[^2]: def two\nTrailing[^3]"
        assert extract_footnote_refs(text) == [2, 3]

    def test_non_numeric_markers_ignored(self):
        assert extract_footnote_refs("See [^note] and [^a1]") == []

    def test_rendered_definition_contains_no_reference(self):
        d = footnote_definition(4, "v.mp4", 10_000)
        assert extract_footnote_refs(d.rendered) == []


class TestCitationSet:
    def test_duplicate_ids_rejected(self):
        cs = CitationSet([footnote_definition(1, "v.mp4", 0)])
        with pytest.raises(ValueError):
            cs.add(footnote_definition(1, "v.mp4", 5000))

    def test_lookup(self):
        cs = CitationSet([footnote_definition(2, "v.mp4", 0)])
        assert 2 in cs
        assert 3 not in cs
        assert cs.get(2).video_file == "v.mp4"


def citation_set(n: int) -> CitationSet:
    return CitationSet([footnote_definition(i, "lec.mp4", i * 60_000) for i in range(1, n + 1)])


class TestFinalizeFeedback:
    def test_appends_referenced_definitions_only(self):
        body = "First point.[^1] Second point.[^3]"
        result = finalize_feedback(body, citation_set(4))
        assert result.markdown.startswith(body)
        tail = result.markdown[len(body):]
        assert "[^1]:" in tail and "[^3]:" in tail
        assert "[^2]:" not in tail and "[^4]:" not in tail
        assert [c.footnote_id for c in result.citations] == [1, 3]

    def test_definitions_after_blank_line_ascending(self):
        body = "B.[^3] A.[^1]"
        result = finalize_feedback(body, citation_set(3))
        blocks = result.markdown.split("\n\n")
        assert blocks[0] == body
        assert blocks[1].splitlines() == [
            footnote_definition(1, "lec.mp4", 60_000).rendered,
            footnote_definition(3, "lec.mp4", 180_000).rendered,
        ]

    def test_unknown_reference_stripped(self, caplog):
        with caplog.at_level("WARNING"):
            result = finalize_feedback("Look here.[^9]", citation_set(4))
        assert result.markdown == "Look here."
        assert result.citations == []
        assert any("9" in rec.message for rec in caplog.records)

    def test_no_references_markdown_unchanged(self):
        body = "Plain feedback without citations."
        result = finalize_feedback(body, citation_set(4))
        assert result.markdown == body
        assert result.citations == []

    def test_empty_citation_set(self):
        result = finalize_feedback("Cites.[^1]", CitationSet())
        assert result.markdown == "Cites."
        assert result.citations == []

    def test_resolvability_bijection_randomized(self):
        rng = random.Random(2026)
        for _ in range(100):
            available = rng.randint(0, 8)
            cs = citation_set(available)
            cited = [rng.randint(1, 10) for _ in range(rng.randint(0, 6))]
            body = " ".join(f"Point {i}.[^{i}]" for i in cited) or "No citations."
            result = finalize_feedback(body, cs)

            refs = extract_footnote_refs(result.markdown)
            defined = sorted(c.footnote_id for c in result.citations)
            # bijection: every remaining reference is defined, every appended
            # definition is referenced, and nothing was invented
            assert sorted(set(refs)) == defined
            for c in result.citations:
                assert c.footnote_id <= available

    def test_multiple_references_to_same_definition(self):
        body = "One.[^2] Two.[^2]"
        result = finalize_feedback(body, citation_set(2))
        assert result.markdown.count("[^2]:") == 1
        assert [c.footnote_id for c in result.citations] == [2]
