from __future__ import annotations

import re
import string

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cke.corpus import (
    Candidate,
    clean_text,
    corpus_stats,
    extract_candidates,
    load_document,
    segment_sentences,
)
from cke.errors import EmptyCorpus, EmptyDocument

from conftest import PAPER_EXAMPLE


def _doc(text: str, doc_id: str = "d"):
    return clean_text(load_document(doc_id, text))


def _sentences(text: str, doc_id: str = "d"):
    return segment_sentences(_doc(text, doc_id))


# --- load_document ------------------------------------------------------------


def test_load_document_wraps_text():
    doc = load_document("d1", "H1. A relates to B.")
    assert doc.doc_id == "d1"
    assert doc.raw_text == "H1. A relates to B."
    assert doc.cleaned_text is None


def test_load_document_rejects_empty():
    with pytest.raises(EmptyDocument):
        load_document("d1", "")


def test_load_document_preserves_length():
    text = ("line one\n" * 40) + "closing remark."
    assert len(load_document("d2", text).raw_text) == len(text)


# --- clean_text ----------------------------------------------------------------


def _rule_trace(line: str, repeats: int) -> bool:
    """Independent replay of each cleaning heuristic for one line."""
    stripped = line.strip()
    if not stripped:
        return False
    if re.match(r"^(?:table|figure|fig\.?)\s+\d+\b", stripped, re.IGNORECASE):
        return True
    non_ws = [c for c in stripped if not c.isspace()]
    if sum(c.isalpha() for c in non_ws) < 0.4 * len(non_ws):
        return True
    return repeats >= 3


@pytest.mark.parametrize(
    "line,dropped",
    [
        ("Table 3: Regression results", True),
        ("Figure 12 shows the distribution", True),
        (PAPER_EXAMPLE, False),
        ("12.3  45.6  78.9", True),
        ("", False),
    ],
)
def test_clean_rules_match_rule_trace(line, dropped):
    assert _rule_trace(line, repeats=1) is dropped
    doc = _doc(f"An opening sentence stays.\n{line}\nA closing sentence stays.")
    assert (line not in doc.cleaned_text.split("\n")) is dropped


def test_clean_drops_repeated_headers():
    body = ["Unique line number %d here." % i for i in range(4)]
    raw = "\n".join(["Journal of Things 2020"] * 3 + body)
    doc = _doc(raw)
    assert "Journal of Things 2020" not in doc.cleaned_text
    for line in body:
        assert line in doc.cleaned_text


def test_clean_is_fixpoint_without_boilerplate():
    raw = "A perfectly ordinary sentence.\nAnother ordinary sentence follows it."
    assert _doc(raw).cleaned_text == raw


def test_clean_monotone_and_idempotent():
    raw = "Table 1: stuff\nGood line one here.\n123 456\nGood line two here."
    doc = _doc(raw)
    assert len(doc.cleaned_text.split("\n")) <= len(raw.split("\n"))
    again = clean_text(load_document("d", doc.cleaned_text))
    assert again.cleaned_text == doc.cleaned_text


# --- segment_sentences ----------------------------------------------------------


def test_two_terminal_periods():
    assert [s.text for s in _sentences("A is good. B is bad.")] == [
        "A is good.",
        "B is bad.",
    ]


def test_colon_does_not_split():
    sents = _sentences("Hypothesis 1: x and y are positively related.")
    assert len(sents) == 1


SEGMENTATION_FIXTURES = [
    ("See Smith et al. (2001). Next claim.", ["See Smith et al. (2001).", "Next claim."]),
    ("We use e.g. France as a case. Results follow.", ["We use e.g. France as a case.", "Results follow."]),
    ("Costs rose (cf. Fig. 2) sharply. Then they fell.", ["Costs rose (cf. Fig. 2) sharply.", "Then they fell."]),
    ("Is this true? Yes it is! Fine.", ["Is this true?", "Yes it is!", "Fine."]),
    ("Dr. Smith disagrees. A. Smith concurs.", ["Dr. Smith disagrees.", "A. Smith concurs."]),
    ("H1. Commitment matters. H2. Trust matters.", ["H1. Commitment matters.", "H2. Trust matters."]),
]


@pytest.mark.parametrize("text,expected", SEGMENTATION_FIXTURES)
def test_segmentation_fixture_list(text, expected):
    assert [s.text for s in _sentences(text)] == expected


def test_sentence_invariants():
    text = "First sentence here. Second one follows.\nThird on a new line."
    doc = _doc(text)
    sents = segment_sentences(doc)
    for s in sents:
        a, b = s.char_span
        assert b > a
        assert doc.cleaned_text[a:b] == s.text
        assert s.word_count >= 1


@given(st.text(alphabet=string.ascii_letters + " .?!\n()," , min_size=1, max_size=200))
@settings(max_examples=200, deadline=None)
def test_segmentation_partition_property(raw):
    doc = load_document("d", raw)
    doc.cleaned_text = raw  # property concerns segmentation only
    sents = segment_sentences(doc)
    strip_ws = lambda t: "".join(ch for ch in t if not ch.isspace())
    assert strip_ws("".join(s.text for s in sents)) == strip_ws(raw)
    spans = [s.char_span for s in sents]
    assert spans == sorted(spans)
    assert all(b1 <= a2 for (_, b1), (a2, _) in zip(spans, spans[1:]))


# --- extract_candidates -----------------------------------------------------------


def test_paper_example_candidate():
    (cand,) = extract_candidates(_sentences(PAPER_EXAMPLE))
    assert cand.marker == "H1"
    assert cand.marker_span == (0, 2)


def test_harry_boundary_counterexample():
    assert extract_candidates(_sentences("We thank Harry for comments.")) == []


def test_hypothesis_word_with_number():
    (cand,) = extract_candidates(_sentences("Hypothesis 2a: trust moderates this effect."))
    assert cand.marker == "Hypothesis 2a"


@pytest.mark.parametrize(
    "text,marker",
    [
        ("H10 states the moderated link.", "H10"),
        ("As H2a suggests, ties help.", "H2a"),
        ("The hypothesis was rejected.", "hypothesis"),
        ("HYPOTHESIS 4. Size matters.", "HYPOTHESIS 4"),
        ("(H3) is supported.", "H3"),
    ],
)
def test_marker_variants(text, marker):
    (cand,) = extract_candidates(_sentences(text))
    assert cand.marker == marker


@pytest.mark.parametrize(
    "text",
    ["8H1 is a code.", "h1 lowercase fails.", "H2ab has two letters.", "Hypothesis2 glued.", "The H stands alone."],
)
def test_marker_negatives(text):
    assert extract_candidates(_sentences(text)) == []


# An independent character-scan matcher (no regex) used as the oracle.
_WORD = set(string.ascii_letters + string.digits + "_")


def _is_word(ch: str) -> bool:
    return ch in _WORD


def oracle_leftmost_marker(text: str):
    n = len(text)
    for i in range(n):
        # word form, any case, optional " <digits><letter?>" extension
        if text[i : i + 10].lower() == "hypothesis":
            if (i == 0 or not _is_word(text[i - 1])) and (
                i + 10 >= n or not _is_word(text[i + 10])
            ):
                end = i + 10
                k = end
                while k < n and text[k].isspace():
                    k += 1
                if k > end:
                    d = k
                    while d < n and text[d].isdigit():
                        d += 1
                    if d > k:
                        if d < n and text[d].isalpha() and (d + 1 >= n or not _is_word(text[d + 1])):
                            end = d + 1
                        elif d >= n or not _is_word(text[d]):
                            end = d
                return i, end, text[i:end]
        # standalone H<digits><letter?>
        if text[i] == "H" and (i == 0 or not _is_word(text[i - 1])):
            d = i + 1
            while d < n and text[d].isdigit():
                d += 1
            if d > i + 1:
                if d < n and text[d].isalpha() and (d + 1 >= n or not _is_word(text[d + 1])):
                    return i, d + 1, text[i : d + 1]
                if d >= n or not _is_word(text[d]):
                    return i, d, text[i:d]
    return None


FIXTURE_TOKENS = [
    "H1", "H2a", "H10", "H23b", "H2ab", "h1", "h2a", "Harry", "HARRY", "8H1",
    "xH2", "(H3)", "H-4", "H", "Hyp", "Hypothesis", "hypothesis", "HYPOTHESIS",
    "Hypotheses", "hypotheses", "Hypothesis2", "commitment", "performance",
    "firm", "the", "and", "3", "2a", "al.", "et",
]
FIXTURE_SEPS = [" ", "  ", "\n", ", ", ": "]


def random_fixture(rng: np.random.Generator) -> str:
    k = int(rng.integers(1, 10))
    parts = []
    for j in range(k):
        parts.append(FIXTURE_TOKENS[int(rng.integers(len(FIXTURE_TOKENS)))])
        if j + 1 < k:
            parts.append(FIXTURE_SEPS[int(rng.integers(len(FIXTURE_SEPS)))])
    return "".join(parts)


def assert_matches_oracle(text: str):
    doc = load_document("d", text)
    doc.cleaned_text = text
    sent_like = segment_sentences(doc)
    got = extract_candidates(sent_like)
    want = []
    for s in sent_like:
        hit = oracle_leftmost_marker(s.text)
        if hit:
            want.append((s.sentence_id, hit[2], (hit[0], hit[1])))
    assert [(c.sentence.sentence_id, c.marker, c.marker_span) for c in got] == want


def test_candidate_oracle_on_randomized_fixtures():
    rng = np.random.default_rng(1234)
    for _ in range(300):
        assert_matches_oracle(random_fixture(rng))


@given(st.lists(st.sampled_from(FIXTURE_TOKENS), min_size=1, max_size=12))
@settings(max_examples=300, deadline=None)
def test_candidate_oracle_property(tokens):
    assert_matches_oracle(" ".join(tokens))


# --- corpus_stats -----------------------------------------------------------------


class _Rec:
    def __init__(self, sentence_id, is_hypothesis=None, direction=None, causality=None):
        self.sentence_id = sentence_id
        self.is_hypothesis = is_hypothesis
        self.direction = direction
        self.causality = causality


def _sent_with_words(i, wc, doc="d"):
    text = " ".join(["w"] * wc)
    from cke.corpus import Sentence

    return Sentence(f"{doc}:{i}", doc, text, (0, len(text)), wc)


def test_stats_mean_and_population_std():
    sents = [_sent_with_words(i, wc) for i, wc in enumerate([10, 20, 30])]
    stats = corpus_stats(sents, [])
    assert stats.word_count_mean == pytest.approx(20.0)
    # population formula: sqrt(((10-20)^2 + 0 + (30-20)^2)/3)
    assert stats.word_count_std == pytest.approx(8.16496580927726, abs=1e-10)


def test_stats_causality_proportions():
    sents = [_sent_with_words(i, 5) for i in range(10)]
    recs = [
        _Rec(f"d:{i}", is_hypothesis=True, causality="causal" if i < 3 else "associative")
        for i in range(10)
    ]
    stats = corpus_stats(sents, recs)
    assert stats.causality_proportions == {"associative": 0.7, "causal": 0.3}
    assert sum(stats.causality_proportions.values()) == pytest.approx(1.0, abs=1e-9)


def test_stats_censors_long_sentences():
    sents = [_sent_with_words(0, 10), _sent_with_words(1, 71), _sent_with_words(2, 30)]
    stats = corpus_stats(sents, [])
    assert stats.word_count_mean == pytest.approx(20.0)
    assert stats.word_count_histogram == {10: 1, 30: 1}


def test_stats_hypotheses_per_doc():
    sents = [_sent_with_words(0, 5, "a"), _sent_with_words(0, 5, "b")]
    recs = [_Rec("a:0", is_hypothesis=True)]
    stats = corpus_stats(sents, recs)
    assert stats.n_documents == 2
    assert stats.n_hypotheses == 1
    assert stats.hypotheses_per_doc_mean == pytest.approx(0.5)


def test_stats_empty_corpus():
    with pytest.raises(EmptyCorpus):
        corpus_stats([], [])


def test_stats_json_field_names():
    stats = corpus_stats([_sent_with_words(0, 7)], [])
    d = stats.to_dict()
    assert set(d) == {
        "n_documents", "n_sentences", "n_hypotheses",
        "hypotheses_per_doc_mean", "hypotheses_per_doc_std",
        "word_count_mean", "word_count_std", "word_count_histogram",
        "direction_proportions", "causality_proportions",
    }
    assert d["word_count_histogram"] == {"5": 1}
