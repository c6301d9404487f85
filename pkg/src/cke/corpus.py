"""Plain-text corpus handling: cleaning, sentence segmentation, candidate
mining, and descriptive statistics.

Documents arrive as UTF-8 text (PDF conversion happens upstream). Cleaning
only ever deletes whole lines, so every cleaned document is a line
subsequence of the raw one.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field

from .errors import EmptyCorpus, EmptyDocument

__all__ = [
    "Document",
    "Sentence",
    "Candidate",
    "CorpusStats",
    "load_document",
    "clean_text",
    "segment_sentences",
    "extract_candidates",
    "corpus_stats",
    "MARKER_PATTERN",
]

# Word-count censoring threshold for descriptive statistics.
MAX_WORDS = 70

# Histogram bucket width (words) for the word-count distribution.
HISTOGRAM_BUCKET = 5


@dataclass
class Document:
    doc_id: str
    raw_text: str
    cleaned_text: str | None = None


@dataclass(frozen=True)
class Sentence:
    sentence_id: str
    doc_id: str
    text: str
    char_span: tuple[int, int]
    word_count: int


@dataclass(frozen=True)
class Candidate:
    sentence: Sentence
    marker: str
    marker_span: tuple[int, int]


def load_document(doc_id: str, text: str) -> Document:
    if not text:
        raise EmptyDocument(f"document {doc_id!r} has no text")
    return Document(doc_id=doc_id, raw_text=text)


# --- cleaning ---------------------------------------------------------------

_CAPTION_RE = re.compile(r"^\s*(?:table|figure|fig\.?)\s+\d+\b", re.IGNORECASE)

# Lines repeated verbatim at least this often are running headers/footers.
_REPEAT_THRESHOLD = 3

# Minimum fraction of alphabetic characters (among non-whitespace) a line
# needs to survive; filters page numbers, table bodies, equations.
_MIN_ALPHA_RATIO = 0.4


def _is_boilerplate(line: str, repeat_counts: Counter) -> bool:
    stripped = line.strip()
    if not stripped:
        return False  # blank separators are harmless
    if _CAPTION_RE.match(stripped):
        return True
    non_ws = [c for c in stripped if not c.isspace()]
    alpha = sum(1 for c in non_ws if c.isalpha())
    if alpha < _MIN_ALPHA_RATIO * len(non_ws):
        return True
    return repeat_counts[stripped] >= _REPEAT_THRESHOLD


def clean_text(doc: Document) -> Document:
    """Drop caption lines, low-alphabetic lines, and repeated headers/footers.

    Line order is preserved and lines are never edited, so applying the
    cleaner twice is a no-op.
    """
    lines = doc.raw_text.split("\n")
    repeat_counts = Counter(ln.strip() for ln in lines if ln.strip())
    kept = [ln for ln in lines if not _is_boilerplate(ln, repeat_counts)]
    doc.cleaned_text = "\n".join(kept)
    return doc


# --- sentence segmentation ---------------------------------------------------

# Strings that end with '.' but do not terminate a sentence. Checked as a
# lowercase suffix of the text up to and including the period.
ABBREVIATIONS = (
    "et al.", "e.g.", "i.e.", "cf.", "vs.", "viz.", "etc.",
    "fig.", "figs.", "eq.", "eqs.", "no.", "nos.", "vol.", "pp.",
    "ca.", "approx.", "resp.", "ref.", "refs.", "ed.", "eds.",
    "dr.", "prof.", "mr.", "mrs.", "ms.", "st.", "jr.", "sr.",
    "inc.", "ltd.", "co.", "dept.", "univ.", "sec.", "ch.",
)

_TERMINALS = ".?!"

# Hypothesis labels ("H1.") and bare enumeration numbers ("1.") introduce the
# statement that follows; their period is not a sentence end.
_LABEL_TOKEN_RE = re.compile(r"^(?:H\d+[A-Za-z]?|\d+)$")


def _ends_with_abbreviation(text: str, period_idx: int) -> bool:
    prefix = text[: period_idx + 1].lower()
    for abbr in ABBREVIATIONS:
        # suffix match must start at a token boundary ("firms." is not "ms.")
        if prefix.endswith(abbr) and (
            len(prefix) == len(abbr) or not prefix[-len(abbr) - 1].isalnum()
        ):
            return True
    start = period_idx
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    if _LABEL_TOKEN_RE.match(text[start:period_idx]):
        return True
    # Single-initial forms like "A. Smith".
    if period_idx >= 1 and text[period_idx - 1].isupper():
        if period_idx == 1 or not text[period_idx - 2].isalnum():
            return True
    return False


def _boundary_positions(text: str) -> list[int]:
    """Indices just past each sentence-terminal character."""
    bounds = []
    for i, ch in enumerate(text):
        if ch not in _TERMINALS:
            continue
        j = i + 1
        if j >= len(text) or not text[j].isspace():
            continue
        k = j
        while k < len(text) and text[k].isspace():
            k += 1
        if k >= len(text):
            continue
        if not (text[k].isupper() or text[k].isdigit()):
            continue
        if ch == "." and _ends_with_abbreviation(text, i):
            continue
        bounds.append(j)
    return bounds


def segment_sentences(doc: Document) -> list[Sentence]:
    """Split cleaned text into sentences on terminal punctuation.

    A boundary requires `.?!` followed by whitespace and an uppercase letter
    or digit, and the terminal must not close a known abbreviation. Sentence
    spans are trimmed of surrounding whitespace, so concatenating the texts
    recovers every non-whitespace character exactly once.
    """
    if doc.cleaned_text is None:
        raise ValueError("clean_text must run before segmentation")
    text = doc.cleaned_text
    cuts = _boundary_positions(text) + [len(text)]
    sentences: list[Sentence] = []
    start = 0
    for cut in cuts:
        seg = text[start:cut]
        lead = len(seg) - len(seg.lstrip())
        trail = len(seg.rstrip())
        if trail > lead:  # skip whitespace-only segments
            s, e = start + lead, start + trail
            body = text[s:e]
            sentences.append(
                Sentence(
                    sentence_id=f"{doc.doc_id}:{len(sentences)}",
                    doc_id=doc.doc_id,
                    text=body,
                    char_span=(s, e),
                    word_count=len(body.split()),
                )
            )
        start = cut
    return sentences


# --- candidate extraction ----------------------------------------------------

# Marker grammar: the word "hypothesis" (any case), optionally followed by a
# number and at most one letter; or a standalone uppercase H glued to digits
# with at most one trailing letter (H1, H2a, H10). Word boundaries required.
MARKER_PATTERN = re.compile(
    r"(?:\b(?i:hypothesis)\b(?:\s+\d+[A-Za-z]?\b)?)|(?:\bH\d+[A-Za-z]?\b)"
)


def extract_candidates(sentences: list[Sentence]) -> list[Candidate]:
    """Return one candidate per sentence whose text contains a marker.

    The first (leftmost) marker in the sentence wins.
    """
    out = []
    for sent in sentences:
        m = MARKER_PATTERN.search(sent.text)
        if m:
            out.append(Candidate(sentence=sent, marker=m.group(0), marker_span=m.span()))
    return out


# --- descriptive statistics --------------------------------------------------


@dataclass
class CorpusStats:
    n_documents: int
    n_sentences: int
    n_hypotheses: int
    hypotheses_per_doc_mean: float
    hypotheses_per_doc_std: float
    word_count_mean: float
    word_count_std: float
    word_count_histogram: dict[int, int] = field(default_factory=dict)
    direction_proportions: dict[str, float] = field(default_factory=dict)
    causality_proportions: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n_documents": self.n_documents,
            "n_sentences": self.n_sentences,
            "n_hypotheses": self.n_hypotheses,
            "hypotheses_per_doc_mean": self.hypotheses_per_doc_mean,
            "hypotheses_per_doc_std": self.hypotheses_per_doc_std,
            "word_count_mean": self.word_count_mean,
            "word_count_std": self.word_count_std,
            "word_count_histogram": {str(k): v for k, v in sorted(self.word_count_histogram.items())},
            "direction_proportions": self.direction_proportions,
            "causality_proportions": self.causality_proportions,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _population_stats(values: list[float]) -> tuple[float, float]:
    if not values:
        return 0.0, 0.0
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(var)


def _proportions(values: list[str]) -> dict[str, float]:
    counts = Counter(values)
    total = sum(counts.values())
    return {k: counts[k] / total for k in sorted(counts)} if total else {}


def corpus_stats(sentences: list[Sentence], records: list) -> CorpusStats:
    """Summarize a segmented corpus and its screened/annotated records.

    Word-count statistics censor sentences longer than 70 words; standard
    deviations use the population formula. `records` are HypothesisRecord-like
    objects (sentence_id, is_hypothesis, direction, causality).
    """
    if not sentences:
        raise EmptyCorpus("no sentences")
    doc_ids = {s.doc_id for s in sentences}
    sent_to_doc = {s.sentence_id: s.doc_id for s in sentences}

    hyp_records = [r for r in records if getattr(r, "is_hypothesis", None) is True]
    per_doc = Counter()
    for r in hyp_records:
        per_doc[sent_to_doc.get(r.sentence_id)] += 1
    per_doc_counts = [per_doc.get(d, 0) for d in sorted(doc_ids)]
    hpd_mean, hpd_std = _population_stats(per_doc_counts)

    retained = [s.word_count for s in sentences if s.word_count <= MAX_WORDS]
    wc_mean, wc_std = _population_stats(retained)
    histogram = Counter((wc // HISTOGRAM_BUCKET) * HISTOGRAM_BUCKET for wc in retained)

    directions = [r.direction for r in records if getattr(r, "direction", None)]
    causalities = [r.causality for r in records if getattr(r, "causality", None)]

    return CorpusStats(
        n_documents=len(doc_ids),
        n_sentences=len(sentences),
        n_hypotheses=len(hyp_records),
        hypotheses_per_doc_mean=hpd_mean,
        hypotheses_per_doc_std=hpd_std,
        word_count_mean=wc_mean,
        word_count_std=wc_std,
        word_count_histogram=dict(histogram),
        direction_proportions=_proportions(directions),
        causality_proportions=_proportions(causalities),
    )
