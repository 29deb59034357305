import json
import random
from collections import Counter

import pytest
from hypothesis import assume, given, settings, strategies as st

from act.config import load_settings
from act.exceptions import CorpusFormatError, DuplicateVerseError, EmptyCorpusError, InputNotFoundError
from act.models.corpus import CanonicalOrder, Posting, VerseId
from act.models.text import NormalizationConfig
from act.services.index_service import IndexService, lookup, token_probability
from act.services.pipeline_service import PipelineService
from tests.conftest import BERESHIT
from tests.helpers import hebrew_like_text, make_verse


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_ingest_returns_canonical_order(tmp_path):
    corpus = write_lines(tmp_path / "corpus.jsonl", [
        json.dumps({"book": "Jeremiah", "chapter": 1, "verse": 1, "text": "דברי ירמיהו"}),
        json.dumps({"book": "Genesis", "chapter": 2, "verse": 1, "text": "ויכלו השמים"}),
        json.dumps({"book": "Genesis", "chapter": 1, "verse": 2, "text": "והארץ היתה"}),
    ])
    verses = IndexService().ingest_corpus(corpus)
    assert [str(v.id) for v in verses] == ["Genesis 1:2", "Genesis 2:1", "Jeremiah 1:1"]


def test_ingest_duplicate_verse(tmp_path):
    line = json.dumps({"book": "Genesis", "chapter": 1, "verse": 1, "text": "בראשית ברא"})
    corpus = write_lines(tmp_path / "corpus.jsonl", [line, line])
    with pytest.raises(DuplicateVerseError) as excinfo:
        IndexService().ingest_corpus(corpus)
    assert "Genesis 1:1" in excinfo.value.detail
    assert "line 2" in excinfo.value.detail


@pytest.mark.parametrize(
    "bad_line",
    [
        "{not json",
        json.dumps({"book": "Genesis", "chapter": 0, "verse": 1, "text": "x"}),
        json.dumps({"book": "Genesis", "chapter": 1, "text": "x"}),
        json.dumps({"book": "Genesis", "chapter": 1, "verse": 2, "text": "... ְ ;"}),
    ],
)
def test_ingest_malformed_line_names_line_number(tmp_path, bad_line):
    good = json.dumps({"book": "Genesis", "chapter": 1, "verse": 1, "text": "בראשית ברא"})
    corpus = write_lines(tmp_path / "corpus.jsonl", [good, "", bad_line])
    with pytest.raises(CorpusFormatError) as excinfo:
        IndexService().ingest_corpus(corpus)
    assert excinfo.value.line_number == 3
    assert excinfo.value.exit_code == 3


def test_ingest_missing_file(tmp_path):
    with pytest.raises(InputNotFoundError):
        IndexService().ingest_corpus(tmp_path / "missing.jsonl")


def test_genesis_first_token_is_bereshit(hebrew_corpus_path):
    verses = IndexService().ingest_corpus(hebrew_corpus_path)
    genesis = next(v for v in verses if v.id == VerseId(book="Genesis", chapter=1, verse=1))
    assert genesis.tokens[0].surface == BERESHIT


def test_build_index_postings_small_corpus():
    verse = make_verse(["a", "b", "a"])
    index = IndexService().build_index([verse])
    assert index.lookup("a") == [Posting(verse.id, 0), Posting(verse.id, 2)]
    assert index.lookup("b") == [Posting(verse.id, 1)]
    assert index.lookup("c") == []
    assert token_probability(index, "a") == 2 / 3


def test_build_index_empty():
    with pytest.raises(EmptyCorpusError):
        IndexService().build_index([])


def test_unseen_token_floor(hebrew_index):
    assert token_probability(hebrew_index, "zzz") == 1 / (hebrew_index.total_tokens + 1)


def test_bereshit_postings(hebrew_index):
    postings = lookup(hebrew_index, BERESHIT)
    assert [(str(p.verse), p.word_position) for p in postings] == [
        ("Genesis 1:1", 0),
        ("Jeremiah 26:1", 0),
        ("Jeremiah 27:1", 0),
        ("Jeremiah 28:1", 3),
        ("Jeremiah 49:34", 9),
    ]
    assert token_probability(hebrew_index, BERESHIT) == 5 / hebrew_index.total_tokens


def test_synthetic_index_matches_exhaustive_scan():
    rng = random.Random(7)
    vocabulary = [f"w{k}" for k in range(60)]
    verses = [
        make_verse([rng.choice(vocabulary) for _ in range(rng.randint(1, 12))], "Psalms", 1 + k // 50, 1 + k % 50)
        for k in range(200)
    ]
    index = IndexService().build_index(verses)

    expected = {}
    counts = Counter()
    for verse in verses:
        for position, token in enumerate(verse.tokens):
            expected.setdefault(token.surface, []).append(Posting(verse.id, position))
            counts[token.surface] += 1
    total = sum(counts.values())

    order = CanonicalOrder()
    for surface, postings in expected.items():
        ordered = sorted(postings, key=lambda p: (order.key(p.verse), p.word_position))
        assert lookup(index, surface) == ordered
        assert token_probability(index, surface) == counts[surface] / total
    assert index.total_tokens == total
    assert index.vocabulary_size == len(expected)


def test_fingerprint_depends_on_normalization(hebrew_corpus_path):
    default = IndexService(NormalizationConfig())
    plain = IndexService(NormalizationConfig.from_profile("plain"))
    a = default.build_index(default.ingest_corpus(hebrew_corpus_path))
    b = default.build_index(default.ingest_corpus(hebrew_corpus_path))
    c = plain.build_index(plain.ingest_corpus(hebrew_corpus_path))
    assert a.corpus_fingerprint == b.corpus_fingerprint
    assert a.corpus_fingerprint != c.corpus_fingerprint


@settings(max_examples=300, deadline=None)
@given(hebrew_like_text, st.sampled_from(["hebrew-default", "plain"]))
def test_corpus_and_target_normalize_alike(text, profile):
    run_settings = load_settings(overrides={"normalization_profile": profile})
    indexer = IndexService(run_settings.normalization)
    pipeline = PipelineService(indexer.build_index([make_verse(["x"])]), run_settings)
    target_tokens = pipeline.tokenize(text, "doc")
    assume(target_tokens)

    line = json.dumps({"book": "Genesis", "chapter": 1, "verse": 1, "text": text}, ensure_ascii=False)
    verse = indexer._parse_line(line, 1)
    assert [t.surface for t in verse.tokens] == [t.surface for t in target_tokens]
    assert [t.char_span for t in verse.tokens] == [t.char_span for t in target_tokens]
