import pytest

from act.exceptions import IndexMismatchError
from act.models.alignment import AlignmentParams
from act.models.candidate import DetectionParams, Window
from act.models.text import NormalizationConfig
from act.services.detection_service import CandidateDetector, detect_candidates, retrieve_candidates, sliding_windows
from act.services.index_service import IndexService
from act.services.normalize_service import NormalizeService
from tests.conftest import BERESHIT
from tests.helpers import TargetBuilder, make_tokens, make_verse, planted_midrash, verse_id, verse_words

normalizer = NormalizeService()


def starts_and_sizes(windows):
    return [(w.start, len(w.tokens)) for w in windows]


def detector_for(index, **detect):
    return CandidateDetector(index, NormalizationConfig(), AlignmentParams(), DetectionParams(**detect))


def test_windows_bigram_count():
    windows = sliding_windows(make_tokens("abcde"), DetectionParams(ngram_size=2))
    assert starts_and_sizes(windows) == [(0, 2), (1, 2), (2, 2), (3, 2)]


def test_windows_unigram():
    windows = sliding_windows(make_tokens("abc"), DetectionParams())
    assert [[t.surface for t in w.tokens] for w in windows] == [["a"], ["b"], ["c"]]


def test_windows_stride_with_tail():
    windows = sliding_windows(make_tokens("abcdefghij"), DetectionParams(ngram_size=3, stride=2))
    assert starts_and_sizes(windows) == [(0, 3), (2, 3), (4, 3), (6, 3), (8, 2)]


def test_windows_text_shorter_than_ngram():
    assert starts_and_sizes(sliding_windows(make_tokens("ab"), DetectionParams(ngram_size=3))) == [(0, 2)]


def test_windows_empty():
    assert sliding_windows([], DetectionParams()) == []


def test_retrieve_bereshit_anchors(hebrew_index):
    window = Window(0, normalizer.normalize_content("בְּרֵאשִׁית"))
    anchors = retrieve_candidates(window, hebrew_index, DetectionParams())
    assert [(str(a.verse), a.position) for a in anchors] == [
        ("Genesis 1:1", 0),
        ("Jeremiah 26:1", 0),
        ("Jeremiah 27:1", 0),
        ("Jeremiah 28:1", 3),
        ("Jeremiah 49:34", 9),
    ]


def test_retrieve_unknown_words(hebrew_index):
    window = Window(0, normalizer.normalize_content("קקק ששש"))
    assert retrieve_candidates(window, hebrew_index, DetectionParams()) == []


def test_retrieve_rejects_other_normalization(hebrew_index):
    window = Window(0, normalizer.normalize_content("בראשית"))
    with pytest.raises(IndexMismatchError):
        retrieve_candidates(window, hebrew_index, DetectionParams(), NormalizationConfig.from_profile("plain"))


def test_retrieve_matches_exhaustive_scan(synthetic_index):
    params = DetectionParams(ngram_size=3)
    words = [verse_words(4)[2], "unknown", verse_words(17)[9]]
    anchors = retrieve_candidates(Window(0, make_tokens(words)), synthetic_index, params)

    expected = set()
    for verse in synthetic_index.verses:
        for token in verse.tokens:
            if token.surface in words:
                expected.add((verse.id, token.position))
    assert {(a.verse, a.position) for a in anchors} == expected


def test_retrieve_collapses_close_hits_and_caps():
    verses = [make_verse(["w", "x", "w", "y"], "Psalms", 1, k) for k in range(1, 8)]
    index = IndexService().build_index(verses)
    anchors = retrieve_candidates(Window(0, make_tokens(["w", "x"])), index, DetectionParams(max_candidates_per_window=3))
    assert len(anchors) == 3
    assert all(a.position == 0 and a.last_position == 2 for a in anchors)
    assert [a.verse.verse for a in anchors] == [1, 2, 3]


def test_detector_requires_matching_normalization(hebrew_index):
    with pytest.raises(IndexMismatchError):
        CandidateDetector(hebrew_index, NormalizationConfig.from_profile("plain"))


def test_target_equal_to_verse_gives_one_match(synthetic_index):
    tokens = make_tokens(verse_words(7))
    sequence = detector_for(synthetic_index).detect_candidates(tokens)
    assert len(sequence) == 1
    match = sequence[0]
    assert match.verse == verse_id(7)
    assert match.target_span == (0, 10)
    assert match.verse_span == (0, 10)


def test_empty_target(synthetic_index):
    assert len(detector_for(synthetic_index).detect_candidates([])) == 0


@pytest.mark.parametrize("match_threshold, span", [(0.75, (0, 3)), (0.9, (0, 2))])
def test_detector_aligns_with_its_match_threshold(synthetic_index, match_threshold, span):
    words = verse_words(5)[:3]
    words[2] = words[2][:-1] + "z"
    params = AlignmentParams(match_threshold=match_threshold)
    detector = CandidateDetector(synthetic_index, NormalizationConfig(), params, DetectionParams(ngram_size=3))
    (match,) = detector.detect_candidates(make_tokens(words))
    assert match.verse == verse_id(5)
    assert match.target_span == span


def test_wave_fixture_gives_one_match_per_fragment(synthetic_index):
    target = TargetBuilder().commentary(3)
    for b_start in (0, 3, 6):
        target.quote(12, b_start, 3, "wave").commentary(5)
    sequence = detector_for(synthetic_index).detect_candidates(make_tokens(target.words))

    assert [(m.target_span, m.verse_span) for m in sequence] == [
        ((3, 3), (0, 3)),
        ((11, 3), (3, 3)),
        ((19, 3), (6, 3)),
    ]
    assert sequence.chain(0) == [0, 1, 2]


def test_merging_is_idempotent(synthetic_index):
    detector = detector_for(synthetic_index)
    tokens = make_tokens(planted_midrash().words)
    sequence = detector.detect_candidates(tokens)
    by_verse = {}
    for match in sequence:
        by_verse.setdefault(match.verse, []).append(match)
    for matches in by_verse.values():
        again = detector.merge_matches(matches, tokens)
        assert sorted(m.identity() for m in again) == sorted(m.identity() for m in matches)


def test_links_visit_increasing_positions(synthetic_index):
    sequence = detector_for(synthetic_index).detect_candidates(make_tokens(planted_midrash().words))
    for k in range(len(sequence)):
        starts = [sequence[j].target_span[0] for j in sequence.chain(k)]
        assert starts == sorted(set(starts))
        assert all(sequence[j].verse == sequence[k].verse for j in sequence.chain(k))


def test_every_verbatim_word_is_covered(synthetic_index):
    target = planted_midrash()
    tokens = make_tokens(target.words)
    sequence = detector_for(synthetic_index).detect_candidates(tokens)
    covered = {pair.target_pos for match in sequence for pair in match.alignment.aligned_pairs()}
    vocabulary = {t.surface for verse in synthetic_index.verses for t in verse.tokens}
    assert {t.position for t in tokens if t.surface in vocabulary} <= covered


def test_stride_one_covers_larger_strides(synthetic_index):
    tokens = make_tokens(planted_midrash().words)

    def pairs(stride):
        sequence = detector_for(synthetic_index, ngram_size=2, stride=stride).detect_candidates(tokens)
        return {(m.verse, p.target_pos, p.verse_pos) for m in sequence for p in m.alignment.aligned_pairs()}

    assert pairs(3) <= pairs(1)


def test_parallel_detection_is_identical(synthetic_index):
    tokens = make_tokens(planted_midrash().words)
    serial = detector_for(synthetic_index).detect_candidates(tokens, jobs=1)
    parallel = detector_for(synthetic_index).detect_candidates(tokens, jobs=4)
    assert [m.model_dump() for m in serial] == [m.model_dump() for m in parallel]


def test_module_level_detect_candidates(hebrew_index):
    tokens = normalizer.normalize_content("אמר רבי בְּרֵאשִׁית בָּרָא אֱלֹהִים")
    sequence = detect_candidates(tokens, hebrew_index, AlignmentParams(), DetectionParams())
    genesis = [m for m in sequence if str(m.verse) == "Genesis 1:1"]
    assert len(genesis) == 1
    assert genesis[0].target_span == (2, 3)
    assert hebrew_index.verse(genesis[0].verse).tokens[0].surface == BERESHIT
