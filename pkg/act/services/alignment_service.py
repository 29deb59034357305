import logging
from functools import lru_cache
from typing import FrozenSet, List, Optional, Sequence, Tuple

import Levenshtein

from act.models.alignment import AlignedPair, AlignmentParams, AlignmentResult
from act.models.corpus import Verse
from act.models.text import Token

logger = logging.getLogger(__name__)

_DIAGONAL, _UP, _LEFT = 1, 2, 3


def _stripped_forms(word: str, prefixes: FrozenSet[str], max_strip: int, min_stem: int) -> List[str]:
    forms = [word]
    for k in range(1, max_strip + 1):
        if len(word) - k < min_stem or word[k - 1] not in prefixes:
            break
        forms.append(word[k:])
    return forms


@lru_cache(maxsize=1 << 17)
def _cached_similarity(a: str, b: str, prefixes: FrozenSet[str], max_strip: int, min_stem: int) -> float:
    best = 0.0
    for x in _stripped_forms(a, prefixes, max_strip, min_stem):
        for y in _stripped_forms(b, prefixes, max_strip, min_stem):
            if x == y:
                return 1.0
            similarity = 1.0 - Levenshtein.distance(x, y) / max(len(x), len(y))
            best = max(best, similarity)
    return best


def word_similarity(a: str, b: str, params: Optional[AlignmentParams] = None) -> float:
    """Orthographic similarity of two normalized words in [0, 1].

    Both words may shed up to ``max_prefix_strip`` leading prefix letters (as
    long as ``min_stem_length`` letters remain); the result is the best
    normalized edit similarity over all stripped forms, and 1.0 exactly when
    some stripped forms coincide.
    """
    params = params or AlignmentParams()
    if a == b:
        return 1.0
    # order the arguments so the cache sees one key per unordered pair
    if b < a:
        a, b = b, a
    return _cached_similarity(a, b, params.prefix_letters, params.max_prefix_strip, params.min_stem_length)


def local_align(
    target_window: Sequence[Token],
    verse: Verse,
    params: Optional[AlignmentParams] = None,
    region: Optional[Tuple[int, int]] = None,
) -> Optional[AlignmentResult]:
    """Word-level Smith-Waterman alignment of a target window against a verse.

    ``region`` restricts the verse side to ``[start, end)``; positions in the
    result are always absolute (target token positions, verse word indexes).
    Among equal-scoring alignments the one with the smallest verse start, then
    the smallest target start, wins.
    """
    params = params or AlignmentParams()
    if not target_window:
        return None
    lo, hi = region if region is not None else (0, len(verse.tokens))
    lo, hi = max(0, lo), min(len(verse.tokens), hi)
    if lo >= hi:
        return None

    targets = [token.surface for token in target_window]
    words = [token.surface for token in verse.tokens[lo:hi]]
    n, m = len(targets), len(words)
    similarity = [[word_similarity(t, w, params) for w in words] for t in targets]
    threshold = params.match_threshold
    gap = params.gap_penalty

    # scratch space is per call
    H = [[0.0] * (m + 1) for _ in range(n + 1)]
    best = 0.0
    ends: List[Tuple[int, int]] = []
    for i in range(1, n + 1):
        row_sim = similarity[i - 1]
        for j in range(1, m + 1):
            s = row_sim[j - 1]
            pair_score = s if s >= threshold else params.mismatch_penalty
            h = max(0.0, H[i - 1][j - 1] + pair_score, H[i - 1][j] + gap, H[i][j - 1] + gap)
            H[i][j] = h
            if h > best:
                best = h
                ends = [(i, j)]
            elif h == best and h > 0.0:
                ends.append((i, j))
    if best <= 0.0:
        return None

    chosen: Optional[List[Tuple[int, int, float]]] = None
    chosen_key = None
    for end in ends:
        local_pairs = _traceback(H, similarity, end, params)
        if len(local_pairs) < params.min_alignment_len:
            continue
        key = (local_pairs[0][1], local_pairs[0][0], local_pairs[-1][1], local_pairs[-1][0])
        if chosen_key is None or key < chosen_key:
            chosen, chosen_key = local_pairs, key
    if chosen is None:
        return None

    swaps: List[Tuple[int, int, float]] = []
    if params.allow_swaps:
        swaps = _find_swaps(chosen, similarity, params)

    def absolute(pair: Tuple[int, int, float]) -> AlignedPair:
        i, j, s = pair
        return AlignedPair(target_window[i].position, lo + j, s)

    pairs = [absolute(pair) for pair in chosen]
    swap_pairs = [absolute(pair) for pair in swaps]
    everything = pairs + swap_pairs
    t_start = min(p.target_pos for p in everything)
    t_end = max(p.target_pos for p in everything)
    v_start = min(p.verse_pos for p in everything)
    v_end = max(p.verse_pos for p in everything)
    return AlignmentResult(
        target_span=(t_start, t_end - t_start + 1),
        verse_span=(v_start, v_end - v_start + 1),
        pairs=pairs,
        swaps=swap_pairs,
        score=best,
        swap_score=sum(s + params.swap_penalty for _, _, s in swaps),
    )


def _traceback(
    H: List[List[float]],
    similarity: List[List[float]],
    end: Tuple[int, int],
    params: AlignmentParams,
) -> List[Tuple[int, int, float]]:
    """Matched (target, verse, similarity) index triples of the path ending at ``end``."""
    i, j = end
    pairs: List[Tuple[int, int, float]] = []
    while i > 0 and j > 0 and H[i][j] > 0.0:
        s = similarity[i - 1][j - 1]
        matched = s >= params.match_threshold
        pair_score = s if matched else params.mismatch_penalty
        if H[i][j] == H[i - 1][j - 1] + pair_score:
            if matched:
                pairs.append((i - 1, j - 1, s))
            i, j = i - 1, j - 1
        elif H[i][j] == H[i - 1][j] + params.gap_penalty:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return pairs


def _find_swaps(
    pairs: List[Tuple[int, int, float]],
    similarity: List[List[float]],
    params: AlignmentParams,
) -> List[Tuple[int, int, float]]:
    """Accept unmatched word pairs that cross a nearby aligned pair.

    A swap is an unmatched (target, verse) pair whose similarity reaches the
    match threshold and that crosses an aligned pair no more than
    ``swap_distance`` words away on both sides. Each word joins at most one
    swap; candidates are taken in (target, verse) order.
    """
    n, m = len(similarity), len(similarity[0])
    used_targets = {i for i, _, _ in pairs}
    used_verse = {j for _, j, _ in pairs}
    distance = params.swap_distance
    swaps: List[Tuple[int, int, float]] = []
    for ti in range(n):
        if ti in used_targets:
            continue
        for vj in range(m):
            if vj in used_verse:
                continue
            s = similarity[ti][vj]
            if s < params.match_threshold or s + params.swap_penalty <= 0.0:
                continue
            crosses = any(
                (ti - i) * (vj - j) < 0 and abs(ti - i) <= distance and abs(vj - j) <= distance
                for i, j, _ in pairs
            )
            if crosses:
                swaps.append((ti, vj, s))
                used_targets.add(ti)
                used_verse.add(vj)
                break
    return swaps


class AlignmentService:
    """Aligns target windows against verses with one fixed set of parameters."""

    def __init__(self, params: Optional[AlignmentParams] = None):
        self.params = params or AlignmentParams()

    def align(
        self,
        target_window: Sequence[Token],
        verse: Verse,
        region: Optional[Tuple[int, int]] = None,
    ) -> Optional[AlignmentResult]:
        return local_align(target_window, verse, self.params, region)
