import logging
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from act.models.alignment import AlignmentParams
from act.models.candidate import Anchor, CandidateMatch, CandidateSequence, DetectionParams, Window
from act.models.corpus import PositionalIndex, VerseId
from act.models.text import NormalizationConfig, Token
from act.services.alignment_service import AlignmentService

logger = logging.getLogger(__name__)


def sliding_windows(tokens: Sequence[Token], params: DetectionParams) -> List[Window]:
    """Windows of ``ngram_size`` tokens every ``stride`` tokens.

    When the last full window stops short of the text end, one shorter tail
    window starting at the next stride position is added if it is non-empty.
    """
    tokens = list(tokens)
    n, stride = params.ngram_size, params.stride
    windows = [Window(start, tokens[start:start + n]) for start in range(0, len(tokens) - n + 1, stride)]
    covered = windows[-1].start + n if windows else 0
    if covered < len(tokens):
        tail_start = windows[-1].start + stride if windows else 0
        if tail_start < len(tokens):
            windows.append(Window(tail_start, tokens[tail_start:]))
    return windows


def retrieve_candidates(
    window: Window,
    index: PositionalIndex,
    params: DetectionParams,
    normalization: Optional[NormalizationConfig] = None,
) -> List[Anchor]:
    """Verse anchors hit by any window token, rarest first, capped per window.

    Within one verse, hit positions closer together than the window length
    collapse into a single anchor.
    """
    if normalization is not None:
        index.ensure_compatible(normalization)

    hits: Dict[VerseId, Dict[int, float]] = {}
    for token in window.tokens:
        postings = index.lookup(token.surface)
        if not postings:
            continue
        surprisal = index.surprisal(token.surface)
        for posting in postings:
            positions = hits.setdefault(posting.verse, {})
            positions[posting.word_position] = max(positions.get(posting.word_position, 0.0), surprisal)

    width = len(window.tokens)
    anchors: List[Anchor] = []
    for verse_id, positions in hits.items():
        ordered = sorted(positions)
        first = previous = ordered[0]
        rarest = positions[first]
        for position in ordered[1:]:
            if position - previous < width:
                rarest = max(rarest, positions[position])
            else:
                anchors.append(Anchor(verse_id, first, previous, rarest))
                first, rarest = position, positions[position]
            previous = position
        anchors.append(Anchor(verse_id, first, previous, rarest))

    anchors.sort(key=lambda anchor: (-anchor.surprisal, index.order.key(anchor.verse), anchor.position))
    return anchors[: params.max_candidates_per_window]


def _spans_touch(a: Tuple[int, int], b: Tuple[int, int]) -> bool:
    """Half-open (start, size) spans overlap or are adjacent."""
    return a[0] <= b[0] + b[1] and b[0] <= a[0] + a[1]


def _contains(outer: Tuple[int, int], inner: Tuple[int, int]) -> bool:
    return outer[0] <= inner[0] and inner[0] + inner[1] <= outer[0] + outer[1]


class CandidateDetector:
    """Stage two of the pipeline: windows, index lookup, alignment, merging."""

    def __init__(
        self,
        index: PositionalIndex,
        normalization: NormalizationConfig,
        align_params: Optional[AlignmentParams] = None,
        detect_params: Optional[DetectionParams] = None,
    ):
        index.ensure_compatible(normalization)
        self.index = index
        self.normalization = normalization
        self.align_params = align_params or AlignmentParams()
        self.aligner = AlignmentService(self.align_params)
        self.detect_params = detect_params or DetectionParams()

    def sliding_windows(self, tokens: Sequence[Token]) -> List[Window]:
        return sliding_windows(tokens, self.detect_params)

    def retrieve_candidates(self, window: Window) -> List[Anchor]:
        return retrieve_candidates(window, self.index, self.detect_params)

    def align_window(self, window: Window) -> List[CandidateMatch]:
        """Align the window against every verse region its anchors point to."""
        matches = []
        radius = self.detect_params.verse_context_radius
        for anchor in self.retrieve_candidates(window):
            verse = self.index.verse(anchor.verse)
            region = (
                max(0, anchor.position - radius),
                min(len(verse.tokens), anchor.last_position + len(window.tokens) + radius),
            )
            result = self.aligner.align(window.tokens, verse, region)
            if result is not None:
                matches.append(CandidateMatch.from_alignment(verse.id, result, region))
        logger.debug("window at %d: %d matches", window.start, len(matches))
        return matches

    def detect_candidates(
        self,
        target_tokens: Sequence[Token],
        jobs: int = 1,
        progress: bool = False,
    ) -> CandidateSequence:
        target_tokens = list(target_tokens)
        windows = self.sliding_windows(target_tokens)
        raw = self._align_windows(windows, jobs, progress)

        unique: Dict[Tuple, CandidateMatch] = {}
        for match in raw:
            unique.setdefault(match.identity(), match)

        by_verse: Dict[VerseId, List[CandidateMatch]] = {}
        for match in unique.values():
            by_verse.setdefault(match.verse, []).append(match)

        merged: List[CandidateMatch] = []
        for verse_id in self.index.order.sorted(by_verse):
            group = self.merge_matches(by_verse[verse_id], target_tokens)
            merged.extend(self.suppress_subsumed(group))

        sequence = CandidateSequence(merged, self.index.order)
        logger.info(
            "Scanned %d windows: %d raw matches, %d candidates after merging",
            len(windows), len(raw), len(sequence),
        )
        return sequence

    def _align_windows(self, windows: List[Window], jobs: int, progress: bool) -> List[CandidateMatch]:
        if jobs <= 1 or len(windows) < 2:
            raw: List[CandidateMatch] = []
            for window in tqdm(windows, desc="windows", disable=not progress, leave=False):
                raw.extend(self.align_window(window))
            return raw

        chunk_size = max(1, -(-len(windows) // (jobs * 4)))
        chunks = [windows[k:k + chunk_size] for k in range(0, len(windows), chunk_size)]
        raw = []
        with Pool(processes=jobs, initializer=_init_worker, initargs=(self,)) as pool:
            # imap keeps chunk order, so the merged result does not depend on scheduling
            for part in tqdm(pool.imap(_align_chunk, chunks), total=len(chunks), disable=not progress, leave=False):
                raw.extend(part)
        return raw

    def merge_matches(self, matches: List[CandidateMatch], target_tokens: List[Token]) -> List[CandidateMatch]:
        """Merge same-verse matches whose target and verse spans both touch.

        Merged matches are re-aligned on the union window and the union verse
        region. Runs to a fixpoint, so merging twice changes nothing.
        """
        pending = sorted(matches, key=lambda match: (match.target_span, match.verse_span))
        changed = True
        while changed:
            changed = False
            for a in range(len(pending)):
                for b in range(a + 1, len(pending)):
                    first, second = pending[a], pending[b]
                    if _spans_touch(first.target_span, second.target_span) and _spans_touch(
                        first.verse_span, second.verse_span
                    ):
                        combined = self._realign(first, second, target_tokens)
                        pending = pending[:a] + pending[a + 1:b] + pending[b + 1:] + [combined]
                        pending.sort(key=lambda match: (match.target_span, match.verse_span))
                        logger.debug("merged %s fragments into %s", first.verse, combined.target_span)
                        changed = True
                        break
                if changed:
                    break
        return pending

    def _realign(self, first: CandidateMatch, second: CandidateMatch, target_tokens: List[Token]) -> CandidateMatch:
        start = min(first.target_span[0], second.target_span[0])
        end = max(first.target_end, second.target_end)
        region = (min(first.region[0], second.region[0]), max(first.region[1], second.region[1]))
        verse = self.index.verse(first.verse)
        result = self.aligner.align(target_tokens[start:end], verse, region)
        if result is None:
            return max((first, second), key=lambda match: match.alignment.total_score)
        return CandidateMatch.from_alignment(verse.id, result, region)

    @staticmethod
    def suppress_subsumed(matches: List[CandidateMatch]) -> List[CandidateMatch]:
        """Drop same-verse matches whose target span lies inside a stronger one."""

        def strength(match: CandidateMatch):
            return (match.alignment.total_score, match.target_span[1], -match.verse_span[0], -match.verse_span[1])

        kept = []
        for match in matches:
            dominated = any(
                other is not match
                and _contains(other.target_span, match.target_span)
                and strength(other) > strength(match)
                for other in matches
            )
            if not dominated:
                kept.append(match)
        return kept


_worker_detector: Optional[CandidateDetector] = None


def _init_worker(detector: CandidateDetector) -> None:
    global _worker_detector
    _worker_detector = detector


def _align_chunk(windows: List[Window]) -> List[CandidateMatch]:
    matches: List[CandidateMatch] = []
    for window in windows:
        matches.extend(_worker_detector.align_window(window))
    return matches


def detect_candidates(
    target_tokens: Sequence[Token],
    index: PositionalIndex,
    align_params: AlignmentParams,
    detect_params: DetectionParams,
    normalization: Optional[NormalizationConfig] = None,
    jobs: int = 1,
) -> CandidateSequence:
    detector = CandidateDetector(index, normalization or index.normalization, align_params, detect_params)
    return detector.detect_candidates(target_tokens, jobs=jobs)
