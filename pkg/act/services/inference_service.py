import logging
from typing import Dict, List, Optional

from act.models.candidate import CandidateMatch, CandidateSequence
from act.models.corpus import PositionalIndex, VerseId
from act.models.quotation import InferenceParams, Quotation, QuotationStyle

logger = logging.getLogger(__name__)


def surprisal_score(match: CandidateMatch, index: PositionalIndex) -> float:
    """Sum of -log2 P(w) over the verse-side words of every aligned pair."""
    verse = index.verse(match.verse)
    return sum(index.surprisal(verse.tokens[pair.verse_pos].surface) for pair in match.alignment.aligned_pairs())


def _verse_spans_overlap(a: Quotation, b: Quotation) -> bool:
    return a.b_start < b.b_end and b.b_start < a.b_end


def _group_style(members: List[Quotation]) -> QuotationStyle:
    for later, member in enumerate(members):
        if any(_verse_spans_overlap(earlier, member) for earlier in members[:later]):
            return QuotationStyle.ECHO
    return QuotationStyle.WAVE


def _to_quotation(match: CandidateMatch, score: float) -> Quotation:
    return Quotation(
        s_start=match.target_span[0],
        s_size=match.target_span[1],
        b_verse=match.verse,
        b_start=match.verse_span[0],
        b_size=match.verse_span[1],
        score=score,
        base_score=score,
    )


def boost_and_label(
    candidates: CandidateSequence,
    index: PositionalIndex,
    params: Optional[InferenceParams] = None,
) -> List[Quotation]:
    """Link each candidate to the previous candidate of the same verse.

    A link forms when at most ``neighbor_window`` target words separate the
    two; linked candidates share a group whose score is the sum of its
    members' own scores. The style is decided once per group: a group in which
    any member re-quotes verse words of an earlier member is an echo (first
    member head, later ones tails), otherwise a wave. Isolated candidates stay
    simple with their own score.
    """
    params = params or InferenceParams()
    quotations = [_to_quotation(match, surprisal_score(match, index)) for match in candidates]

    group_of: List[Optional[int]] = [None] * len(quotations)
    groups: Dict[int, List[int]] = {}
    last_seen: Dict[VerseId, int] = {}
    for i, current in enumerate(quotations):
        previous_index = last_seen.get(current.b_verse)
        last_seen[current.b_verse] = i
        if previous_index is None:
            continue
        previous = quotations[previous_index]
        if current.s_start - previous.s_end > params.neighbor_window:
            continue

        group_id = group_of[previous_index]
        if group_id is None:
            group_id = len(groups) + 1
            groups[group_id] = [previous_index]
            group_of[previous_index] = group_id
        groups[group_id].append(i)
        group_of[i] = group_id

    for group_id, members in groups.items():
        total = sum(quotations[k].base_score for k in members)
        style = _group_style([quotations[k] for k in members])
        for position, k in enumerate(members):
            if style == QuotationStyle.ECHO:
                role = "head" if position == 0 else "tail"
            else:
                role = "fragment"
            quotations[k] = quotations[k].model_copy(
                update={"score": total, "group_id": group_id, "role": role, "style": style}
            )
        logger.debug("group %d on %s: %d members, score %.3f", group_id, quotations[members[0]].b_verse,
                     len(members), total)

    return sort_quotations(quotations, index)


def label_compound(quotations: List[Quotation]) -> List[Quotation]:
    """Relabel wave groups whose commentary gaps hold quotations of other verses.

    The enclosing group's members become compound; each embedded quotation
    keeps its own style and records the enclosing group as its parent.
    """
    members_by_group: Dict[int, List[int]] = {}
    for k, quotation in enumerate(quotations):
        if quotation.group_id is not None:
            members_by_group.setdefault(quotation.group_id, []).append(k)

    result = list(quotations)
    for group_id in sorted(members_by_group):
        members = sorted(members_by_group[group_id], key=lambda k: quotations[k].s_start)
        if len(members) < 2 or any(quotations[k].style != QuotationStyle.WAVE for k in members):
            continue
        verse = quotations[members[0]].b_verse
        gaps = [
            (quotations[left].s_end, quotations[right].s_start)
            for left, right in zip(members, members[1:])
            if quotations[left].s_end < quotations[right].s_start
        ]
        embedded = [
            k for k, quotation in enumerate(quotations)
            if quotation.b_verse != verse
            and any(low <= quotation.s_start and quotation.s_end <= high for low, high in gaps)
        ]
        if not embedded:
            continue
        for k in members:
            result[k] = result[k].model_copy(update={"style": QuotationStyle.COMPOUND})
        for k in embedded:
            if result[k].parent_group_id is None:
                result[k] = result[k].model_copy(update={"parent_group_id": group_id})
        logger.debug("group %d is compound: %d embedded quotations", group_id, len(embedded))
    return result


def prune(quotations: List[Quotation], params: Optional[InferenceParams] = None) -> List[Quotation]:
    """Discard quotations scoring strictly below the threshold.

    Group members all carry the group score, so a group survives or goes as a unit.
    """
    params = params or InferenceParams()
    return [quotation for quotation in quotations if quotation.score >= params.score_threshold]


def sort_quotations(quotations: List[Quotation], index: Optional[PositionalIndex] = None) -> List[Quotation]:
    def key(quotation: Quotation):
        verse_key = index.order.key(quotation.b_verse) if index is not None else (0, quotation.b_verse.book,
                                                                                  quotation.b_verse.chapter,
                                                                                  quotation.b_verse.verse)
        return (quotation.s_start, verse_key, quotation.b_start, quotation.s_size)

    return sorted(quotations, key=key)


class InferenceService:
    """Stage three: scoring, boosting, style labels and pruning."""

    def __init__(self, index: PositionalIndex, params: Optional[InferenceParams] = None):
        self.index = index
        self.params = params or InferenceParams()

    def score_candidates(self, candidates: CandidateSequence) -> List[Quotation]:
        """Quotations with their final pre-prune scores (boosted when enrichment is on)."""
        if not self.params.enrichment:
            return sort_quotations(
                [_to_quotation(match, surprisal_score(match, self.index)) for match in candidates],
                self.index,
            )
        return boost_and_label(candidates, self.index, self.params)

    def finalize(self, scored: List[Quotation], threshold: Optional[float] = None) -> List[Quotation]:
        """Prune, then label compounds among the survivors."""
        if not self.params.enrichment:
            return scored
        params = self.params if threshold is None else self.params.model_copy(update={"score_threshold": threshold})
        kept = prune(scored, params)
        logger.info("Kept %d of %d quotations at threshold %g", len(kept), len(scored), params.score_threshold)
        return label_compound(kept)

    def infer(self, candidates: CandidateSequence) -> List[Quotation]:
        return self.finalize(self.score_candidates(candidates))
