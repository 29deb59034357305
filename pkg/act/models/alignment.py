from typing import FrozenSet, List, NamedTuple, Tuple

from pydantic import BaseModel, Field, model_validator

# ו ה ב כ ל מ ש: the one-letter proclitics of Hebrew
HEBREW_PREFIX_LETTERS = frozenset("והבכלמש")


class AlignmentParams(BaseModel):
    match_threshold: float = Field(0.75, ge=0.0, le=1.0)
    gap_penalty: float = Field(-0.5, lt=0.0)
    mismatch_penalty: float = Field(-1.0, lt=0.0)
    swap_penalty: float = Field(-0.25, le=0.0)
    allow_swaps: bool = True
    swap_distance: int = Field(2, ge=1)
    prefix_letters: FrozenSet[str] = Field(default_factory=lambda: HEBREW_PREFIX_LETTERS)
    max_prefix_strip: int = Field(2, ge=0)
    min_stem_length: int = Field(2, ge=1)
    min_alignment_len: int = Field(1, ge=1)

    class Config:
        frozen = True


class AlignedPair(NamedTuple):
    target_pos: int
    verse_pos: int
    similarity: float


class AlignmentResult(BaseModel):
    """Best local alignment of a target window against a verse.

    ``pairs`` are the matched word pairs of the DP path and ``score`` is the DP
    optimum. ``swaps`` are transposed pairs accepted afterwards; they are
    outside the monotone path but inside both spans.
    """

    target_span: Tuple[int, int]
    verse_span: Tuple[int, int]
    pairs: List[AlignedPair] = Field(..., min_length=1)
    swaps: List[AlignedPair] = Field(default_factory=list)
    score: float
    swap_score: float = 0.0

    @model_validator(mode="after")
    def _monotone_pairs(self) -> "AlignmentResult":
        for previous, current in zip(self.pairs, self.pairs[1:]):
            if current.target_pos <= previous.target_pos or current.verse_pos <= previous.verse_pos:
                raise ValueError("alignment pairs must be strictly increasing in both coordinates")
        return self

    @property
    def total_score(self) -> float:
        return self.score + self.swap_score

    def aligned_pairs(self) -> List[AlignedPair]:
        """DP pairs and swaps together, ordered by target position."""
        return sorted(self.pairs + self.swaps)
