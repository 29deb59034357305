from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple

from pydantic import BaseModel, Field

from act.models.alignment import AlignmentResult
from act.models.corpus import CanonicalOrder, VerseId
from act.models.text import Token


class DetectionParams(BaseModel):
    ngram_size: int = Field(1, ge=1, description="Window length in words")
    stride: int = Field(1, ge=1)
    max_candidates_per_window: int = Field(50, ge=1)
    verse_context_radius: int = Field(8, ge=0, description="Verse words handed to the aligner around a hit")

    class Config:
        frozen = True


class Window(NamedTuple):
    start: int
    tokens: List[Token]


class Anchor(NamedTuple):
    verse: VerseId
    position: int
    last_position: int
    surprisal: float


class CandidateMatch(BaseModel):
    target_span: Tuple[int, int]
    verse: VerseId
    verse_span: Tuple[int, int]
    alignment: AlignmentResult
    region: Tuple[int, int]

    class Config:
        frozen = True

    @classmethod
    def from_alignment(
        cls, verse: VerseId, alignment: AlignmentResult, region: Tuple[int, int]
    ) -> "CandidateMatch":
        return cls(
            target_span=alignment.target_span,
            verse=verse,
            verse_span=alignment.verse_span,
            alignment=alignment,
            region=region,
        )

    @property
    def order_key(self) -> int:
        return self.target_span[0]

    @property
    def target_end(self) -> int:
        return self.target_span[0] + self.target_span[1]

    @property
    def verse_end(self) -> int:
        return self.verse_span[0] + self.verse_span[1]

    def identity(self) -> Tuple[VerseId, Tuple[int, int], Tuple[int, int]]:
        return (self.verse, self.target_span, self.verse_span)


class CandidateSequence:
    """Matches sorted by (s_start, verse order) with same-verse forward links."""

    def __init__(self, matches: List[CandidateMatch], order: Optional[CanonicalOrder] = None):
        order = order or CanonicalOrder()
        self.matches = sorted(
            matches,
            key=lambda match: (match.order_key, order.key(match.verse), match.verse_span[0], match.target_span[1]),
        )
        self.next_same_verse: List[Optional[int]] = [None] * len(self.matches)
        last_seen: Dict[VerseId, int] = {}
        for k, match in enumerate(self.matches):
            previous = last_seen.get(match.verse)
            if previous is not None and self.matches[previous].order_key < match.order_key:
                self.next_same_verse[previous] = k
            last_seen[match.verse] = k

    def __len__(self) -> int:
        return len(self.matches)

    def __iter__(self) -> Iterator[CandidateMatch]:
        return iter(self.matches)

    def __getitem__(self, k: int) -> CandidateMatch:
        return self.matches[k]

    def chain(self, k: int) -> List[int]:
        """Indexes reached from ``k`` by following same-verse links."""
        visited = [k]
        while self.next_same_verse[visited[-1]] is not None:
            visited.append(self.next_same_verse[visited[-1]])
        return visited
