import math
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from pydantic import BaseModel, Field

from act.exceptions import IndexMismatchError
from act.models.text import NormalizationConfig, Token


DEFAULT_BOOK_ORDER = [
    "Genesis", "Exodus", "Leviticus", "Numbers", "Deuteronomy",
    "Joshua", "Judges", "I Samuel", "II Samuel", "I Kings", "II Kings",
    "Isaiah", "Jeremiah", "Ezekiel",
    "Hosea", "Joel", "Amos", "Obadiah", "Jonah", "Micah", "Nahum",
    "Habakkuk", "Zephaniah", "Haggai", "Zechariah", "Malachi",
    "Psalms", "Proverbs", "Job", "Song of Songs", "Ruth", "Lamentations",
    "Ecclesiastes", "Esther", "Daniel", "Ezra", "Nehemiah",
    "I Chronicles", "II Chronicles",
]


class VerseId(BaseModel):
    book: str = Field(..., min_length=1)
    chapter: int = Field(..., gt=0)
    verse: int = Field(..., gt=0)

    class Config:
        frozen = True

    def __str__(self) -> str:
        return f"{self.book} {self.chapter}:{self.verse}"

    @classmethod
    def parse(cls, label: str) -> "VerseId":
        """Parse "Book C:V"; book names may contain spaces."""
        try:
            book, reference = label.strip().rsplit(" ", 1)
            chapter, verse = reference.split(":")
            return cls(book=book, chapter=int(chapter), verse=int(verse))
        except ValueError as e:
            raise ValueError(f"Invalid verse reference {label!r}: expected 'Book C:V'") from e


class CanonicalOrder:
    """Total order on verse ids: book list rank, then chapter, then verse.

    Books missing from the list sort after all listed books, alphabetically.
    """

    def __init__(self, book_order: Optional[Sequence[str]] = None):
        self.book_order = list(book_order if book_order is not None else DEFAULT_BOOK_ORDER)
        self._rank = {book: rank for rank, book in enumerate(self.book_order)}

    def key(self, verse_id: VerseId) -> Tuple[int, str, int, int]:
        rank = self._rank.get(verse_id.book, len(self.book_order))
        return (rank, verse_id.book, verse_id.chapter, verse_id.verse)

    def sorted(self, verse_ids: Iterable[VerseId]) -> List[VerseId]:
        return sorted(verse_ids, key=self.key)


class Verse(BaseModel):
    id: VerseId
    tokens: List[Token] = Field(..., min_length=1)
    raw: str

    def surfaces(self) -> List[str]:
        return [token.surface for token in self.tokens]


class Posting(NamedTuple):
    verse: VerseId
    word_position: int


class PositionalIndex:
    """Token -> postings map over a verse corpus, plus frequency statistics.

    Write-once: built by the index service or loaded from disk, then only read.
    """

    def __init__(
        self,
        verses: List[Verse],
        postings: Dict[str, List[Posting]],
        normalization: NormalizationConfig,
        order: CanonicalOrder,
        corpus_fingerprint: str,
    ):
        self.verses = verses
        self.postings = postings
        self.normalization = normalization
        self.order = order
        self.corpus_fingerprint = corpus_fingerprint
        self.config_digest = normalization.digest()
        self.token_count = {token: len(entries) for token, entries in postings.items()}
        self.total_tokens = sum(self.token_count.values())
        self._verses_by_id = {verse.id: verse for verse in verses}

    def __len__(self) -> int:
        return len(self.verses)

    @property
    def vocabulary_size(self) -> int:
        return len(self.postings)

    def verse(self, verse_id: VerseId) -> Verse:
        return self._verses_by_id[verse_id]

    def lookup(self, token: str) -> List[Posting]:
        # shared list, callers must not mutate it
        return self.postings.get(token, [])

    def floor_probability(self) -> float:
        """Add-one floor given to tokens the corpus never contains."""
        return 1.0 / (self.total_tokens + 1)

    def token_probability(self, token: str) -> float:
        count = self.token_count.get(token, 0)
        if count == 0:
            return self.floor_probability()
        return count / self.total_tokens

    def surprisal(self, token: str) -> float:
        return -math.log2(self.token_probability(token))

    def ensure_compatible(self, normalization: NormalizationConfig) -> None:
        if normalization.digest() != self.config_digest:
            raise IndexMismatchError(
                "Index was built with a different normalization configuration "
                f"(index profile {self.normalization.profile!r}, active profile "
                f"{normalization.profile!r}); rebuild the index or use the matching config"
            )
