import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

from pydantic import BaseModel, Field, ValidationError

from act.exceptions import (
    ACTException,
    CorpusFormatError,
    DuplicateVerseError,
    EmptyCorpusError,
    InputNotFoundError,
)
from act.models.corpus import CanonicalOrder, PositionalIndex, Posting, Verse, VerseId
from act.models.text import NormalizationConfig, RawText
from act.services.normalize_service import NormalizeService

logger = logging.getLogger(__name__)


class CorpusRecord(BaseModel):
    """One line of the JSON-lines corpus file."""

    book: str = Field(..., min_length=1)
    chapter: int = Field(..., gt=0)
    verse: int = Field(..., gt=0)
    text: str


def corpus_fingerprint(verses: Iterable[Verse], normalization: NormalizationConfig) -> str:
    digest = hashlib.sha256()
    digest.update(normalization.digest().encode("ascii"))
    for verse in verses:
        line = f"{verse.id}\t{' '.join(verse.surfaces())}\n"
        digest.update(line.encode("utf-8"))
    return digest.hexdigest()


class IndexService:
    def __init__(
        self,
        normalization: Optional[NormalizationConfig] = None,
        order: Optional[CanonicalOrder] = None,
    ):
        self.normalization = normalization or NormalizationConfig()
        self.order = order or CanonicalOrder()
        self.normalizer = NormalizeService(self.normalization)

    def ingest_corpus(self, source: Union[str, Path]) -> List[Verse]:
        """Parse a JSON-lines corpus and return normalized verses in canonical order."""
        path = Path(source)
        if not path.is_file():
            raise InputNotFoundError(path)

        verses: List[Verse] = []
        seen: Dict[VerseId, int] = {}
        try:
            with path.open("r", encoding="utf-8") as handle:
                for line_number, line in enumerate(handle, start=1):
                    if not line.strip():
                        continue
                    verse = self._parse_line(line, line_number)
                    if verse.id in seen:
                        raise DuplicateVerseError(verse.id, line_number)
                    seen[verse.id] = line_number
                    verses.append(verse)
        except ACTException:
            raise
        except (OSError, UnicodeDecodeError) as e:
            raise CorpusFormatError(0, f"Error reading corpus {path}: {str(e)}")

        verses.sort(key=lambda verse: self.order.key(verse.id))
        logger.info("Ingested %d verses from %s", len(verses), path)
        return verses

    def _parse_line(self, line: str, line_number: int) -> Verse:
        try:
            record = CorpusRecord(**json.loads(line))
        except json.JSONDecodeError as e:
            raise CorpusFormatError(line_number, f"invalid JSON: {e.msg}")
        except (ValidationError, TypeError) as e:
            raise CorpusFormatError(line_number, f"invalid verse record: {str(e)}")

        verse_id = VerseId(book=record.book, chapter=record.chapter, verse=record.verse)
        tokens = self.normalizer.normalize(RawText(content=record.text, source_id=str(verse_id)))
        if not tokens:
            raise CorpusFormatError(line_number, f"verse {verse_id} has no tokens after normalization")
        return Verse(id=verse_id, tokens=tokens, raw=record.text)

    def build_index(self, verses: List[Verse]) -> PositionalIndex:
        """Build the positional index and corpus statistics over verses in canonical order."""
        if not verses:
            raise EmptyCorpusError("Cannot build an index from an empty verse list")

        ordered = sorted(verses, key=lambda verse: self.order.key(verse.id))
        postings: Dict[str, List[Posting]] = {}
        for verse in ordered:
            for token in verse.tokens:
                postings.setdefault(token.surface, []).append(Posting(verse.id, token.position))

        index = PositionalIndex(
            verses=ordered,
            postings=postings,
            normalization=self.normalization,
            order=self.order,
            corpus_fingerprint=corpus_fingerprint(ordered, self.normalization),
        )
        logger.info(
            "Indexed %d verses, %d tokens, %d distinct surfaces",
            len(index), index.total_tokens, index.vocabulary_size,
        )
        return index


def lookup(index: PositionalIndex, token: str) -> List[Posting]:
    return index.lookup(token)


def token_probability(index: PositionalIndex, token: str) -> float:
    return index.token_probability(token)
