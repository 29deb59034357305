"""Builders for synthetic corpora and targets.

Corpus words are six letters long: a three digit code spelled twice over
``VERSE_LETTERS``. Two distinct words therefore differ in at least two
places, so their similarity stays below the default match threshold and
every quoted word aligns only with itself. Commentary words use a disjoint
alphabet and never occur in the corpus.
"""
import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from hypothesis import strategies as st

from act.models.corpus import Verse, VerseId
from act.models.text import Token

VERSE_LETTERS = "abcdefghij"
COMMENTARY_LETTERS = "klmnopqrst"
BOOKS = ["Genesis", "Exodus", "Psalms"]
WORDS_PER_VERSE = 10

# Hebrew letters, points, cantillation, punctuation and a few Latin/space characters
hebrew_like_text = st.text(
    alphabet=st.sampled_from(
        [chr(c) for c in range(0x05D0, 0x05EB)]
        + [chr(c) for c in range(0x0591, 0x05C8)]
        + list(" \t\n.,;:-\"'%$“”׳״װײ")
        + list("abcé")
        + ["\u200f", "\u05be"]
    ),
    max_size=60,
)


def code_word(code: int, alphabet: str = VERSE_LETTERS) -> str:
    spelled = "".join(alphabet[int(digit)] for digit in f"{code:03d}")
    return spelled * 2


def verse_id(k: int) -> VerseId:
    """Verse number ``k`` of the synthetic corpus: ten verses per book."""
    return VerseId(book=BOOKS[k // 10], chapter=k // 10 + 1, verse=k % 10 + 1)


def verse_words(k: int, length: int = WORDS_PER_VERSE) -> List[str]:
    return [code_word(k * length + p) for p in range(length)]


def write_corpus(path: Path, verses: int = 30) -> Path:
    with path.open("w", encoding="utf-8") as handle:
        for k in range(verses):
            vid = verse_id(k)
            record = {"book": vid.book, "chapter": vid.chapter, "verse": vid.verse, "text": " ".join(verse_words(k))}
            handle.write(json.dumps(record) + "\n")
    return path


def write_records(path: Path, records: Sequence[Dict]) -> Path:
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    return path


def make_tokens(surfaces: Sequence[str]) -> List[Token]:
    tokens = []
    offset = 0
    for position, surface in enumerate(surfaces):
        tokens.append(Token(surface=surface, position=position, char_span=(offset, offset + len(surface))))
        offset += len(surface) + 1
    return tokens


def make_verse(surfaces: Sequence[str], book: str = "Genesis", chapter: int = 1, verse: int = 1) -> Verse:
    return Verse(
        id=VerseId(book=book, chapter=chapter, verse=verse),
        tokens=make_tokens(surfaces),
        raw=" ".join(surfaces),
    )


class TargetBuilder:
    """Assembles a target text word by word and records its ground truth."""

    def __init__(self, doc: str = "midrash"):
        self.doc = doc
        self.words: List[str] = []
        self.gt: List[Dict] = []
        self._commentary_code = 0

    def commentary(self, count: int) -> "TargetBuilder":
        for _ in range(count):
            self.words.append(code_word(self._commentary_code, COMMENTARY_LETTERS))
            self._commentary_code += 1
        return self

    def quote(self, k: int, b_start: int, size: int, style: Optional[str] = "simple") -> "TargetBuilder":
        s_start = len(self.words)
        self.words.extend(verse_words(k)[b_start:b_start + size])
        if style is not None:
            self.gt.append({
                "doc": self.doc,
                "s_start": s_start,
                "s_size": size,
                "b_verse": str(verse_id(k)),
                "b_start": b_start,
                "b_size": size,
                "style": style,
            })
        return self

    def pad_to(self, length: int) -> "TargetBuilder":
        assert len(self.words) <= length, f"target already has {len(self.words)} words"
        return self.commentary(length - len(self.words))

    def text(self) -> str:
        return " ".join(self.words)


def planted_midrash() -> TargetBuilder:
    """500 words with 20 planted quotations.

    Twelve simple quotations (one of them inside a gap of the wave, which
    makes that wave a compound), one wave of four two-word fragments and two
    echoes (a four-word head followed by a two-word re-quote). Every
    quotation uses its own verse.
    """
    sizes = [3, 4, 5]
    target = TargetBuilder()
    target.commentary(5)
    for n, k in enumerate([0, 1, 2]):
        target.quote(k, 0, sizes[n % 3]).commentary(20)

    # wave on verse 3 with a simple quotation of verse 4 in its second gap
    target.quote(3, 0, 2, "compound").commentary(6)
    target.quote(3, 2, 2, "compound").commentary(3)
    target.quote(4, 1, 3).commentary(3)
    target.quote(3, 4, 2, "compound").commentary(6)
    target.quote(3, 6, 2, "compound").commentary(20)

    target.quote(5, 0, 4, "echo").commentary(10).quote(5, 0, 2, "echo").commentary(20)

    for n, k in enumerate(range(6, 14)):
        target.quote(k, 2, sizes[n % 3]).commentary(20)

    target.quote(14, 1, 4, "echo").commentary(10).quote(14, 1, 2, "echo")
    return target.pad_to(500)
