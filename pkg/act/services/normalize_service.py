import logging
import unicodedata
from typing import List, Optional

from act.models.text import NormalizationConfig, RawText, Token

logger = logging.getLogger(__name__)

_DEFAULT_CONFIG = NormalizationConfig()


def is_separator(char: str) -> bool:
    """Whitespace and every Unicode punctuation class (maqaf is Pd)."""
    return char.isspace() or unicodedata.category(char).startswith("P")


def strip_diacritics(text: RawText, config: Optional[NormalizationConfig] = None) -> RawText:
    """Remove combining marks inside the configured ranges.

    Each character is canonically decomposed first so that precomposed forms
    (Hebrew presentation forms, accented Latin letters) lose their marks too.
    The offset of every surviving character points at the original character
    it came from, and its end reaches past the marks removed after it.
    """
    config = config or _DEFAULT_CONFIG
    chars: List[str] = []
    offsets: List[int] = []
    ends: List[int] = []
    for char, origin, end in zip(text.content, text.source_offsets(), text.source_ends()):
        for piece in unicodedata.normalize("NFD", char):
            if unicodedata.category(piece) == "Mn" and config.in_diacritic_range(ord(piece)):
                if ends:
                    ends[-1] = max(ends[-1], end)
                continue
            chars.append(piece)
            offsets.append(origin)
            ends.append(end)
    return RawText(content="".join(chars), source_id=text.source_id, offsets=offsets, ends=ends)


def normalize_special_chars(text: RawText, config: Optional[NormalizationConfig] = None) -> RawText:
    """Map special characters to their replacements."""
    config = config or _DEFAULT_CONFIG
    mapping = config.special_char_map
    chars: List[str] = []
    offsets: List[int] = []
    ends: List[int] = []
    for char, origin, end in zip(text.content, text.source_offsets(), text.source_ends()):
        image = mapping.get(char, char)
        chars.append(image)
        offsets.extend([origin] * len(image))
        ends.extend([end] * len(image))
    return RawText(content="".join(chars), source_id=text.source_id, offsets=offsets, ends=ends)


def strip_matres(token_surface: str, config: Optional[NormalizationConfig] = None) -> str:
    """Drop word-medial matres letters; the first and last letter always stay."""
    config = config or _DEFAULT_CONFIG
    if not config.strip_matres or len(token_surface) < 3:
        return token_surface
    middle = "".join(char for char in token_surface[1:-1] if char not in config.matres_letters)
    stripped = token_surface[0] + middle + token_surface[-1]
    return stripped or token_surface


def tokenize(text: RawText) -> List[Token]:
    """Split on separators; spans cover the original characters of each token."""
    tokens: List[Token] = []
    offsets = text.source_offsets()
    ends = text.source_ends()
    run_start: Optional[int] = None
    for k, char in enumerate(text.content + " "):
        if k < len(text.content) and not is_separator(char):
            if run_start is None:
                run_start = k
            continue
        if run_start is not None:
            tokens.append(
                Token(
                    surface=text.content[run_start:k],
                    position=len(tokens),
                    char_span=(offsets[run_start], ends[k - 1]),
                )
            )
            run_start = None
    return tokens


class NormalizeService:
    """Runs the full normalization pipeline with one fixed configuration.

    The same instance (or an instance built from an equal configuration) must
    be used for the reference corpus and for every target text.
    """

    def __init__(self, config: Optional[NormalizationConfig] = None):
        self.config = config or NormalizationConfig()

    def normalize(self, text: RawText) -> List[Token]:
        """Diacritics, special characters, tokenization, then matres per token."""
        if self.config.strip_diacritics:
            text = strip_diacritics(text, self.config)
        text = normalize_special_chars(text, self.config)
        tokens = tokenize(text)
        if not self.config.strip_matres:
            return tokens
        return [
            token.model_copy(update={"surface": strip_matres(token.surface, self.config)})
            for token in tokens
        ]

    def normalize_content(self, content: str, source_id: str = "inline") -> List[Token]:
        return self.normalize(RawText(content=content, source_id=source_id))

    def normalize_string(self, content: str) -> str:
        """Normalized surfaces joined by single spaces."""
        return " ".join(token.surface for token in self.normalize_content(content))
