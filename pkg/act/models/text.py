import hashlib
import json
from typing import Dict, FrozenSet, List, Optional, Tuple

from pydantic import BaseModel, Field, field_serializer, field_validator, model_validator


# Hebrew accents and points; letters, maqaf, paseq and sof pasuq in this range
# are not combining marks and survive the filter.
HEBREW_POINTS_RANGE = (0x0591, 0x05C7)

COMBINING_DIACRITIC_RANGES = [
    (0x0300, 0x036F),  # Combining Diacritical Marks
    (0x1AB0, 0x1AFF),  # ... Extended
    (0x1DC0, 0x1DFF),  # ... Supplement
    (0x20D0, 0x20FF),  # ... for Symbols
    (0xFE20, 0xFE2F),  # Combining Half Marks
]

VAV = "ו"
YOD = "י"

DEFAULT_SPECIAL_CHAR_MAP = {
    # double quotation marks and gershayim
    "“": '"',
    "”": '"',
    "„": '"',
    "‟": '"',
    "″": '"',
    "״": '"',
    # single quotation marks and geresh
    "‘": "'",
    "’": "'",
    "‚": "'",
    "‛": "'",
    "′": "'",
    "׳": "'",
    # Yiddish ligatures
    "װ": VAV + VAV,
    "ױ": VAV + YOD,
    "ײ": YOD + YOD,
    # stray symbols
    "%": "",
    "$": "",
    # directional marks and joiners
    "\u200d": "",
    "\u200e": "",
    "\u200f": "",
    "\u202a": "",
    "\u202b": "",
    "\u202c": "",
    "\u202d": "",
    "\u202e": "",
}


class NormalizationConfig(BaseModel):
    """Every orthographic rule applied to both the corpus and the target texts."""

    profile: str = Field("hebrew-default", description="Name of the profile these values came from")
    strip_diacritics: bool = True
    strip_matres: bool = True
    matres_letters: FrozenSet[str] = Field(default_factory=lambda: frozenset({VAV, YOD}))
    special_char_map: Dict[str, str] = Field(default_factory=lambda: dict(DEFAULT_SPECIAL_CHAR_MAP))
    diacritic_ranges: List[Tuple[int, int]] = Field(
        default_factory=lambda: [HEBREW_POINTS_RANGE] + list(COMBINING_DIACRITIC_RANGES)
    )

    class Config:
        frozen = True

    @field_validator("matres_letters")
    @classmethod
    def _single_characters(cls, value: FrozenSet[str]) -> FrozenSet[str]:
        if any(len(letter) != 1 for letter in value):
            raise ValueError("matres_letters must contain single characters")
        return value

    @field_validator("special_char_map")
    @classmethod
    def _idempotent_map(cls, value: Dict[str, str]) -> Dict[str, str]:
        for source, image in value.items():
            if len(source) != 1:
                raise ValueError(f"special_char_map key {source!r} must be a single character")
            for char in image:
                if char in value and value[char] != char:
                    raise ValueError(
                        f"special_char_map is not idempotent: {source!r} maps to {image!r}, "
                        f"which contains mapped character {char!r}"
                    )
        return value

    @field_validator("diacritic_ranges")
    @classmethod
    def _ordered_ranges(cls, value: List[Tuple[int, int]]) -> List[Tuple[int, int]]:
        for start, end in value:
            if start > end:
                raise ValueError(f"diacritic range {start:#x}-{end:#x} is reversed")
        return value

    @field_serializer("matres_letters")
    def _serialize_matres(self, value: FrozenSet[str]) -> List[str]:
        return sorted(value)

    @classmethod
    def from_profile(cls, name: str) -> "NormalizationConfig":
        if name == "hebrew-default":
            return cls()
        if name == "plain":
            return cls(profile="plain", strip_matres=False, matres_letters=frozenset())
        raise ValueError(f"Unknown normalization profile: {name}")

    def in_diacritic_range(self, codepoint: int) -> bool:
        return any(start <= codepoint <= end for start, end in self.diacritic_ranges)

    def digest(self) -> str:
        """Stable hash of the rule set; the profile name does not take part."""
        payload = self.model_dump(mode="json", exclude={"profile"})
        canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class RawText(BaseModel):
    content: str
    source_id: str = Field(..., min_length=1)
    # content[k] came from original[offsets[k]:ends[k]]; ends also cover removed marks
    offsets: Optional[List[int]] = None
    ends: Optional[List[int]] = None

    @model_validator(mode="after")
    def _offsets_cover_content(self) -> "RawText":
        for name in ("offsets", "ends"):
            values = getattr(self, name)
            if values is not None and len(values) != len(self.content):
                raise ValueError(f"{name} must have one entry per character of content")
        return self

    def source_offsets(self) -> List[int]:
        if self.offsets is None:
            return list(range(len(self.content)))
        return self.offsets

    def source_ends(self) -> List[int]:
        if self.ends is None:
            return [offset + 1 for offset in self.source_offsets()]
        return self.ends


class Token(BaseModel):
    surface: str = Field(..., min_length=1)
    position: int = Field(..., ge=0)
    char_span: Tuple[int, int]

    class Config:
        frozen = True

    @field_validator("char_span")
    @classmethod
    def _non_empty_span(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        start, end = value
        if start < 0 or end <= start:
            raise ValueError(f"invalid char_span {value}")
        return value
