import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings

from act.exceptions import ConfigError, InputNotFoundError
from act.models.alignment import AlignmentParams
from act.models.candidate import DetectionParams
from act.models.corpus import CanonicalOrder
from act.models.evaluation import MatchPolicy
from act.models.quotation import InferenceParams
from act.models.text import NormalizationConfig

# Pipeline presets. act-qe runs all three stages; act-2 and act-3 stop after
# alignment and emit every aligned candidate as a simple quotation.
PIPELINE_PROFILES: Dict[str, Dict[str, Any]] = {
    "act-qe": {"detection": {"ngram_size": 1}, "inference": {"enrichment": True}},
    "act-2": {"detection": {"ngram_size": 2}, "inference": {"enrichment": False}},
    "act-3": {"detection": {"ngram_size": 3}, "inference": {"enrichment": False}},
}


class Settings(BaseSettings):
    # Pipeline preset, see PIPELINE_PROFILES
    profile: Literal["act-qe", "act-2", "act-3"] = "act-qe"

    # Orthographic rules; filled from normalization_profile when not given
    normalization_profile: Literal["hebrew-default", "plain"] = "hebrew-default"
    normalization: Optional[NormalizationConfig] = None

    alignment: AlignmentParams = Field(default_factory=AlignmentParams)
    detection: DetectionParams = Field(default_factory=DetectionParams)
    inference: InferenceParams = Field(default_factory=InferenceParams)
    matching: MatchPolicy = Field(default_factory=MatchPolicy)

    book_order: Optional[List[str]] = None
    jobs: int = Field(1, ge=1)
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "WARNING"

    class Config:
        env_file = ".env"
        env_prefix = "ACT_"
        env_nested_delimiter = "__"
        case_sensitive = False

    @model_validator(mode="after")
    def _resolve_normalization(self) -> "Settings":
        if self.normalization is None:
            self.normalization = NormalizationConfig.from_profile(self.normalization_profile)
        # the plain profile has no proclitics to strip unless asked for
        if self.normalization_profile == "plain" and "prefix_letters" not in self.alignment.model_fields_set:
            self.alignment = self.alignment.model_copy(update={"prefix_letters": frozenset()})
        return self

    def canonical_order(self) -> CanonicalOrder:
        return CanonicalOrder(self.book_order)


def _deep_merge(*layers: Dict[str, Any]) -> Dict[str, Any]:
    """Merge nested dicts; later layers win."""
    merged: Dict[str, Any] = {}
    for layer in layers:
        for key, value in layer.items():
            if isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key] = _deep_merge(merged[key], value)
            else:
                merged[key] = value
    return merged


def read_config_file(path: Optional[Path]) -> Dict[str, Any]:
    if path is None:
        return {}
    source = Path(path)
    if not source.is_file():
        raise InputNotFoundError(source)
    try:
        values = json.loads(source.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {source} is not valid JSON: {e.msg} (line {e.lineno})")
    if not isinstance(values, dict):
        raise ConfigError(f"Config file {source} must contain a JSON object")
    return values


def load_settings(config_path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> Settings:
    """Resolve settings from defaults, environment, config file and flags.

    The pipeline profile preset sits just above the environment, so a config
    file or a flag (``--ngram``) still overrides what the profile picks.

    Raises:
        ConfigError: Any value fails validation.
    """
    file_values = read_config_file(config_path)
    flags = overrides or {}
    try:
        chosen = Settings(**_deep_merge(file_values, flags))
        preset = PIPELINE_PROFILES[chosen.profile]
        return Settings(**_deep_merge(preset, file_values, flags))
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}")
    except ValueError as e:
        raise ConfigError(f"Invalid configuration: {str(e)}")


class RunConfig(BaseModel):
    """Paths for one command plus the resolved settings.

    Input paths are checked on construction, before any work starts.
    """

    corpus: Optional[Path] = None
    index: Optional[Path] = None
    target: Optional[Path] = None
    gt: Optional[Path] = None
    detected: Optional[Path] = None
    output: Optional[Path] = None
    index_is_output: bool = False
    settings: Settings = Field(default_factory=Settings)

    @model_validator(mode="after")
    def _inputs_exist(self) -> "RunConfig":
        inputs = [self.corpus, self.target, self.gt, self.detected]
        if not self.index_is_output:
            inputs.append(self.index)
        for path in inputs:
            if path is not None and not path.is_file():
                raise InputNotFoundError(path)
        return self
