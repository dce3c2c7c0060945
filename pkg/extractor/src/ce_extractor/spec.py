"""Extraction job description and validation."""

from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidSpec

MODES = ("ave", "cloud")


@dataclass(frozen=True)
class ExtractionSpec:
    """One extraction job: which model, which forms, which output flavor.

    ``ave`` runs the encoder on each bare form and averages subword
    representations within each layer, then across ``ave_layers``
    (inclusive 1-based bounds). ``cloud`` collects up to
    ``max_sentences_per_word`` corpus sentences per form and keeps the
    subword-averaged representation from ``cloud_layer`` for every
    occurrence.
    """

    model: str
    language: str
    forms: tuple[str, ...]
    corpus: Path | None = None
    mode: str = "ave"
    max_sentences_per_word: int = 1000
    cloud_layer: int = 12
    ave_layers: tuple[int, int] = (1, 12)
    lowercase: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise InvalidSpec(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.max_sentences_per_word < 1:
            raise InvalidSpec("max_sentences_per_word must be >= 1")
        if self.mode == "cloud":
            if self.corpus is None:
                raise InvalidSpec("cloud mode requires a corpus path")
            if self.cloud_layer < 1:
                raise InvalidSpec("cloud_layer must be >= 1")
        else:
            lo, hi = self.ave_layers
            if not (1 <= lo <= hi):
                raise InvalidSpec(f"ave_layers must satisfy 1 <= lo <= hi, got {self.ave_layers}")
        object.__setattr__(self, "forms", tuple(self.forms))
        if self.corpus is not None:
            object.__setattr__(self, "corpus", Path(self.corpus))


@dataclass
class ExtractionReport:
    """What an extraction run produced and what it had to skip."""

    output: Path
    manifest: Path
    counts: dict[str, int] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)
