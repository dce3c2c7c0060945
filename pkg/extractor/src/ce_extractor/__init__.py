"""Contextual-embedding extraction into vec-text and PCLD files."""

from .errors import CorpusUnreadable, ExtractorError, InvalidSpec, ModelLoadFailure
from .extraction import Encoder, extract_ave, extract_cloud, write_clouds_pcld
from .spec import ExtractionReport, ExtractionSpec

__all__ = [
    "CorpusUnreadable",
    "Encoder",
    "ExtractionReport",
    "ExtractionSpec",
    "ExtractorError",
    "InvalidSpec",
    "ModelLoadFailure",
    "extract_ave",
    "extract_cloud",
    "write_clouds_pcld",
]
