"""Error hierarchy for the extractor."""


class ExtractorError(Exception):
    """Base class for all extractor failures."""


class InvalidSpec(ExtractorError):
    """The extraction spec violates one of its invariants."""


class ModelLoadFailure(ExtractorError):
    """The model identifier could not be resolved to a usable encoder."""


class CorpusUnreadable(ExtractorError):
    """The sentence corpus could not be opened or decoded."""
