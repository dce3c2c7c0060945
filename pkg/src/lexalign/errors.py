"""Exception hierarchy.

DataError covers malformed or inconsistent input files (CLI exit code 2);
ComputeError covers failures inside metric or statistic computation
(CLI exit code 3).
"""


class LexalignError(Exception):
    pass


class DataError(LexalignError):
    pass


class ComputeError(LexalignError):
    pass


# --- lexicon ---

class MalformedRow(DataError):
    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


class DuplicateLexicalization(DataError):
    pass


class UnknownDomain(DataError):
    pass


class UnknownWord(ComputeError):
    pass


# --- embeddings ---

class DimensionMismatch(ComputeError):
    pass


class ZeroNorm(ComputeError):
    pass


class BadHeader(DataError):
    pass


class BadMagic(DataError):
    pass


class UnknownQuery(ComputeError):
    pass


class EmptyCandidateSet(ComputeError):
    pass


class EmptyCloud(ComputeError):
    pass


# --- statistics ---

class LengthMismatch(ComputeError):
    pass


class ConstantInput(ComputeError):
    """Correlation undefined: an input has zero variance (not coerced to 0)."""


class InsufficientSamples(ComputeError):
    pass


class RankDeficient(ComputeError):
    pass


class RankDeficientCovariates(RankDeficient):
    pass


# --- metrics ---

class ConceptNotLexicalized(ComputeError):
    pass


class ConceptNotEmbedded(ComputeError):
    pass


class TooFewSurvivors(ComputeError):
    pass


# --- validation ---

class TooFewDomains(ComputeError):
    pass


class GapOutsideSubdomain(DataError):
    pass


class UnknownLanguage(ComputeError):
    pass


class EmptySubdomain(ComputeError):
    pass


class InsufficientPairs(ComputeError):
    pass


# --- analysis ---

class EmptyTable(ComputeError):
    pass


class NoCommonKeys(ComputeError):
    pass


class InsufficientOverlap(ComputeError):
    pass


class InvalidCoordinate(DataError):
    pass


class NoComparableTraits(ComputeError):
    pass


class CloudTooSmall(ComputeError):
    pass
