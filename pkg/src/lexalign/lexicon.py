"""Concept lexicon: concepts, semantic domains, per-language word forms.

The lexicon resolves translation pairs: two forms in two languages are
translations when they lexicalize the same concept. One form may lexicalize
several concepts within a language (colexification), so form -> concept is
one-to-many while (concept, language) -> form is at most one.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DuplicateLexicalization,
    MalformedRow,
    UnknownDomain,
    UnknownWord,
)

LEXICON_COLUMNS = ("concept_id", "domain_id", "language", "form")


@dataclass(frozen=True)
class Concept:
    id: str
    gloss: str
    domain_id: str


@dataclass(frozen=True)
class SemanticDomain:
    id: str
    name: str
    concept_count: int = 0


@dataclass(frozen=True)
class Translation:
    """Result of resolving a form into a target language.

    ``form`` is None when none of the word's concepts is lexicalized in the
    target language. ``ambiguity_count`` is the number of distinct target
    forms the word's concepts map to; > 1 flags a colexification that had to
    be tie-broken.
    """
    form: str | None
    concept_id: str | None
    ambiguity_count: int


class ConceptLexicon:
    """Immutable after construction; safe for concurrent reads."""

    def __init__(self, concepts: dict[str, Concept], domains: dict[str, SemanticDomain],
                 forms_by_concept: dict[str, dict[str, str]]):
        self.concepts = concepts
        self.domains = domains
        # language -> concept_id -> form
        self._concept_form: dict[str, dict[str, str]] = {}
        # language -> form -> set of concept_ids (exact inverse of the above)
        self._form_concepts: dict[str, dict[str, set[str]]] = {}
        for language, by_concept in forms_by_concept.items():
            cf = self._concept_form.setdefault(language, {})
            fc = self._form_concepts.setdefault(language, {})
            for concept_id, form in by_concept.items():
                cf[concept_id] = form
                fc.setdefault(form, set()).add(concept_id)

    @property
    def languages(self) -> list[str]:
        return sorted(self._concept_form)

    def form(self, concept_id: str, language: str) -> str | None:
        return self._concept_form.get(language, {}).get(concept_id)

    def forms(self, language: str) -> list[str]:
        """All distinct forms of a language, sorted."""
        return sorted(self._form_concepts.get(language, ()))

    def concepts_of_form(self, form: str, language: str) -> set[str]:
        concepts = self._form_concepts.get(language, {}).get(form)
        if concepts is None:
            raise UnknownWord(f"{form!r} not in {language} lexicon")
        return set(concepts)

    def concepts_in_domain(self, domain_id: str) -> list[str]:
        return sorted(c.id for c in self.concepts.values() if c.domain_id == domain_id)

    def lexicalized_concepts(self, language: str) -> list[str]:
        return sorted(self._concept_form.get(language, ()))


def load_lexicon(path: str | Path, format: str = "tsv") -> ConceptLexicon:
    """Load a lexicon from a TSV with header concept_id/domain_id/language/form.

    Forms are NFC-normalized. Duplicate (concept, language) rows and empty
    fields are rejected with the offending line number.
    """
    if format != "tsv":
        raise ValueError(f"unsupported lexicon format: {format}")
    path = Path(path)
    concepts: dict[str, Concept] = {}
    domain_counts: dict[str, int] = {}
    forms_by_concept: dict[str, dict[str, str]] = {}

    with path.open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != LEXICON_COLUMNS:
            raise MalformedRow(path, 1, f"expected header {LEXICON_COLUMNS}, got {header}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise MalformedRow(path, line_no, f"expected 4 columns, got {len(fields)}")
            concept_id, domain_id, language, form = fields
            if not concept_id or not domain_id or not language or not form:
                raise MalformedRow(path, line_no, "empty field")
            form = unicodedata.normalize("NFC", form)
            existing = concepts.get(concept_id)
            if existing is None:
                concepts[concept_id] = Concept(concept_id, concept_id, domain_id)
                domain_counts[domain_id] = domain_counts.get(domain_id, 0) + 1
            elif existing.domain_id != domain_id:
                raise UnknownDomain(
                    f"{path}:{line_no}: concept {concept_id!r} assigned to both "
                    f"{existing.domain_id!r} and {domain_id!r}")
            by_concept = forms_by_concept.setdefault(language, {})
            if concept_id in by_concept:
                raise DuplicateLexicalization(
                    f"{path}:{line_no}: duplicate ({concept_id}, {language})")
            by_concept[concept_id] = form

    domains = {d: SemanticDomain(d, d, n) for d, n in domain_counts.items()}
    return ConceptLexicon(concepts, domains, forms_by_concept)


def translate(word: str, source_language: str, target_language: str,
              lexicon: ConceptLexicon) -> Translation:
    """Resolve a source form to a target form through the concept space.

    When the word colexifies several concepts with distinct target forms, the
    concept with the lexicographically smallest id wins (deterministic
    tie-break) and the ambiguity is surfaced in ``ambiguity_count``.
    """
    concept_ids = lexicon.concepts_of_form(word, source_language)
    candidates = []
    for concept_id in sorted(concept_ids):
        form = lexicon.form(concept_id, target_language)
        if form is not None:
            candidates.append((concept_id, form))
    if not candidates:
        return Translation(None, None, 0)
    distinct_forms = {form for _, form in candidates}
    concept_id, form = candidates[0]
    return Translation(form, concept_id, len(distinct_forms))


def back_translate_to_concepts(words: list[str], language: str,
                               lexicon: ConceptLexicon) -> set[str]:
    """Union of the concept sets of all given forms."""
    result: set[str] = set()
    for word in words:
        result |= lexicon.concepts_of_form(word, language)
    return result
