"""Shared builders for synthetic lexicons and vector spaces."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from lexalign.embeddings import PointCloud, PointCloudStore, VectorSpace, write_clouds_pcld
from lexalign.lexicon import Concept, ConceptLexicon, SemanticDomain


def make_lexicon(concept_form: dict[str, dict[str, str]],
                 domains: dict[str, str] | None = None) -> ConceptLexicon:
    """concept_form: language -> {concept_id: form}. Default: one domain d0."""
    all_concepts = sorted({c for forms in concept_form.values() for c in forms})
    domains = domains or {c: "d0" for c in all_concepts}
    concepts = {c: Concept(c, c, domains[c]) for c in all_concepts}
    counts: dict[str, int] = {}
    for c in all_concepts:
        counts[domains[c]] = counts.get(domains[c], 0) + 1
    domain_objs = {d: SemanticDomain(d, d, n) for d, n in counts.items()}
    return ConceptLexicon(concepts, domain_objs, concept_form)


def random_entries(rng: np.random.Generator, forms: list[str], dim: int) -> dict:
    """Gaussian vectors; norms are non-zero with probability one."""
    return {f: rng.standard_normal(dim) for f in forms}


def identity_setup(n: int, dim: int, seed: int, langs=("L1", "L2"),
                   domains_per: int = 1, shared_vectors: bool = True):
    """Two languages lexicalizing the same concepts with the same forms.

    With shared_vectors both spaces hold identical vectors, so pairing a space
    against itself is an identity comparison.
    """
    rng = np.random.default_rng(seed)
    forms = [f"w{i:04d}" for i in range(n)]
    concepts = [f"c{i:04d}" for i in range(n)]
    concept_form = {lang: dict(zip(concepts, forms)) for lang in langs}
    domain_of = {c: f"d{i % domains_per}" for i, c in enumerate(concepts)}
    lexicon = make_lexicon(concept_form, domain_of)
    entries = random_entries(rng, forms, dim)
    spaces = {}
    for lang in langs:
        lang_entries = entries if shared_vectors \
            else random_entries(rng, forms, dim)
        spaces[lang] = VectorSpace(lang, dim, dict(lang_entries))
    return lexicon, spaces, concept_form


def singleton_store(space: VectorSpace) -> PointCloudStore:
    clouds = {f: PointCloud(f, space.vector(f)[None, :]) for f in space.forms}
    return PointCloudStore(space.language, space.dim, clouds)


def write_vec_text(path: Path, entries: dict[str, np.ndarray], dim: int) -> None:
    lines = [f"{len(entries)} {dim}"]
    for form in sorted(entries):
        values = " ".join(repr(float(x)) for x in entries[form])
        lines.append(f"{form} {values}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_lexicon_tsv(path: Path, rows: list[tuple[str, str, str, str]]) -> None:
    lines = ["concept_id\tdomain_id\tlanguage\tform"]
    lines += ["\t".join(row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
