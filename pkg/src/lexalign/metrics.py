"""Alignment metrics: neighbors overlap (NO) and semantic neighborhood
comparison (SNC) in its static, layer-averaged, and point-cloud variants.

All variants share one procedure: find a word's k nearest neighbors in the
source space (restricted to the lexicon), translate them through the concept
space, and compare the resulting similarity profiles on the target side.
Untranslatable neighbors and neighbors missing from the target space are
dropped from both profiles, never imputed.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import stats
from .embeddings import PointCloudStore, VectorSpace, match_vocabulary
from .errors import (
    ComputeError,
    ConceptNotEmbedded,
    ConceptNotLexicalized,
    ConstantInput,
    EmptyCandidateSet,
    InsufficientSamples,
    TooFewSurvivors,
)
from .lexicon import ConceptLexicon, back_translate_to_concepts, translate

METRICS = ("NO", "SNC-static", "SNC-ave", "SNC-cloud")

# reason codes for table gaps
REASON_NOT_LEXICALIZED = "not-lexicalized"
REASON_NOT_EMBEDDED = "not-embedded"
REASON_TOO_FEW_SURVIVORS = "too-few-survivors"
REASON_CONSTANT_SIMILARITIES = "constant-similarities"
REASON_NO_CANDIDATES = "no-candidates"


@dataclass(frozen=True)
class MetricConfig:
    k: int = 100
    min_survivors: int = 10
    correlation: str = "pearson"
    cloud_aggregation: str = "min"
    lowercase_fallback: bool = True


@dataclass(frozen=True)
class AlignmentScore:
    concept_id: str
    language_pair: tuple[str, str]
    metric: str
    value: float
    direction: str  # forward | backward | bidirectional
    surviving_neighbors: tuple[int, int]


@dataclass
class NeighborRecord:
    """One source-space neighbor and what happened to it."""
    form: str
    similarity: float
    translation: str | None
    target_similarity: float | None
    status: str  # translated | untranslatable | not-embedded


@dataclass
class DirectionalProfile:
    """Surviving similarity profiles for one direction of one concept."""
    concept_id: str
    source_language: str
    target_language: str
    source_sims: np.ndarray
    target_sims: np.ndarray
    records: list[NeighborRecord]

    @property
    def survivors(self) -> int:
        return int(self.source_sims.size)


class LanguageContext:
    """Lexicon forms of one language matched against its embedding vocabulary."""

    def __init__(self, language: str, source, lexicon: ConceptLexicon,
                 lowercase_fallback: bool = True,
                 concept_subset: set[str] | None = None):
        self.language = language
        self.source = source
        forms = lexicon.forms(language)
        if concept_subset is not None:
            keep = {lexicon.form(c, language) for c in concept_subset}
            forms = [f for f in forms if f in keep]
        self.to_space = match_vocabulary(source, forms, lowercase_fallback)
        # space key -> lexicon form; smallest lexicon form wins on collision
        self.to_lexicon: dict[str, str] = {}
        for lex_form in sorted(self.to_space):
            self.to_lexicon.setdefault(self.to_space[lex_form], lex_form)
        self.restriction = set(self.to_lexicon)


def directional_profile(concept_id: str, source_ctx: LanguageContext,
                        target_ctx: LanguageContext, lexicon: ConceptLexicon,
                        k: int) -> DirectionalProfile:
    src_lang, tgt_lang = source_ctx.language, target_ctx.language
    w_src = lexicon.form(concept_id, src_lang)
    w_tgt = lexicon.form(concept_id, tgt_lang)
    if w_src is None or w_tgt is None:
        raise ConceptNotLexicalized(f"{concept_id} in ({src_lang}, {tgt_lang})")
    if w_src not in source_ctx.to_space or w_tgt not in target_ctx.to_space:
        raise ConceptNotEmbedded(f"{concept_id} in ({src_lang}, {tgt_lang})")
    src_key = source_ctx.to_space[w_src]
    tgt_key = target_ctx.to_space[w_tgt]

    neighbor_list = source_ctx.source.knn(src_key, k, source_ctx.restriction)
    records: list[NeighborRecord] = []
    source_sims: list[float] = []
    target_sims: list[float] = []
    for space_form, sim in neighbor_list.neighbors:
        lex_form = source_ctx.to_lexicon[space_form]
        translated = translate(lex_form, src_lang, tgt_lang, lexicon)
        if translated.form is None:
            records.append(NeighborRecord(lex_form, sim, None, None, "untranslatable"))
            continue
        tgt_neighbor_key = target_ctx.to_space.get(translated.form)
        if tgt_neighbor_key is None:
            records.append(NeighborRecord(lex_form, sim, translated.form, None, "not-embedded"))
            continue
        tsim = target_ctx.source.similarity(tgt_key, tgt_neighbor_key)
        records.append(NeighborRecord(lex_form, sim, translated.form, tsim, "translated"))
        source_sims.append(sim)
        target_sims.append(tsim)
    return DirectionalProfile(
        concept_id, src_lang, tgt_lang,
        np.array(source_sims, dtype=np.float64),
        np.array(target_sims, dtype=np.float64),
        records)


def _profile_score(profile: DirectionalProfile, config: MetricConfig,
                   metric: str) -> AlignmentScore:
    if profile.survivors < config.min_survivors:
        raise TooFewSurvivors(
            f"{profile.concept_id} {profile.source_language}->{profile.target_language}: "
            f"{profile.survivors} < {config.min_survivors}")
    correlate = stats.CORRELATIONS[config.correlation]
    value = correlate(profile.source_sims, profile.target_sims)
    pair = tuple(sorted((profile.source_language, profile.target_language)))
    direction = "forward" if pair[0] == profile.source_language else "backward"
    return AlignmentScore(profile.concept_id, pair, metric, value, direction,
                          (profile.survivors, profile.survivors))


def snc_unidirectional(concept_id: str, source_ctx: LanguageContext,
                       target_ctx: LanguageContext, lexicon: ConceptLexicon,
                       config: MetricConfig = MetricConfig(),
                       metric: str = "SNC-static") -> AlignmentScore:
    profile = directional_profile(concept_id, source_ctx, target_ctx, lexicon, config.k)
    return _profile_score(profile, config, metric)


def snc_bidirectional(concept_id: str, ctx_a: LanguageContext, ctx_b: LanguageContext,
                      lexicon: ConceptLexicon, config: MetricConfig = MetricConfig(),
                      metric: str = "SNC-static") -> AlignmentScore:
    """Arithmetic mean of the two directional scores."""
    forward = snc_unidirectional(concept_id, ctx_a, ctx_b, lexicon, config, metric)
    backward = snc_unidirectional(concept_id, ctx_b, ctx_a, lexicon, config, metric)
    pair = tuple(sorted((ctx_a.language, ctx_b.language)))
    fwd, bwd = ((forward, backward) if forward.direction == "forward"
                else (backward, forward))
    value = (forward.value + backward.value) / 2.0
    return AlignmentScore(concept_id, pair, metric, value, "bidirectional",
                          (fwd.surviving_neighbors[0], bwd.surviving_neighbors[0]))


def neighbors_overlap(concept_id: str, ctx_a: LanguageContext, ctx_b: LanguageContext,
                      lexicon: ConceptLexicon,
                      config: MetricConfig = MetricConfig()) -> AlignmentScore:
    """Fraction of k nearest neighbors shared after back-translation to concepts.

    The denominator is the larger of the two back-translated concept-set
    sizes, so the value stays in [0, 1] under neighbor shortfall and
    colexification alike.
    """
    concept_sides = []
    survivor_counts = []
    for ctx in (ctx_a, ctx_b):
        w = lexicon.form(concept_id, ctx.language)
        if w is None:
            raise ConceptNotLexicalized(f"{concept_id} in {ctx.language}")
        if w not in ctx.to_space:
            raise ConceptNotEmbedded(f"{concept_id} in {ctx.language}")
        neighbor_list = ctx.source.knn(ctx.to_space[w], config.k, ctx.restriction)
        lex_forms = [ctx.to_lexicon[f] for f in neighbor_list.forms]
        concepts = back_translate_to_concepts(lex_forms, ctx.language, lexicon)
        concept_sides.append(concepts)
        survivor_counts.append(len(lex_forms))
    denominator = max(len(concept_sides[0]), len(concept_sides[1]))
    if denominator == 0:
        raise EmptyCandidateSet(f"no neighbors for {concept_id}")
    value = len(concept_sides[0] & concept_sides[1]) / denominator
    pair = tuple(sorted((ctx_a.language, ctx_b.language)))
    return AlignmentScore(concept_id, pair, "NO", value, "bidirectional",
                          (survivor_counts[0], survivor_counts[1]))


class AlignmentTable:
    """Bidirectional scores indexed by (metric, language pair, concept).

    Failed cells are recorded as reason-coded gaps, never as zeros.
    """

    def __init__(self, k: int, provenance: dict | None = None):
        self.k = k
        self.provenance = provenance or {}
        self.scores: dict[tuple[str, tuple[str, str], str], AlignmentScore] = {}
        self.gaps: dict[tuple[str, tuple[str, str], str], str] = {}

    def add(self, score: AlignmentScore) -> None:
        key = (score.metric, score.language_pair, score.concept_id)
        if key in self.scores:
            raise ValueError(f"duplicate score for {key}")
        self.scores[key] = score

    def add_gap(self, metric: str, pair: tuple[str, str], concept_id: str,
                reason: str) -> None:
        self.gaps[(metric, pair, concept_id)] = reason

    @property
    def metrics(self) -> list[str]:
        return sorted({m for m, _, _ in self.scores})

    @property
    def pairs(self) -> list[tuple[str, str]]:
        return sorted({p for _, p, _ in self.scores})

    def get(self, metric: str, pair: tuple[str, str], concept_id: str) -> AlignmentScore | None:
        return self.scores.get((metric, tuple(sorted(pair)), concept_id))

    def scores_for(self, metric: str, pair: tuple[str, str] | None = None) -> list[AlignmentScore]:
        pair = tuple(sorted(pair)) if pair else None
        return [s for (m, p, _), s in sorted(self.scores.items())
                if m == metric and (pair is None or p == pair)]

    def rows(self) -> list[dict]:
        """Stable row order: score rows then gap rows, each key-sorted."""
        out = []
        for key in sorted(self.scores):
            s = self.scores[key]
            out.append({
                "metric": s.metric, "lang_a": s.language_pair[0],
                "lang_b": s.language_pair[1], "concept_id": s.concept_id,
                "value": s.value, "survivors_fwd": s.surviving_neighbors[0],
                "survivors_bwd": s.surviving_neighbors[1], "reason": "",
            })
        for (metric, pair, concept_id) in sorted(self.gaps):
            out.append({
                "metric": metric, "lang_a": pair[0], "lang_b": pair[1],
                "concept_id": concept_id, "value": "", "survivors_fwd": "",
                "survivors_bwd": "", "reason": self.gaps[(metric, pair, concept_id)],
            })
        return out


def build_contexts(lexicon: ConceptLexicon, sources: dict, languages: list[str],
                   config: MetricConfig,
                   concept_subset: set[str] | None = None) -> dict[str, LanguageContext]:
    return {
        lang: LanguageContext(lang, sources[lang], lexicon,
                              config.lowercase_fallback, concept_subset)
        for lang in languages
    }


def _score_cell(metric: str, concept_id: str, ctx_a: LanguageContext,
                ctx_b: LanguageContext, lexicon: ConceptLexicon,
                config: MetricConfig):
    try:
        if metric == "NO":
            return neighbors_overlap(concept_id, ctx_a, ctx_b, lexicon, config)
        return snc_bidirectional(concept_id, ctx_a, ctx_b, lexicon, config, metric)
    except ConceptNotLexicalized:
        return REASON_NOT_LEXICALIZED
    except ConceptNotEmbedded:
        return REASON_NOT_EMBEDDED
    except (TooFewSurvivors, InsufficientSamples):
        return REASON_TOO_FEW_SURVIVORS
    except ConstantInput:
        return REASON_CONSTANT_SIMILARITIES
    except EmptyCandidateSet:
        return REASON_NO_CANDIDATES


def compute_table(metric: str, lexicon: ConceptLexicon, sources: dict,
                  language_set: list[str], config: MetricConfig = MetricConfig(),
                  concept_subset: set[str] | None = None, jobs: int = 1,
                  provenance: dict | None = None,
                  table: AlignmentTable | None = None) -> AlignmentTable:
    """One bidirectional score per (concept, unordered language pair).

    Failures become reason-coded gaps; nothing is fatal per cell.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric: {metric}")
    languages = sorted(language_set)
    contexts = build_contexts(lexicon, sources, languages, config, concept_subset)
    concepts = sorted(concept_subset) if concept_subset is not None \
        else sorted(lexicon.concepts)
    if table is None:
        table = AlignmentTable(config.k, provenance)

    cells = [(pair_a, pair_b, concept_id)
             for i, pair_a in enumerate(languages)
             for pair_b in languages[i + 1:]
             for concept_id in concepts]

    def run(cell):
        lang_a, lang_b, concept_id = cell
        return cell, _score_cell(metric, concept_id, contexts[lang_a],
                                 contexts[lang_b], lexicon, config)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(cell) for cell in cells]

    for (lang_a, lang_b, concept_id), outcome in results:
        if isinstance(outcome, AlignmentScore):
            table.add(outcome)
        else:
            table.add_gap(metric, (lang_a, lang_b), concept_id, outcome)
    return table


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
