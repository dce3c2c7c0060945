"""Metric validations: shuffle baseline, domain-removal sensitivity, and the
kinship lexical-gap comparison.

All randomized procedures take a master seed and derive independent sub-seeds
per trial, so reports are reproducible and order-independent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import stats
from .errors import (
    ConstantInput,
    EmptySubdomain,
    GapOutsideSubdomain,
    InsufficientPairs,
    MalformedRow,
    TooFewDomains,
    UnknownLanguage,
)
from .lexicon import ConceptLexicon
from .metrics import (
    AlignmentTable,
    MetricConfig,
    build_contexts,
    compute_table,
    directional_profile,
)


@dataclass
class ValidationReport:
    kind: str  # shuffle | sensitivity | gap
    statistics: dict
    per_trial: list | None = None
    parameters: dict = field(default_factory=dict)

    def to_json(self, path: str | Path) -> None:
        payload = {
            "kind": self.kind,
            "parameters": self.parameters,
            "statistics": self.statistics,
            "per_trial": self.per_trial,
        }
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")


def shuffle_baseline(lexicon: ConceptLexicon, sources: dict, lang_pair: tuple[str, str],
                     concepts: list[str] | None = None,
                     config: MetricConfig = MetricConfig(),
                     permutations: int = 100, seed: int = 0,
                     permute=None) -> ValidationReport:
    """Permute translated-neighbor pairings and correlate shuffled vs original
    scores across concepts.

    The two directions are permuted independently. ``permute`` overrides the
    permutation source (rng, n) -> index array; the default draws uniform
    random permutations.
    """
    lang_a, lang_b = sorted(lang_pair)
    contexts = build_contexts(lexicon, sources, [lang_a, lang_b], config)
    if concepts is None:
        concepts = sorted(set(lexicon.lexicalized_concepts(lang_a))
                          & set(lexicon.lexicalized_concepts(lang_b)))
    if permute is None:
        permute = lambda rng, n: rng.permutation(n)

    profiles = []  # (concept, forward profile, backward profile)
    originals = []
    skipped = 0
    for concept_id in concepts:
        try:
            fwd = directional_profile(concept_id, contexts[lang_a], contexts[lang_b],
                                      lexicon, config.k)
            bwd = directional_profile(concept_id, contexts[lang_b], contexts[lang_a],
                                      lexicon, config.k)
            if min(fwd.survivors, bwd.survivors) < config.min_survivors:
                skipped += 1
                continue
            correlate = stats.CORRELATIONS[config.correlation]
            original = (correlate(fwd.source_sims, fwd.target_sims)
                        + correlate(bwd.source_sims, bwd.target_sims)) / 2.0
        except ConstantInput:
            skipped += 1
            continue
        profiles.append((concept_id, fwd, bwd))
        originals.append(original)
    originals = np.array(originals)

    rng = np.random.default_rng(seed)
    trial_seeds = rng.integers(0, 2**63 - 1, size=permutations)
    correlate = stats.CORRELATIONS[config.correlation]
    per_trial_r: list[float] = []
    shuffled_sums = np.zeros(len(profiles))
    trials_skipped = 0
    for trial_seed in trial_seeds:
        trial_rng = np.random.default_rng(int(trial_seed))
        shuffled = np.empty(len(profiles))
        for i, (_, fwd, bwd) in enumerate(profiles):
            p_fwd = permute(trial_rng, fwd.survivors)
            p_bwd = permute(trial_rng, bwd.survivors)
            a_fwd = correlate(fwd.source_sims, fwd.target_sims[p_fwd])
            a_bwd = correlate(bwd.source_sims, bwd.target_sims[p_bwd])
            shuffled[i] = (a_fwd + a_bwd) / 2.0
        shuffled_sums += shuffled
        try:
            per_trial_r.append(stats.pearson(originals, shuffled))
        except ConstantInput:
            trials_skipped += 1
    report = ValidationReport(
        kind="shuffle",
        statistics={
            "mean_r": float(np.mean(per_trial_r)) if per_trial_r else None,
            "trials": len(per_trial_r),
            "trials_skipped": trials_skipped,
            "concepts": len(profiles),
            "concepts_skipped": skipped,
            "per_concept_shuffled_mean": {
                concept_id: float(shuffled_sums[i] / max(1, permutations))
                for i, (concept_id, _, _) in enumerate(profiles)
            },
        },
        per_trial=per_trial_r,
        parameters={"languages": [lang_a, lang_b], "k": config.k,
                    "permutations": permutations, "seed": seed,
                    "correlation": config.correlation},
    )
    return report


def _domain_vector(scores: dict, lexicon: ConceptLexicon) -> dict:
    """(pair, domain) -> mean concept score."""
    sums: dict[tuple, list[float]] = {}
    for (pair, concept_id), value in scores.items():
        domain_id = lexicon.concepts[concept_id].domain_id
        sums.setdefault((pair, domain_id), []).append(value)
    return {key: float(np.mean(vals)) for key, vals in sums.items()}


def _pair_scores(metric: str, lexicon: ConceptLexicon, sources: dict,
                 languages: list[str], config: MetricConfig,
                 concept_subset: set[str]) -> dict:
    table = compute_table(metric, lexicon, sources, languages, config,
                          concept_subset=concept_subset)
    return {(s.language_pair, s.concept_id): s.value for s in table.scores.values()}


def sensitivity(lexicon: ConceptLexicon, sources: dict, language_set: list[str],
                metric: str = "SNC-static", j: int = 5, trials: int = 1000,
                seed: int = 0, config: MetricConfig = MetricConfig()) -> ValidationReport:
    """Remove j random domains from the neighbor-candidate restriction,
    recompute domain-aggregated alignment, and correlate against the baseline
    with the removed domains dropped from both sides.
    """
    domains = sorted(lexicon.domains)
    if len(domains) < j + 2:
        raise TooFewDomains(f"need at least {j + 2} domains, got {len(domains)}")
    all_concepts = set(lexicon.concepts)
    baseline = _domain_vector(
        _pair_scores(metric, lexicon, sources, language_set, config, all_concepts),
        lexicon)

    rng = np.random.default_rng(seed)
    trial_seeds = rng.integers(0, 2**63 - 1, size=trials)
    per_trial_r: list[float] = []
    trials_skipped = 0
    for trial_seed in trial_seeds:
        trial_rng = np.random.default_rng(int(trial_seed))
        removed = set(trial_rng.choice(domains, size=j, replace=False)) if j else set()
        allowed = {c for c in all_concepts
                   if lexicon.concepts[c].domain_id not in removed}
        trial_vector = _domain_vector(
            _pair_scores(metric, lexicon, sources, language_set, config, allowed),
            lexicon)
        keys = sorted(k for k in baseline if k[1] not in removed and k in trial_vector)
        before = np.array([baseline[k] for k in keys])
        after = np.array([trial_vector[k] for k in keys])
        try:
            per_trial_r.append(stats.pearson(before, after))
        except ConstantInput:
            trials_skipped += 1
    r = np.array(per_trial_r)
    return ValidationReport(
        kind="sensitivity",
        statistics={
            "mean_r": float(r.mean()) if r.size else None,
            "min_r": float(r.min()) if r.size else None,
            "max_r": float(r.max()) if r.size else None,
            "trials": len(per_trial_r),
            "trials_skipped": trials_skipped,
        },
        per_trial=per_trial_r,
        parameters={"metric": metric, "j": j, "trials": trials, "seed": seed,
                    "k": config.k, "languages": sorted(language_set)},
    )


@dataclass
class GapInventory:
    """Kinship interlingua subdomains and per-language gap patterns."""
    subdomains: dict[str, set[str]]               # subdomain -> concept ids
    patterns: dict[tuple[str, str], set[str]]     # (language, subdomain) -> gaps
    concept_map: dict[str, str]                   # lexicon concept -> subdomain
    languages: set[str]
    diagnostics: list[str] = field(default_factory=list)

    def filtered_concepts(self) -> set[str]:
        return set(self.concept_map)


def load_gaps(path: str | Path, concept_map_path: str | Path | None = None) -> GapInventory:
    """Load gap patterns (TSV: language, subdomain, concept_id, is_gap) plus an
    optional lexicon-concept-to-subdomain map."""
    path = Path(path)
    subdomains: dict[str, set[str]] = {}
    concept_subdomain: dict[str, str] = {}
    patterns: dict[tuple[str, str], set[str]] = {}
    languages: set[str] = set()
    diagnostics: list[str] = []
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != ["language", "subdomain", "concept_id", "is_gap"]:
            raise MalformedRow(path, 1, f"unexpected header {header}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4 or not all(fields[:3]):
                raise MalformedRow(path, line_no, "expected 4 non-empty columns")
            language, subdomain, concept_id, is_gap = fields
            if is_gap not in ("0", "1"):
                raise MalformedRow(path, line_no, f"is_gap must be 0 or 1, got {is_gap!r}")
            previous = concept_subdomain.get(concept_id)
            if previous is not None and previous != subdomain:
                raise GapOutsideSubdomain(
                    f"{path}:{line_no}: concept {concept_id!r} is in subdomain "
                    f"{previous!r}, not {subdomain!r}")
            concept_subdomain[concept_id] = subdomain
            subdomains.setdefault(subdomain, set()).add(concept_id)
            languages.add(language)
            patterns.setdefault((language, subdomain), set())
            if is_gap == "1":
                patterns[(language, subdomain)].add(concept_id)

    concept_map: dict[str, str] = {}
    if concept_map_path is not None:
        concept_map_path = Path(concept_map_path)
        with concept_map_path.open(encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if header != ["lexicon_concept_id", "subdomain"]:
                raise MalformedRow(concept_map_path, 1, f"unexpected header {header}")
            for line_no, line in enumerate(fh, start=2):
                line = line.rstrip("\n")
                if not line:
                    continue
                fields = line.split("\t")
                if len(fields) != 2 or not all(fields):
                    raise MalformedRow(concept_map_path, line_no, "expected 2 columns")
                lexicon_concept, subdomain = fields
                if subdomain not in subdomains:
                    raise MalformedRow(concept_map_path, line_no,
                                       f"unknown subdomain {subdomain!r}")
                concept_map[lexicon_concept] = subdomain
    return GapInventory(subdomains, patterns, concept_map, languages, diagnostics)


def gap_alignment(lang_a: str, lang_b: str, inventory: GapInventory) -> float:
    """Mean normalized gap-pattern intersection across subdomains."""
    for lang in (lang_a, lang_b):
        if lang not in inventory.languages:
            raise UnknownLanguage(lang)
    total = 0.0
    for subdomain, members in sorted(inventory.subdomains.items()):
        if not members:
            raise EmptySubdomain(subdomain)
        # a language missing a subdomain contributes an empty gap pattern
        gaps_a = inventory.patterns.get((lang_a, subdomain), set())
        gaps_b = inventory.patterns.get((lang_b, subdomain), set())
        total += len(gaps_a & gaps_b) / len(members)
    return total / len(inventory.subdomains)


def validate_against_gaps(table: AlignmentTable, inventory: GapInventory,
                          aggregation: str = "mean") -> ValidationReport:
    """Correlate per-pair aggregated alignment with the gap-pattern metric."""
    if aggregation != "mean":
        raise ValueError(f"unsupported aggregation: {aggregation}")
    pair_values: dict[tuple[str, str], list[float]] = {}
    for score in table.scores.values():
        pair_values.setdefault(score.language_pair, []).append(score.value)
    pairs = sorted(pair_values)
    if len(pairs) < 3:
        raise InsufficientPairs(f"need at least 3 language pairs, got {len(pairs)}")
    mu = np.array([np.mean(pair_values[p]) for p in pairs])
    lam = np.array([gap_alignment(p[0], p[1], inventory) for p in pairs])
    r, p_value = stats.pearson_test(mu, lam)
    return ValidationReport(
        kind="gap",
        statistics={"r": r, "p": p_value, "pairs": len(pairs),
                    "lambda": {f"{a}-{b}": float(v) for (a, b), v in zip(pairs, lam)},
                    "mu": {f"{a}-{b}": float(v) for (a, b), v in zip(pairs, mu)}},
        parameters={"aggregation": aggregation, "k": table.k},
    )
