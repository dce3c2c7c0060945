"""Aggregation of alignment tables, cross-metric correlation matrices,
feature correlations, and environmental distances.

Aggregated vectors carry their key ordering explicitly so that vectors from
different metrics are comparable; every join reports its cardinality and
silent sample shrinkage is forbidden.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import stats
from .errors import (
    EmptyTable,
    InsufficientOverlap,
    InvalidCoordinate,
    NoCommonKeys,
    NoComparableTraits,
)
from .lexicon import ConceptLexicon
from .metrics import AlignmentTable

MISSING = object()


@dataclass
class AggregatedVector:
    metric: str
    level: str                 # concept | domain
    ordering: list[tuple]      # (lang_pair, concept_id) or (lang_pair, domain_id)
    values: np.ndarray
    diagnostics: list[str] = field(default_factory=list)

    def as_mapping(self) -> dict:
        return dict(zip(self.ordering, self.values))


def aggregate(table: AlignmentTable, lexicon: ConceptLexicon, level: str,
              metric: str | None = None, statistic: str = "mean") -> AggregatedVector:
    """Flatten a table to a canonical-ordered vector at concept or domain level.

    Domain level averages over the concepts available per (pair, domain); a
    domain whose every concept is a gap yields no entry plus a diagnostic.
    """
    if statistic != "mean":
        raise ValueError(f"unsupported statistic: {statistic}")
    if level not in ("concept", "domain"):
        raise ValueError(f"unknown level: {level}")
    metrics = table.metrics
    if metric is None:
        if len(metrics) != 1:
            raise ValueError("table holds several metrics; pass one explicitly")
        metric = metrics[0]
    scores = table.scores_for(metric)
    if not scores:
        raise EmptyTable(f"no scores for metric {metric}")

    diagnostics: list[str] = []
    if level == "concept":
        entries = {(s.language_pair, s.concept_id): s.value for s in scores}
    else:
        groups: dict[tuple, list[float]] = {}
        for s in scores:
            domain_id = lexicon.concepts[s.concept_id].domain_id
            groups.setdefault((s.language_pair, domain_id), []).append(s.value)
        entries = {key: float(np.mean(vals)) for key, vals in groups.items()}
        covered = {(pair, lexicon.concepts[c].domain_id)
                   for (_, pair, c) in table.gaps if c in lexicon.concepts}
        for key in sorted(covered - set(entries)):
            diagnostics.append(f"domain {key[1]} for pair {key[0]}: all concepts are gaps")
    ordering = sorted(entries)
    return AggregatedVector(metric, level, ordering,
                            np.array([entries[k] for k in ordering]), diagnostics)


def metric_correlation_matrix(vectors: list[AggregatedVector],
                              correlation: str = "pearson"):
    """Symmetric cross-metric correlation matrix with two-tailed p-values.

    Vectors with differing orderings are intersected to their common keys,
    with the intersection size reported.
    """
    if not vectors:
        raise ValueError("no vectors")
    correlate = stats.CORRELATIONS[correlation]
    common = set(vectors[0].ordering)
    for v in vectors[1:]:
        common &= set(v.ordering)
    if not common:
        raise NoCommonKeys("aggregated vectors share no keys")
    keys = sorted(common)
    columns = []
    for v in vectors:
        mapping = v.as_mapping()
        columns.append(np.array([mapping[k] for k in keys]))
    n = len(vectors)
    matrix = np.eye(n)
    pvalues = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            r = correlate(columns[i], columns[j])
            matrix[i, j] = matrix[j, i] = r
            p = stats.pearson_pvalue(r, len(keys)) if correlation == "pearson" else None
            pvalues[i, j] = pvalues[j, i] = p if p is not None else np.nan
    labels = [v.metric for v in vectors]
    return {"labels": labels, "matrix": matrix, "pvalues": pvalues, "n_keys": len(keys)}


def feature_correlation(vector: AggregatedVector, feature: dict, level: str = "auto"
                        ) -> tuple[float, float, int]:
    """Pearson r, p of an aggregated vector against a named feature series.

    Feature keys may be concept/domain ids (broadcast across language pairs)
    or language pairs (broadcast across concepts). Returns (r, p, join size).
    """
    xs, ys = [], []
    for (pair, component), value in zip(vector.ordering, vector.values):
        if component in feature:
            fv = feature[component]
        elif pair in feature:
            fv = feature[pair]
        elif tuple(sorted(pair)) in feature:
            fv = feature[tuple(sorted(pair))]
        else:
            continue
        if fv is None:
            continue
        xs.append(value)
        ys.append(float(fv))
    if len(xs) < 3:
        raise InsufficientOverlap(f"only {len(xs)} overlapping keys")
    r, p = stats.pearson_test(np.array(xs), np.array(ys))
    return r, p, len(xs)


def external_norm_correlation(vector: AggregatedVector, norms_path: str | Path
                              ) -> tuple[float, float, int]:
    """Correlate against a concept-keyed (optionally pair-keyed) score CSV."""
    norms: dict = {}
    with Path(norms_path).open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        pair_keyed = "lang_a" in fields and "lang_b" in fields
        for row in reader:
            if not row.get("score"):
                continue
            score = float(row["score"])
            if pair_keyed:
                pair = tuple(sorted((row["lang_a"], row["lang_b"])))
                norms[(pair, row["concept_id"])] = score
            else:
                norms[row["concept_id"]] = score
    xs, ys = [], []
    for key, value in zip(vector.ordering, vector.values):
        pair, component = key
        fv = norms.get(key, norms.get(component))
        if fv is None:
            continue
        xs.append(value)
        ys.append(fv)
    if len(xs) < 3:
        raise InsufficientOverlap(f"only {len(xs)} overlapping keys")
    r, p = stats.pearson_test(np.array(xs), np.array(ys))
    return r, p, len(xs)


# --- feature tables ---

@dataclass
class FeatureTables:
    concept_features: dict[str, dict]        # concept -> {name: value or None}
    language_coords: dict[str, tuple[float, float]]
    cultural_traits: dict[str, list]         # language -> trait values (None = missing)

    def concept_series(self, name: str) -> dict:
        return {c: f.get(name) for c, f in self.concept_features.items()
                if f.get(name) is not None}


def load_concept_features(path: str | Path) -> dict[str, dict]:
    """CSV: concept_id,frequency_log,concreteness,rate_of_change; blanks missing."""
    out: dict[str, dict] = {}
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            values = {}
            for name in ("frequency_log", "concreteness", "rate_of_change"):
                raw = row.get(name, "")
                values[name] = float(raw) if raw not in ("", None) else None
            out[row["concept_id"]] = values
    return out


def load_language_coords(path: str | Path) -> dict[str, tuple[float, float]]:
    out: dict[str, tuple[float, float]] = {}
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            lat, lon = float(row["lat"]), float(row["lon"])
            if not (-90.0 <= lat <= 90.0) or not (-180.0 <= lon <= 180.0):
                raise InvalidCoordinate(f"{row['language']}: ({lat}, {lon})")
            out[row["language"]] = (lat, lon)
    return out


def load_cultural_traits(path: str | Path) -> dict[str, list]:
    """CSV: language,trait_1..trait_N; blank cells are explicit absences."""
    out: dict[str, list] = {}
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        trait_columns = [c for c in (reader.fieldnames or []) if c != "language"]
        for row in reader:
            out[row["language"]] = [row[c] if row[c] != "" else None
                                    for c in trait_columns]
    return out


def cultural_distance(a: list, b: list) -> float:
    """1 - (matching traits / mutually present traits)."""
    if len(a) != len(b):
        raise ValueError(f"trait vectors differ in length: {len(a)} vs {len(b)}")
    present = [(x, y) for x, y in zip(a, b) if x is not None and y is not None]
    if not present:
        raise NoComparableTraits("no trait present in both languages")
    matching = sum(1 for x, y in present if x == y)
    return 1.0 - matching / len(present)


def boxplot_stats(values) -> dict:
    """Median, linear-interpolation quartiles, 1.5x IQR whiskers, outliers."""
    data = np.sort(np.asarray(values, dtype=np.float64))
    q1, median, q3 = np.quantile(data, [0.25, 0.5, 0.75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = data[(data >= lo_fence) & (data <= hi_fence)]
    return {
        "median": float(median), "q1": float(q1), "q3": float(q3),
        "whisker_low": float(inside.min()), "whisker_high": float(inside.max()),
        "outliers": [float(v) for v in data[(data < lo_fence) | (data > hi_fence)]],
        "n": int(data.size),
    }
