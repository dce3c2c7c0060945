"""Polysemy proxies computed from a word's occurrence point cloud:
mean pairwise self-similarity and a GMM-based sense count.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.mixture import GaussianMixture

from .embeddings import PointCloud, PointCloudStore, cosine
from .errors import CloudTooSmall


def self_similarity(cloud: PointCloud) -> float:
    """Mean cosine over all ordered pairs i != j of the cloud's vectors."""
    n = len(cloud)
    if n < 2:
        raise CloudTooSmall(f"self-similarity needs >= 2 vectors, got {n}")
    vectors = cloud.vectors
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                total += cosine(vectors[i], vectors[j])
    return total / (n * n - n)


def _bic_curve(points: np.ndarray, max_components: int, seed: int) -> np.ndarray:
    bics = np.empty(max_components)
    for k in range(1, max_components + 1):
        gmm = GaussianMixture(
            n_components=k, covariance_type="diag", init_params="k-means++",
            max_iter=200, tol=1e-6, reg_covar=1e-6, random_state=seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            gmm.fit(points)
        bics[k - 1] = gmm.bic(points)
    return bics


def _select_count(bics: np.ndarray) -> int:
    """Component count at the knee of the BIC curve.

    The knee is where the criterion stops improving: the count minimizing
    BIC (ties resolve to the smaller count). A pure max-second-difference
    rule systematically undershoots by one on well-separated clusters, since
    the first merge always dominates the curvature.
    """
    return int(np.argmin(bics)) + 1


def gmm_sense_count(cloud: PointCloud, max_components: int = 10,
                    restarts: int = 10, seed: int = 0) -> int:
    """Modal BIC-selected component count over seeded GMM restarts.

    Ties between equally frequent counts resolve to the smaller count.
    """
    if len(cloud) < max_components:
        raise CloudTooSmall(
            f"need >= {max_components} vectors, got {len(cloud)}")
    points = np.asarray(cloud.vectors, dtype=np.float64)
    # jitter guard: a degenerate cloud (all points identical) is one cluster
    if np.ptp(points, axis=0).max() == 0.0:
        return 1
    sub_seeds = np.random.default_rng(seed).integers(0, 2**31 - 1, size=restarts)
    counts: list[int] = []
    for sub_seed in sub_seeds:
        counts.append(_select_count(_bic_curve(points, max_components, int(sub_seed))))
    values, freq = np.unique(counts, return_counts=True)
    return int(values[freq == freq.max()].min())


@dataclass(frozen=True)
class PairPolysemy:
    value: float
    per_language: dict
    excluded: dict  # language -> count of words whose measure failed


def polysemy_pair_score(lang_pair: tuple[str, str], stores: dict[str, PointCloudStore],
                        measure: str = "self_sim", max_components: int = 10,
                        restarts: int = 10, seed: int = 0) -> PairPolysemy:
    """Mean per-word polysemy per language, then the mean of the two means."""
    if measure not in ("self_sim", "gmm_senses"):
        raise ValueError(f"unknown polysemy measure: {measure}")
    per_language = {}
    excluded = {}
    for lang in sorted(lang_pair):
        store = stores[lang]
        values = []
        failures = 0
        for form in store.forms:
            try:
                if measure == "self_sim":
                    values.append(self_similarity(store.cloud(form)))
                else:
                    values.append(gmm_sense_count(store.cloud(form),
                                                  max_components, restarts, seed))
            except CloudTooSmall:
                failures += 1
        if not values:
            raise CloudTooSmall(f"no usable clouds in {lang}")
        per_language[lang] = float(np.mean(values))
        excluded[lang] = failures
    value = float(np.mean(list(per_language.values())))
    return PairPolysemy(value, per_language, excluded)
