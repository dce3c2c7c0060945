"""End-to-end acceptance suite.

Each test is one acceptance criterion; its pass/fail line in pytest -v output
is the criterion's verdict. Tolerances appear inline next to each assertion.
"""

import json
import math
import time

import numpy as np
import pytest

from lexalign.embeddings import PointCloud, VectorSpace, cosine, knn
from lexalign.errors import ComputeError
from lexalign.geodesic import geodesic_distance, inverse
from lexalign.metrics import MetricConfig, compute_table
from lexalign.polysemy import gmm_sense_count, self_similarity
from lexalign.stats import (
    adjusted_r_squared,
    kendall_tau,
    partial_correlation,
    pearson,
    spearman,
)
from lexalign.validation import gap_alignment, load_gaps, sensitivity, shuffle_baseline

from helpers import identity_setup, make_lexicon, random_entries, singleton_store
from naive import (
    naive_kendall_tau_b,
    naive_neighbors_overlap,
    naive_pearson,
    naive_snc_bidirectional,
    naive_spearman,
)


# --------------------------------------------------------------------------
# Identity suite: a space paired with itself scores perfect alignment.
# --------------------------------------------------------------------------

def test_identity_suite():
    started = time.monotonic()
    combos = [(2, 50), (8, 50), (64, 50), (8, 200), (64, 200)]
    for i, (dim, n) in enumerate(combos):
        lexicon, spaces, _ = identity_setup(n, dim, seed=100 + i)
        rng = np.random.default_rng(200 + i)
        layer_mean = {
            f: np.mean([rng.standard_normal(dim) for _ in range(4)], axis=0)
            for f in spaces["L1"].forms}
        ave_spaces = {lang: VectorSpace(lang, dim, dict(layer_mean))
                      for lang in ("L1", "L2")}
        stores = {lang: singleton_store(space) for lang, space in spaces.items()}
        for k in (10, 50):
            config = MetricConfig(k=k, min_survivors=3)
            for metric, sources in (("SNC-static", spaces),
                                    ("SNC-ave", ave_spaces),
                                    ("SNC-cloud", stores)):
                table = compute_table(metric, lexicon, sources, ["L1", "L2"], config)
                assert not table.gaps
                assert len(table.scores) == n
                for score in table.scores.values():
                    assert abs(score.value - 1.0) <= 1e-9, (metric, dim, n, k)
            table = compute_table("NO", lexicon, spaces, ["L1", "L2"], config)
            assert not table.gaps
            for score in table.scores.values():
                assert score.value == 1.0  # exact
    assert time.monotonic() - started < 10.0


# --------------------------------------------------------------------------
# Oracle suite: metrics match a naive reference; knn matches exhaustive scan.
# --------------------------------------------------------------------------

def random_micro_instance(rng):
    n_concepts = int(rng.integers(4, 9))
    dim = int(rng.integers(2, 4))
    k = int(rng.integers(2, 5))
    concepts = [f"c{i}" for i in range(n_concepts)]
    concept_form = {}
    for lang in ("L1", "L2"):
        forms = {}
        pool = []
        for c in concepts:
            if rng.random() < 0.12:  # unlexicalized concept
                continue
            if pool and rng.random() < 0.2:  # colexify an existing form
                forms[c] = pool[int(rng.integers(0, len(pool)))]
            else:
                form = f"{lang}_w{len(pool)}"
                pool.append(form)
                forms[c] = form
        concept_form[lang] = forms
    lexicon = make_lexicon(concept_form)
    vectors = {}
    for lang in ("L1", "L2"):
        vecs = {}
        for form in sorted(set(concept_form[lang].values())):
            if rng.random() < 0.1:  # form missing from the embedding space
                continue
            vecs[form] = [float(x) for x in rng.standard_normal(dim)]
        vectors[lang] = vecs
    return lexicon, concept_form, vectors, dim, k


def test_oracle_suite_micro_instances():
    rng = np.random.default_rng(300)
    instances = 0
    while instances < 100:
        lexicon, concept_form, vectors, dim, k = random_micro_instance(rng)
        if any(len(v) < 2 for v in vectors.values()):
            continue
        instances += 1
        spaces = {lang: VectorSpace(lang, dim, {f: np.array(v) for f, v in vs.items()})
                  for lang, vs in vectors.items()}
        config = MetricConfig(k=k, min_survivors=3)
        snc = compute_table("SNC-static", lexicon, spaces, ["L1", "L2"], config)
        no = compute_table("NO", lexicon, spaces, ["L1", "L2"], config)
        pair = ("L1", "L2")
        for concept in lexicon.concepts:
            want = naive_snc_bidirectional(concept, "L1", "L2", vectors,
                                           concept_form, k, min_survivors=3)
            got = snc.get("SNC-static", pair, concept)
            if want is None:
                assert got is None, concept
            else:
                assert got is not None, concept
                assert abs(got.value - want) <= 1e-12, concept
            want_no = naive_neighbors_overlap(concept, "L1", "L2", vectors,
                                              concept_form, k)
            got_no = no.get("NO", pair, concept)
            if want_no is None:
                assert got_no is None, concept
            else:
                assert got_no is not None and got_no.value == want_no, concept


def test_oracle_suite_knn_exhaustive():
    rng = np.random.default_rng(301)
    queries_done = 0
    while queries_done < 1000:
        n = int(rng.integers(5, 40))
        dim = int(rng.integers(2, 9))
        forms = [f"w{i:02d}" for i in range(n)]
        entries = {f: rng.standard_normal(dim) for f in forms}
        space = VectorSpace("L", dim, entries)
        k = int(rng.integers(1, n))
        for query in forms[:min(25, n)]:
            scored = sorted(
                ((f, cosine(entries[query], entries[f])) for f in forms if f != query),
                key=lambda item: (-item[1], item[0]))
            expected = scored[:k]
            got = knn(space, query, k, set(forms))
            assert got.neighbors == expected  # exact, including similarity bits
            queries_done += 1


# --------------------------------------------------------------------------
# Transform suite: rotation + positive scaling leave scores unchanged.
# --------------------------------------------------------------------------

def test_transform_suite():
    rng = np.random.default_rng(302)
    config = MetricConfig(k=5, min_survivors=3)
    for _ in range(50):
        lexicon, spaces, _ = identity_setup(20, 8, seed=int(rng.integers(1 << 30)),
                                            shared_vectors=False)
        q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
        scale = float(rng.uniform(0.1, 10.0))
        transformed = {f: scale * (q @ spaces["L2"].vector(f))
                       for f in spaces["L2"].forms}
        moved = {"L1": spaces["L1"], "L2": VectorSpace("L2", 8, transformed)}
        for metric in ("SNC-static", "NO"):
            before = compute_table(metric, lexicon, spaces, ["L1", "L2"], config)
            after = compute_table(metric, lexicon, moved, ["L1", "L2"], config)
            assert before.scores.keys() == after.scores.keys()
            for key, score in before.scores.items():
                assert abs(after.scores[key].value - score.value) <= 1e-6, key


# --------------------------------------------------------------------------
# Degeneration: all-singleton clouds reduce exactly to the flat metric.
# --------------------------------------------------------------------------

def test_degeneration_suite():
    config = MetricConfig(k=4, min_survivors=3)
    for i in range(20):
        lexicon, spaces, _ = identity_setup(15, 4, seed=400 + i,
                                            shared_vectors=False)
        stores = {lang: singleton_store(space) for lang, space in spaces.items()}
        flat = compute_table("SNC-static", lexicon, spaces, ["L1", "L2"], config)
        cloudy = compute_table("SNC-cloud", lexicon, stores, ["L1", "L2"], config)
        flat_values = {(p, c): s.value for (_, p, c), s in flat.scores.items()}
        cloud_values = {(p, c): s.value for (_, p, c), s in cloudy.scores.items()}
        assert flat_values == cloud_values  # bitwise identical


# --------------------------------------------------------------------------
# Shuffle behavior: random pairings decorrelate; identity pairing is a no-op.
# --------------------------------------------------------------------------

def test_shuffle_suite():
    started = time.monotonic()
    lexicon, spaces, _ = identity_setup(500, 16, seed=500, shared_vectors=False)
    config = MetricConfig(k=100, min_survivors=10)
    report = shuffle_baseline(lexicon, spaces, ("L1", "L2"), config=config,
                              permutations=100, seed=7)
    assert report.statistics["concepts"] == 500
    assert report.statistics["trials"] == 100
    assert abs(report.statistics["mean_r"]) < 0.1
    identity = shuffle_baseline(lexicon, spaces, ("L1", "L2"), config=config,
                                permutations=2, seed=7,
                                permute=lambda rng, n: np.arange(n))
    assert identity.per_trial == [1.0, 1.0]  # exact
    assert time.monotonic() - started < 60.0


# --------------------------------------------------------------------------
# Sensitivity: j=0 is a no-op; an isolated-domain fixture is removal-immune.
# --------------------------------------------------------------------------

def domain_isolated_fixture(n_domains, per_domain, seed):
    """Domains sit on separate axes, so neighborhoods never cross domains."""
    rng = np.random.default_rng(seed)
    dim = n_domains
    concepts, forms, domain_of = [], [], {}
    for d in range(n_domains):
        for i in range(per_domain):
            c = f"c{d:02d}_{i}"
            concepts.append(c)
            forms.append(f"w{d:02d}_{i}")
            domain_of[c] = f"d{d:02d}"
    concept_form = {lang: dict(zip(concepts, forms)) for lang in ("L1", "L2")}
    lexicon = make_lexicon(concept_form, domain_of)
    spaces = {}
    for lang in ("L1", "L2"):
        entries = {}
        for d in range(n_domains):
            base = np.zeros(dim)
            base[d] = 1.0
            for i in range(per_domain):
                entries[f"w{d:02d}_{i}"] = base + 0.01 * rng.standard_normal(dim)
        spaces[lang] = VectorSpace(lang, dim, entries)
    return lexicon, spaces


def test_sensitivity_suite():
    config = MetricConfig(k=3, min_survivors=3)
    lexicon, spaces = domain_isolated_fixture(6, 4, seed=600)
    noop = sensitivity(lexicon, spaces, ["L1", "L2"], j=0, trials=10,
                       seed=0, config=config)
    assert noop.per_trial == [1.0] * 10  # exact

    lexicon, spaces = domain_isolated_fixture(18, 4, seed=601)
    for j in (5, 10, 15):
        report = sensitivity(lexicon, spaces, ["L1", "L2"], j=j, trials=1000,
                             seed=j, config=config)
        assert report.statistics["trials"] == 1000
        assert report.per_trial == [1.0] * 1000, f"j={j}"  # exact


# --------------------------------------------------------------------------
# Lexical-gap lambda suite.
# --------------------------------------------------------------------------

KINSHIP_SUBDOMAINS = ("grandparents", "grandchildren", "siblings",
                      "uncles_aunts", "nephews_nieces", "cousins")


def write_gap_tsv(path, rows):
    lines = ["language\tsubdomain\tconcept_id\tis_gap"]
    lines += ["\t".join(r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def test_lambda_suite(tmp_path):
    # hand-derived fixture: subdomain 1 has 4 concepts with gap patterns
    # {k1,k2} vs {k2,k3} (intersection 1/4); subdomain 2 has 2 concepts with
    # patterns {m1} vs {m1} (intersection 1/2); lambda = (1/4 + 1/2)/2 = 0.375
    hand = tmp_path / "hand.tsv"
    rows = []
    for lang, gaps in (("L1", {"k1", "k2", "m1"}), ("L2", {"k2", "k3", "m1"})):
        for c in ("k1", "k2", "k3", "k4"):
            rows.append((lang, "s1", c, "1" if c in gaps else "0"))
        for c in ("m1", "m2"):
            rows.append((lang, "s2", c, "1" if c in gaps else "0"))
    write_gap_tsv(hand, rows)
    inventory = load_gaps(hand)
    assert gap_alignment("L1", "L2", inventory) == 0.375  # exact

    # zero gaps anywhere -> lambda = 0
    zero = tmp_path / "zero.tsv"
    write_gap_tsv(zero, [(lang, "s1", c, "0")
                         for lang in ("L1", "L2") for c in ("k1", "k2")])
    assert gap_alignment("L1", "L2", load_gaps(zero)) == 0.0

    # symmetry and bounds on a randomized inventory
    rng = np.random.default_rng(700)
    rand = tmp_path / "rand.tsv"
    rows = [(lang, s, f"{s}_c{i}", str(int(rng.integers(0, 2))))
            for lang in ("L1", "L2", "L3")
            for s in ("s1", "s2", "s3", "s4")
            for i in range(5)]
    write_gap_tsv(rand, rows)
    inventory = load_gaps(rand)
    for a in ("L1", "L2", "L3"):
        for b in ("L1", "L2", "L3"):
            value = gap_alignment(a, b, inventory)
            assert 0.0 <= value <= 1.0
            assert value == gap_alignment(b, a, inventory)

    # six-subdomain kinship-shaped inventory loads with exactly 6 subdomains
    kin = tmp_path / "kinship.tsv"
    rows = []
    rng = np.random.default_rng(701)
    for lang in ("L1", "L2", "L3"):
        for s in KINSHIP_SUBDOMAINS:
            for i in range(int(4 + 2 * KINSHIP_SUBDOMAINS.index(s))):
                rows.append((lang, s, f"{s}_c{i}", str(int(rng.integers(0, 2)))))
    write_gap_tsv(kin, rows)
    inventory = load_gaps(kin)
    assert len(inventory.subdomains) == 6
    assert set(inventory.subdomains) == set(KINSHIP_SUBDOMAINS)
    assert 0.0 <= gap_alignment("L1", "L2", inventory) <= 1.0


# --------------------------------------------------------------------------
# Statistics suite.
# --------------------------------------------------------------------------

def test_statistics_suite():
    rng = np.random.default_rng(800)
    checked = 0
    while checked < 1000:
        n = int(rng.integers(3, 40))
        if checked % 4 == 0:
            x = rng.integers(0, 6, size=n).astype(float)
            y = rng.integers(0, 6, size=n).astype(float)
        else:
            x = rng.standard_normal(n)
            y = rng.standard_normal(n)
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            continue
        checked += 1
        lx, ly = list(x), list(y)
        assert abs(pearson(x, y) - naive_pearson(lx, ly)) <= 1e-10
        assert abs(spearman(x, y) - naive_spearman(lx, ly)) <= 1e-10
        assert abs(kendall_tau(x, y) - naive_kendall_tau_b(lx, ly)) <= 1e-10

    for _ in range(200):
        n = int(rng.integers(8, 80))
        x, y, z = rng.standard_normal(n), rng.standard_normal(n), rng.standard_normal(n)
        r, _ = partial_correlation(x, y, [z])
        rxy, rxz, ryz = pearson(x, y), pearson(x, z), pearson(y, z)
        recursion = (rxy - rxz * ryz) / math.sqrt((1 - rxz**2) * (1 - ryz**2))
        assert abs(r - recursion) <= 1e-9

    # hand-solved 5-point OLS: slope 1.2, intercept -0.2, SSR 6.8, Syy 21.2
    x = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    y = np.array([2.0, 1.0, 4.0, 3.0, 7.0])
    assert abs(adjusted_r_squared(y, [x]) - (1.0 - (6.8 / 21.2) * (4.0 / 3.0))) <= 1e-9


# --------------------------------------------------------------------------
# Geodesic suite.
# --------------------------------------------------------------------------

def test_geodesic_suite():
    assert abs(geodesic_distance((0.0, 0.0), (0.0, 90.0)) - 10018.754) <= 0.5

    rng = np.random.default_rng(900)
    triples_done = 0
    resamples = 0
    while triples_done < 1000:
        pts = [(float(rng.uniform(-80, 80)), float(rng.uniform(-180, 180)))
               for _ in range(3)]
        results = {}
        converged = True
        for i in range(3):
            for j in range(i + 1, 3):
                fwd = inverse(pts[i], pts[j])
                bwd = inverse(pts[j], pts[i])
                converged &= fwd.converged and bwd.converged
                results[(i, j)] = (fwd.kilometers, bwd.kilometers)
        if not converged:  # skip the rare near-antipodal fallback regime
            resamples += 1
            continue
        triples_done += 1
        for (i, j), (fwd_km, bwd_km) in results.items():
            assert abs(fwd_km - bwd_km) <= 1e-6
        d01, d02, d12 = results[(0, 1)][0], results[(0, 2)][0], results[(1, 2)][0]
        assert d01 <= d02 + d12 + 1e-6
        assert d02 <= d01 + d12 + 1e-6
        assert d12 <= d01 + d02 + 1e-6
    assert resamples < 50


# --------------------------------------------------------------------------
# Polysemy suite.
# --------------------------------------------------------------------------

def test_polysemy_suite():
    started = time.monotonic()
    rng = np.random.default_rng(1000)
    cloud = PointCloud("w", rng.standard_normal((20, 6)))
    total = 0.0
    vectors = cloud.vectors
    for i in range(20):
        for j in range(20):
            if i != j:
                total += cosine(vectors[i], vectors[j])
    assert self_similarity(cloud) == total / (20 * 20 - 20)  # exact

    centers = np.array([[0.0, 0.0, 0.0], [10.0, 10.0, 0.0], [-10.0, 10.0, 0.0]])
    points = np.vstack([c + 0.5 * rng.standard_normal((50, 3)) for c in centers])
    three = PointCloud("three", points)
    one = PointCloud("one", 1.0 + 0.4 * rng.standard_normal((150, 3)))
    hits_three = sum(gmm_sense_count(three, seed=s) == 3 for s in range(10))
    hits_one = sum(gmm_sense_count(one, seed=s) == 1 for s in range(10))
    assert hits_three >= 8
    assert hits_one >= 8
    assert time.monotonic() - started < 120.0


# --------------------------------------------------------------------------
# Reproducibility: identical reruns produce byte-identical primary outputs.
# --------------------------------------------------------------------------

def rerun_and_compare(cli_workspace, args, out_a, out_b):
    from lexalign.cli import main
    assert main([str(a) for a in args + ["--output", str(cli_workspace / out_a)]]) == 0
    assert main([str(a) for a in args + ["--output", str(cli_workspace / out_b)]]) == 0
    dir_a, dir_b = cli_workspace / out_a, cli_workspace / out_b
    names = sorted(p.name for p in dir_a.iterdir())
    assert names == sorted(p.name for p in dir_b.iterdir())
    for name in names:
        if name == "manifest.json":
            ma = json.loads((dir_a / name).read_text())
            mb = json.loads((dir_b / name).read_text())
            ma.pop("timestamp"), mb.pop("timestamp")
            assert ma == mb
        else:
            assert (dir_a / name).read_bytes() == (dir_b / name).read_bytes(), name


def test_reproducibility_suite(cli_workspace):
    config = cli_workspace / "config.toml"
    rerun_and_compare(cli_workspace, ["compute", "--config", config], "c1", "c2")
    rerun_and_compare(cli_workspace,
                      ["validate", "--config", config, "--kind", "shuffle"],
                      "v1", "v2")
    rerun_and_compare(cli_workspace,
                      ["analyze", "--config", config, "--analysis", "aggregate"],
                      "a1", "a2")
    rerun_and_compare(cli_workspace,
                      ["neighbors", "--config", config, "--concept", "c00",
                       "--pair", "aaa-bbb"], "n1", "n2")
