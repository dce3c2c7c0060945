"""Pipeline-workspace fixture shared across the suite."""

from __future__ import annotations

import numpy as np
import pytest

from lexalign.embeddings import write_clouds_pcld

from helpers import write_lexicon_tsv, write_vec_text

@pytest.fixture
def cli_workspace(tmp_path):
    """A small but fully populated pipeline workspace with a TOML config."""
    rng = np.random.default_rng(7)
    n = 12
    concepts = [f"c{i:02d}" for i in range(n)]
    forms = [f"word{i:02d}" for i in range(n)]
    domain_of = {c: f"d{i % 3}" for i, c in enumerate(concepts)}
    languages = ("aaa", "bbb", "ccc")
    rows = []
    for lang in languages:
        for c, f in zip(concepts, forms):
            rows.append((c, domain_of[c], lang, f))
    write_lexicon_tsv(tmp_path / "lexicon.tsv", rows)

    dim = 6
    for lang in languages:
        entries = {f: rng.standard_normal(dim) for f in forms}
        write_vec_text(tmp_path / f"{lang}.vec", entries, dim)
        clouds = {f: rng.standard_normal((4, dim)) for f in forms}
        write_clouds_pcld(clouds, dim, tmp_path / f"{lang}.pcld")

    gap_sets = {"aaa": {"k1", "k3"}, "bbb": {"k1", "k4"}, "ccc": {"k1", "k3", "k5"}}
    gap_lines = ["language\tsubdomain\tconcept_id\tis_gap"]
    for lang in languages:
        for sub, kin in (("siblings", ["k1", "k2"]), ("cousins", ["k3", "k4"]),
                         ("in_laws", ["k5", "k6"])):
            for kc in kin:
                is_gap = "1" if kc in gap_sets[lang] else "0"
                gap_lines.append(f"{lang}\t{sub}\t{kc}\t{is_gap}")
    (tmp_path / "gaps.tsv").write_text("\n".join(gap_lines) + "\n", encoding="utf-8")
    map_lines = ["lexicon_concept_id\tsubdomain"]
    for i, c in enumerate(concepts[:6]):
        sub = ["siblings", "cousins", "in_laws"][i % 3]
        map_lines.append(f"{c}\t{sub}")
    (tmp_path / "gap_map.tsv").write_text("\n".join(map_lines) + "\n", encoding="utf-8")

    feat_lines = ["concept_id,frequency_log,concreteness,rate_of_change"]
    for i, c in enumerate(concepts):
        feat_lines.append(f"{c},{1.0 + 0.3 * i},{0.2 + 0.05 * i},{2.0 - 0.1 * i}")
    (tmp_path / "features.csv").write_text("\n".join(feat_lines) + "\n", encoding="utf-8")

    (tmp_path / "coords.csv").write_text(
        "language,lat,lon\naaa,48.85,2.35\nbbb,52.52,13.40\nccc,40.41,-3.70\n",
        encoding="utf-8")
    (tmp_path / "traits.csv").write_text(
        "language,trait_1,trait_2,trait_3\naaa,1,0,1\nbbb,1,1,\nccc,0,0,1\n",
        encoding="utf-8")
    norm_lines = ["concept_id,score"]
    for i, c in enumerate(concepts):
        norm_lines.append(f"{c},{0.1 * i}")
    (tmp_path / "norms.csv").write_text("\n".join(norm_lines) + "\n", encoding="utf-8")

    config = f"""
[paths]
lexicon = "lexicon.tsv"
output = "out"
gaps = "gaps.tsv"
gap_concept_map = "gap_map.tsv"
concept_features = "features.csv"
language_coords = "coords.csv"
cultural_traits = "traits.csv"
norms = "norms.csv"

[paths.vectors]
aaa = "aaa.vec"
bbb = "bbb.vec"
ccc = "ccc.vec"

[paths.clouds]
aaa = "aaa.pcld"
bbb = "bbb.pcld"
ccc = "ccc.pcld"

[run]
k = 10
min_survivors = 3
metrics = ["SNC-static", "NO"]
seed = 11

[validation]
permutations = 5
sensitivity_j = 1
sensitivity_trials = 3
"""
    (tmp_path / "config.toml").write_text(config, encoding="utf-8")
    return tmp_path
