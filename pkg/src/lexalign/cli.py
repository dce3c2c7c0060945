"""Batch pipeline CLI: compute alignment tables, run validations, export
analyses and neighbor dumps.

Reproducibility contract: re-running any command with the same config and
inputs produces byte-identical primary outputs. The run manifest is the only
file carrying a timestamp, in its dedicated "timestamp" field.

Exit codes: 0 success, 1 usage, 2 data error, 3 compute error.
"""

from __future__ import annotations

import csv
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import click

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from . import __version__, analysis, embeddings, metrics, polysemy, validation
from .errors import ComputeError, DataError, LexalignError
from .lexicon import load_lexicon
from .metrics import MetricConfig, compute_table, directional_profile, file_digest

RECOMMENDED_K = (10, 50, 100, 1000)


@dataclass
class PipelineConfig:
    lexicon: Path
    vectors: dict[str, Path] = field(default_factory=dict)
    ave_vectors: dict[str, Path] = field(default_factory=dict)
    clouds: dict[str, Path] = field(default_factory=dict)
    gaps: Path | None = None
    gap_concept_map: Path | None = None
    concept_features: Path | None = None
    language_coords: Path | None = None
    cultural_traits: Path | None = None
    norms: Path | None = None
    output: Path = Path("out")
    k: int = 100
    metrics: list[str] = field(default_factory=lambda: ["SNC-static"])
    correlation: str = "pearson"
    seed: int = 0
    min_survivors: int = 10
    cloud_aggregation: str = "min"
    languages: list[str] = field(default_factory=list)
    jobs: int = 1
    permutations: int = 100
    sensitivity_j: int = 5
    sensitivity_trials: int = 1000

    def metric_config(self) -> MetricConfig:
        return MetricConfig(k=self.k, min_survivors=self.min_survivors,
                            correlation=self.correlation,
                            cloud_aggregation=self.cloud_aggregation)

    def input_paths(self) -> dict[str, Path]:
        out = {"lexicon": self.lexicon}
        for group, paths in (("vectors", self.vectors),
                             ("ave_vectors", self.ave_vectors),
                             ("clouds", self.clouds)):
            for lang, path in sorted(paths.items()):
                out[f"{group}.{lang}"] = path
        for name in ("gaps", "gap_concept_map", "concept_features",
                     "language_coords", "cultural_traits", "norms"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out


def load_config(path: str | Path, overrides: dict | None = None) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise DataError(f"config file not found: {path}")
    with path.open("rb") as fh:
        raw = tomllib.load(fh)
    paths = raw.get("paths", {})
    run = raw.get("run", {})
    val = raw.get("validation", {})
    base = path.parent

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    config = PipelineConfig(
        lexicon=resolve(paths["lexicon"]),
        vectors={lang: resolve(p) for lang, p in paths.get("vectors", {}).items()},
        ave_vectors={lang: resolve(p) for lang, p in paths.get("ave_vectors", {}).items()},
        clouds={lang: resolve(p) for lang, p in paths.get("clouds", {}).items()},
        gaps=resolve(paths["gaps"]) if "gaps" in paths else None,
        gap_concept_map=resolve(paths["gap_concept_map"]) if "gap_concept_map" in paths else None,
        concept_features=resolve(paths["concept_features"]) if "concept_features" in paths else None,
        language_coords=resolve(paths["language_coords"]) if "language_coords" in paths else None,
        cultural_traits=resolve(paths["cultural_traits"]) if "cultural_traits" in paths else None,
        norms=resolve(paths["norms"]) if "norms" in paths else None,
        output=resolve(paths.get("output", "out")),
        k=run.get("k", 100),
        metrics=run.get("metrics", ["SNC-static"]),
        correlation=run.get("correlation", "pearson"),
        seed=run.get("seed", 0),
        min_survivors=run.get("min_survivors", 10),
        cloud_aggregation=run.get("cloud_aggregation", "min"),
        languages=run.get("languages", []),
        jobs=run.get("jobs", 1),
        permutations=val.get("permutations", 100),
        sensitivity_j=val.get("sensitivity_j", 5),
        sensitivity_trials=val.get("sensitivity_trials", 1000),
    )
    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(config, key, value)
    validate_config(config)
    return config


def validate_config(config: PipelineConfig) -> None:
    for name, p in config.input_paths().items():
        if not Path(p).exists():
            raise DataError(f"configured path for {name} does not exist: {p}")
    if config.k <= 0:
        raise DataError(f"k must be positive, got {config.k}")
    if config.k not in RECOMMENDED_K:
        click.echo(f"warning: k={config.k} outside the usual set {RECOMMENDED_K}",
                   err=True)
    for metric in config.metrics:
        if metric not in metrics.METRICS:
            raise DataError(f"unknown metric {metric!r}; choose from {metrics.METRICS}")


def _load_sources(config: PipelineConfig, metric: str, languages: list[str]) -> dict:
    if metric == "SNC-cloud":
        group, loader = config.clouds, (
            lambda p, lang: embeddings.load_clouds(
                p, language=lang, aggregation=config.cloud_aggregation))
    elif metric == "SNC-ave":
        group = config.ave_vectors or config.vectors
        loader = lambda p, lang: embeddings.load_vectors(p, language=lang)
    else:
        group, loader = config.vectors, (
            lambda p, lang: embeddings.load_vectors(p, language=lang))
    missing = [lang for lang in languages if lang not in group]
    if missing:
        raise DataError(f"no embedding source for {missing} (metric {metric})")
    return {lang: loader(group[lang], lang) for lang in languages}


def _languages(config: PipelineConfig, lexicon) -> list[str]:
    return sorted(config.languages or lexicon.languages)


def write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def write_table_csv(path: Path, rows: list[dict], columns: list[str]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def write_manifest(config: PipelineConfig, out_dir: Path, command: str,
                   extra: dict | None = None) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "seed": config.seed,
        "k": config.k,
        "config": {name: str(p) for name, p in config.input_paths().items()},
        "input_digests": {name: file_digest(p)
                          for name, p in config.input_paths().items()},
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    if extra:
        manifest.update(extra)
    write_json(out_dir / "manifest.json", manifest)


TABLE_COLUMNS = ["metric", "lang_a", "lang_b", "concept_id", "value",
                 "survivors_fwd", "survivors_bwd", "reason"]


def _format_rows(rows: list[dict]) -> list[dict]:
    out = []
    for row in rows:
        row = dict(row)
        if row["value"] != "":
            row["value"] = repr(float(row["value"]))
        out.append(row)
    return out


@click.group()
def cli() -> None:
    """Cross-lingual lexical alignment pipeline."""


config_option = click.option("--config", "config_path", required=True,
                             type=click.Path(), help="TOML pipeline config.")
seed_option = click.option("--seed", type=int, default=None)
k_option = click.option("--k", type=int, default=None)
output_option = click.option("--output", type=click.Path(), default=None)
jobs_option = click.option("--jobs", type=int, default=None)


def _overrides(seed, k, output, jobs, metric=None) -> dict:
    out = {"seed": seed, "k": k, "jobs": jobs,
           "output": Path(output) if output else None}
    if metric:
        out["metrics"] = [metric]
    return out


@cli.command()
@config_option
@seed_option
@k_option
@output_option
@jobs_option
@click.option("--metric", default=None, help="Compute a single metric only.")
def compute(config_path, seed, k, output, jobs, metric):
    """Compute alignment tables for every configured metric."""
    config = load_config(config_path, _overrides(seed, k, output, jobs, metric))
    lexicon = load_lexicon(config.lexicon)
    languages = _languages(config, lexicon)
    out_dir = config.output
    out_dir.mkdir(parents=True, exist_ok=True)
    for m in config.metrics:
        sources = _load_sources(config, m, languages)
        table = compute_table(m, lexicon, sources, languages,
                              config.metric_config(), jobs=config.jobs)
        rows = _format_rows(table.rows())
        write_table_csv(out_dir / f"table_{m}.csv", rows, TABLE_COLUMNS)
        write_json(out_dir / f"table_{m}.json",
                   {"metric": m, "k": config.k, "rows": rows})
        for pair in {tuple(sorted((a, b)))
                     for i, a in enumerate(languages) for b in languages[i + 1:]}:
            pair_rows = [r for r in rows
                         if (r["lang_a"], r["lang_b"]) == pair]
            write_table_csv(out_dir / f"table_{m}_{pair[0]}-{pair[1]}.csv",
                            pair_rows, TABLE_COLUMNS)
    write_manifest(config, out_dir, "compute", {"metrics": config.metrics})
    click.echo(f"wrote tables for {len(config.metrics)} metric(s) to {out_dir}")


def _computed_table(config: PipelineConfig, lexicon, metric: str,
                    languages: list[str], concept_subset=None):
    sources = _load_sources(config, metric, languages)
    return compute_table(metric, lexicon, sources, languages,
                         config.metric_config(), concept_subset=concept_subset,
                         jobs=config.jobs), sources


@cli.command()
@config_option
@seed_option
@k_option
@output_option
@jobs_option
@click.option("--kind", required=True,
              type=click.Choice(["shuffle", "sensitivity", "gaps"]))
def validate(config_path, seed, k, output, jobs, kind):
    """Run a validation experiment (shuffle, sensitivity, or gaps)."""
    config = load_config(config_path, _overrides(seed, k, output, jobs))
    lexicon = load_lexicon(config.lexicon)
    languages = _languages(config, lexicon)
    out_dir = config.output
    out_dir.mkdir(parents=True, exist_ok=True)
    metric = config.metrics[0]
    if kind == "shuffle":
        if len(languages) < 2:
            raise DataError("shuffle validation needs at least 2 languages")
        sources = _load_sources(config, metric, languages[:2])
        report = validation.shuffle_baseline(
            lexicon, sources, (languages[0], languages[1]),
            config=config.metric_config(), permutations=config.permutations,
            seed=config.seed)
    elif kind == "sensitivity":
        sources = _load_sources(config, metric, languages)
        report = validation.sensitivity(
            lexicon, sources, languages, metric, j=config.sensitivity_j,
            trials=config.sensitivity_trials, seed=config.seed,
            config=config.metric_config())
    else:
        if config.gaps is None:
            raise DataError("gaps validation requires paths.gaps in the config")
        inventory = validation.load_gaps(config.gaps, config.gap_concept_map)
        subset = inventory.filtered_concepts() & set(lexicon.concepts)
        table, _ = _computed_table(config, lexicon, metric, languages,
                                   concept_subset=subset or None)
        report = validation.validate_against_gaps(table, inventory)
    report.to_json(out_dir / f"validation_{kind}.json")
    write_manifest(config, out_dir, f"validate:{kind}")
    click.echo(f"wrote validation_{kind}.json to {out_dir}")


@cli.command()
@config_option
@seed_option
@k_option
@output_option
@jobs_option
@click.option("--analysis", "analysis_kind", required=True,
              type=click.Choice(["aggregate", "matrix", "features", "polysemy",
                                 "norms"]))
def analyze(config_path, seed, k, output, jobs, analysis_kind):
    """Export aggregated tables, correlation matrices, feature correlations,
    polysemy scores, or external-norm correlations."""
    config = load_config(config_path, _overrides(seed, k, output, jobs))
    lexicon = load_lexicon(config.lexicon)
    languages = _languages(config, lexicon)
    out_dir = config.output
    out_dir.mkdir(parents=True, exist_ok=True)

    if analysis_kind == "aggregate":
        metric = config.metrics[0]
        table, _ = _computed_table(config, lexicon, metric, languages)
        for level in ("concept", "domain"):
            vector = analysis.aggregate(table, lexicon, level)
            rows = [{"lang_a": pair[0], "lang_b": pair[1], "component": comp,
                     "value": repr(float(v))}
                    for (pair, comp), v in zip(vector.ordering, vector.values)]
            write_table_csv(out_dir / f"aggregate_{metric}_{level}.csv", rows,
                            ["lang_a", "lang_b", "component", "value"])
        domain_vector = analysis.aggregate(table, lexicon, "domain")
        by_domain: dict[str, list[float]] = {}
        for (pair, domain_id), v in zip(domain_vector.ordering, domain_vector.values):
            by_domain.setdefault(domain_id, []).append(float(v))
        boxplot = {d: analysis.boxplot_stats(vals)
                   for d, vals in sorted(by_domain.items())}
        write_json(out_dir / f"boxplot_{metric}_domain.json",
                   {"metric": metric, "level": "domain", "domains": boxplot})
    elif analysis_kind == "matrix":
        vectors = {}
        for level in ("concept", "domain"):
            vecs = []
            for m in config.metrics:
                table, _ = _computed_table(config, lexicon, m, languages)
                vecs.append(analysis.aggregate(table, lexicon, level))
            result = analysis.metric_correlation_matrix(vecs, config.correlation)
            vectors[level] = {
                "labels": result["labels"],
                "matrix": [[float(x) for x in row] for row in result["matrix"]],
                "pvalues": [[float(x) for x in row] for row in result["pvalues"]],
                "n_keys": result["n_keys"],
            }
        write_json(out_dir / "heatmap_metrics.json", vectors)
    elif analysis_kind == "features":
        if config.concept_features is None:
            raise DataError("features analysis requires paths.concept_features")
        concept_features = analysis.load_concept_features(config.concept_features)
        pair_features: dict[str, dict] = {}
        if config.language_coords:
            coords = analysis.load_language_coords(config.language_coords)
            from .geodesic import geodesic_distance
            pair_features["GEO"] = {
                tuple(sorted((a, b))): geodesic_distance(coords[a], coords[b])
                for i, a in enumerate(sorted(coords))
                for b in sorted(coords)[i + 1:]}
        if config.cultural_traits:
            traits = analysis.load_cultural_traits(config.cultural_traits)
            pair_features["CLT"] = {
                tuple(sorted((a, b))): analysis.cultural_distance(traits[a], traits[b])
                for i, a in enumerate(sorted(traits))
                for b in sorted(traits)[i + 1:]}
        rows = []
        for m in config.metrics:
            table, _ = _computed_table(config, lexicon, m, languages)
            for level in ("concept", "domain"):
                vector = analysis.aggregate(table, lexicon, level)
                series = {}
                for name in ("frequency_log", "concreteness", "rate_of_change"):
                    series[name] = {c: f[name] for c, f in concept_features.items()
                                    if f[name] is not None}
                series.update(pair_features)
                for name, feature in sorted(series.items()):
                    if not feature:
                        continue
                    try:
                        r, p, n = analysis.feature_correlation(vector, feature)
                    except LexalignError as exc:
                        rows.append({"metric": m, "level": level, "feature": name,
                                     "r": "", "p": "", "n": "",
                                     "note": type(exc).__name__})
                        continue
                    rows.append({"metric": m, "level": level, "feature": name,
                                 "r": repr(r), "p": repr(p), "n": n, "note": ""})
        write_table_csv(out_dir / "feature_correlations.csv", rows,
                        ["metric", "level", "feature", "r", "p", "n", "note"])
    elif analysis_kind == "polysemy":
        if not config.clouds:
            raise DataError("polysemy analysis requires paths.clouds")
        stores = {lang: embeddings.load_clouds(p, language=lang)
                  for lang, p in config.clouds.items() if lang in languages}
        rows = []
        langs = sorted(stores)
        for i, a in enumerate(langs):
            for b in langs[i + 1:]:
                for measure in ("self_sim", "gmm_senses"):
                    try:
                        result = polysemy.polysemy_pair_score(
                            (a, b), stores, measure, seed=config.seed)
                    except LexalignError as exc:
                        rows.append({"lang_a": a, "lang_b": b, "measure": measure,
                                     "value": "", "note": type(exc).__name__})
                        continue
                    rows.append({"lang_a": a, "lang_b": b, "measure": measure,
                                 "value": repr(result.value), "note": ""})
        write_table_csv(out_dir / "polysemy_pairs.csv", rows,
                        ["lang_a", "lang_b", "measure", "value", "note"])
    else:  # norms
        if config.norms is None:
            raise DataError("norms analysis requires paths.norms")
        metric = config.metrics[0]
        table, _ = _computed_table(config, lexicon, metric, languages)
        vector = analysis.aggregate(table, lexicon, "concept")
        r, p, n = analysis.external_norm_correlation(vector, config.norms)
        write_json(out_dir / "norm_correlation.json",
                   {"metric": metric, "r": r, "p": p, "n": n})
    write_manifest(config, out_dir, f"analyze:{analysis_kind}")
    click.echo(f"wrote {analysis_kind} analysis to {out_dir}")


@cli.command()
@config_option
@click.option("--concept", required=True)
@click.option("--pair", required=True, help="Language pair, e.g. eng-fra.")
@click.option("--top-n", type=int, default=10)
@output_option
def neighbors(config_path, concept, pair, top_n, output):
    """Dump both languages' ranked neighbors with translation status."""
    config = load_config(config_path, _overrides(None, None, output, None))
    lexicon = load_lexicon(config.lexicon)
    try:
        lang_a, lang_b = pair.split("-")
    except ValueError:
        raise click.UsageError(f"--pair must look like eng-fra, got {pair!r}")
    metric = config.metrics[0]
    sources = _load_sources(config, metric, [lang_a, lang_b])
    contexts = metrics.build_contexts(lexicon, sources, [lang_a, lang_b],
                                      config.metric_config())
    out_dir = config.output
    out_dir.mkdir(parents=True, exist_ok=True)
    dump = {"concept": concept, "pair": [lang_a, lang_b], "k": config.k,
            "top_n": top_n, "directions": {}}
    for src, tgt in ((lang_a, lang_b), (lang_b, lang_a)):
        profile = directional_profile(concept, contexts[src], contexts[tgt],
                                      lexicon, config.k)
        records = profile.records[:top_n]
        dump["directions"][f"{src}->{tgt}"] = {
            "shortfall": len(profile.records) < top_n,
            "neighbors": [
                {"form": rec.form, "similarity": rec.similarity,
                 "translation": rec.translation,
                 "target_similarity": rec.target_similarity,
                 "status": rec.status}
                for rec in records],
        }
    write_json(out_dir / f"neighbors_{concept}_{lang_a}-{lang_b}.json", dump)
    click.echo(f"wrote neighbor dump to {out_dir}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except (ComputeError, LexalignError) as exc:
        click.echo(f"compute error: {exc}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
