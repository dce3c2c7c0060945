"""Run a transformer encoder over forms or corpus sentences and write
the vec-text and PCLD files consumed by the alignment toolkit."""

import hashlib
import json
import struct
import unicodedata
from pathlib import Path

import numpy as np
import torch

from .errors import CorpusUnreadable, InvalidSpec, ModelLoadFailure
from .spec import ExtractionReport, ExtractionSpec

PCLD_MAGIC = b"PCLD"
PCLD_VERSION = 1


class Encoder:
    """A loaded tokenizer/model pair exposing per-layer hidden states."""

    def __init__(self, model_id: str):
        from transformers import AutoModel, AutoTokenizer

        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_id)
            self.model = AutoModel.from_pretrained(model_id)
        except Exception as exc:
            raise ModelLoadFailure(f"cannot load model {model_id!r}: {exc}") from exc
        if not getattr(self.tokenizer, "is_fast", False):
            raise ModelLoadFailure(f"model {model_id!r} lacks a fast tokenizer")
        self.model.eval()
        self.num_layers = int(self.model.config.num_hidden_layers)
        self.hidden_size = int(self.model.config.hidden_size)

    @torch.no_grad()
    def encode_words(self, words: list[str]) -> tuple[list[list[int] | None], tuple]:
        """Encode one whitespace-tokenized sentence.

        Returns, per input word, the subword positions it occupies (or None
        if it vanished in tokenization/truncation), plus the tuple of
        hidden-state tensors indexed by layer (0 = embeddings).
        """
        encoding = self.tokenizer(words, is_split_into_words=True,
                                  truncation=True, return_tensors="pt")
        out = self.model(**encoding, output_hidden_states=True)
        positions: list[list[int] | None] = [None] * len(words)
        for token_pos, word_idx in enumerate(encoding.word_ids(0)):
            if word_idx is None:
                continue
            if positions[word_idx] is None:
                positions[word_idx] = []
            positions[word_idx].append(token_pos)
        return positions, out.hidden_states


def _layer_word_vector(hidden_states, layer: int, positions: list[int]) -> np.ndarray:
    layer_states = hidden_states[layer][0]
    return layer_states[positions].mean(dim=0).numpy().astype(np.float64)


def _write_manifest(spec: ExtractionSpec, output: Path,
                    counts: dict[str, int]) -> Path:
    corpus_digest = None
    if spec.corpus is not None and spec.corpus.exists():
        corpus_digest = hashlib.sha256(spec.corpus.read_bytes()).hexdigest()
    manifest = {
        "model": spec.model,
        "language": spec.language,
        "mode": spec.mode,
        "corpus_digest": corpus_digest,
        "counts": {form: counts[form] for form in sorted(counts)},
    }
    path = Path(f"{output}.manifest.json")
    path.write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n",
                    encoding="utf-8")
    return path


def extract_ave(spec: ExtractionSpec, output: str | Path) -> ExtractionReport:
    """Write one layer-averaged vector per form as a vec-text file.

    Each form is encoded on its own; subword representations are averaged
    within each layer of ``spec.ave_layers``, then the layers are averaged.
    Forms that tokenize to nothing are skipped with a diagnostic.
    """
    if spec.mode != "ave":
        raise InvalidSpec(f"extract_ave requires mode 'ave', got {spec.mode!r}")
    encoder = Encoder(spec.model)
    lo, hi = spec.ave_layers
    if hi > encoder.num_layers:
        raise InvalidSpec(
            f"ave_layers {spec.ave_layers} exceed the model's {encoder.num_layers} layers")

    output = Path(output)
    diagnostics: list[str] = []
    rows: list[tuple[str, np.ndarray]] = []
    for form in spec.forms:
        form = unicodedata.normalize("NFC", form)
        positions, hidden_states = encoder.encode_words([form])
        if positions[0] is None:
            diagnostics.append(f"form {form!r}: no subword tokens, skipped")
            continue
        layer_means = [_layer_word_vector(hidden_states, layer, positions[0])
                       for layer in range(lo, hi + 1)]
        rows.append((form, np.mean(layer_means, axis=0)))

    with output.open("w", encoding="utf-8") as fh:
        fh.write(f"{len(rows)} {encoder.hidden_size}\n")
        for form, vec in rows:
            fh.write(form + " " + " ".join(repr(float(x)) for x in vec) + "\n")
    counts = {form: 1 for form, _ in rows}
    manifest = _write_manifest(spec, output, counts)
    return ExtractionReport(output, manifest, counts, diagnostics)


def _read_corpus(path: Path) -> list[str]:
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusUnreadable(f"cannot read corpus {path}: {exc}") from exc
    return [unicodedata.normalize("NFC", line)
            for line in text.splitlines() if line.strip()]


def write_clouds_pcld(clouds: dict[str, np.ndarray], dim: int,
                      path: str | Path) -> None:
    """Write the PCLD binary format (float32 LE payload)."""
    with Path(path).open("wb") as fh:
        fh.write(PCLD_MAGIC)
        fh.write(struct.pack("<II", PCLD_VERSION, dim))
        for form, vectors in clouds.items():
            vectors = np.asarray(vectors, dtype="<f4")
            raw = form.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<I", vectors.shape[0]))
            fh.write(vectors.tobytes())


def extract_cloud(spec: ExtractionSpec, output: str | Path) -> ExtractionReport:
    """Write one point cloud per form as a PCLD file.

    Sentences are matched by exact whitespace-token comparison after NFC
    (optionally lowercased), taken first-come up to the per-form threshold.
    Every occurrence inside a kept sentence yields one cloud vector from
    ``spec.cloud_layer``; the vector count per form also respects the
    threshold so downstream loaders never truncate.
    """
    if spec.mode != "cloud":
        raise InvalidSpec(f"extract_cloud requires mode 'cloud', got {spec.mode!r}")
    encoder = Encoder(spec.model)
    if spec.cloud_layer > encoder.num_layers:
        raise InvalidSpec(
            f"cloud_layer {spec.cloud_layer} exceeds the model's {encoder.num_layers} layers")

    output = Path(output)
    sentences = _read_corpus(spec.corpus)
    tokenized = [s.split() for s in sentences]
    match_key = (lambda t: t.lower()) if spec.lowercase else (lambda t: t)

    diagnostics: list[str] = []
    # per form: list of (sentence index, word index) occurrences, first-N
    wanted: dict[str, list[tuple[int, int]]] = {}
    for form in spec.forms:
        form = unicodedata.normalize("NFC", form)
        if len(form.split()) != 1:
            diagnostics.append(f"form {form!r}: multiword, excluded")
            continue
        key = match_key(form)
        occurrences: list[tuple[int, int]] = []
        matched_sentences = 0
        for s_idx, words in enumerate(tokenized):
            hits = [w_idx for w_idx, word in enumerate(words)
                    if match_key(word) == key]
            if not hits:
                continue
            matched_sentences += 1
            room = spec.max_sentences_per_word - len(occurrences)
            occurrences.extend((s_idx, w_idx) for w_idx in hits[:room])
            if (matched_sentences >= spec.max_sentences_per_word
                    or len(occurrences) >= spec.max_sentences_per_word):
                break
        if not occurrences:
            diagnostics.append(f"form {form!r}: no corpus occurrences, omitted")
            continue
        wanted[form] = occurrences

    needed_sentences = sorted({s for occ in wanted.values() for s, _ in occ})
    sentence_vectors: dict[int, dict[int, np.ndarray]] = {}
    for s_idx in needed_sentences:
        words = tokenized[s_idx]
        positions, hidden_states = encoder.encode_words(words)
        per_word: dict[int, np.ndarray] = {}
        for w_idx, pos in enumerate(positions):
            if pos is not None:
                per_word[w_idx] = _layer_word_vector(
                    hidden_states, spec.cloud_layer, pos)
        sentence_vectors[s_idx] = per_word

    clouds: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    for form, occurrences in wanted.items():
        vectors = []
        for s_idx, w_idx in occurrences:
            vec = sentence_vectors[s_idx].get(w_idx)
            if vec is None:
                diagnostics.append(
                    f"form {form!r}: occurrence in sentence {s_idx + 1} lost to "
                    "tokenization, skipped")
                continue
            vectors.append(vec)
        if not vectors:
            diagnostics.append(f"form {form!r}: no extractable occurrences, omitted")
            continue
        clouds[form] = np.vstack(vectors)
        counts[form] = len(vectors)

    write_clouds_pcld(clouds, encoder.hidden_size, output)
    manifest = _write_manifest(spec, output, counts)
    return ExtractionReport(output, manifest, counts, diagnostics)
