"""Word vector spaces, contextual point clouds, and exact k-NN search.

Search is always an exhaustive scan over the lexicon-restricted candidate
set (about a thousand words), so it is exact by construction. Ties are broken
by lexicographic form order for cross-platform determinism.
"""

from __future__ import annotations

import json
import struct
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadHeader,
    BadMagic,
    DimensionMismatch,
    EmptyCandidateSet,
    EmptyCloud,
    UnknownQuery,
    ZeroNorm,
)

CLOUD_THRESHOLD = 1000
PCLD_MAGIC = b"PCLD"
PCLD_VERSION = 1


def cosine(u, v) -> float:
    """Cosine similarity, clamped to [-1, 1] against floating-point overshoot."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatch(f"{u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroNorm("cosine undefined for zero-norm vector")
    return min(1.0, max(-1.0, float(np.dot(u, v)) / (nu * nv)))


@dataclass
class NeighborList:
    query: str
    neighbors: list[tuple[str, float]]
    k: int
    shortfall: bool = False

    @property
    def forms(self) -> list[str]:
        return [form for form, _ in self.neighbors]

    @property
    def similarities(self) -> np.ndarray:
        return np.array([s for _, s in self.neighbors], dtype=np.float64)


class VectorSpace:
    """One language's static (or layer-averaged contextual) word vectors."""

    def __init__(self, language: str, dim: int, entries: dict[str, np.ndarray],
                 diagnostics: list[str] | None = None):
        self.language = language
        self.dim = dim
        self.diagnostics = diagnostics or []
        self._forms = sorted(entries)
        self._index = {form: i for i, form in enumerate(self._forms)}
        if self._forms:
            matrix = np.stack([np.asarray(entries[f], dtype=np.float64) for f in self._forms])
            if matrix.shape[1] != dim:
                raise DimensionMismatch(f"entries have dim {matrix.shape[1]}, expected {dim}")
        else:
            matrix = np.zeros((0, dim), dtype=np.float64)
        # per-row norms so each matches np.linalg.norm of the single vector bitwise
        norms = np.array([np.linalg.norm(matrix[i]) for i in range(matrix.shape[0])])
        if np.any(norms == 0.0):
            bad = [self._forms[i] for i in np.flatnonzero(norms == 0.0)]
            raise ZeroNorm(f"zero-norm entries: {bad[:5]}")
        self._matrix = matrix
        self._norms = norms

    def __contains__(self, form: str) -> bool:
        return form in self._index

    def __len__(self) -> int:
        return len(self._forms)

    @property
    def forms(self) -> list[str]:
        return list(self._forms)

    def vector(self, form: str) -> np.ndarray:
        try:
            return self._matrix[self._index[form]]
        except KeyError:
            raise UnknownQuery(f"{form!r} not in {self.language} space") from None

    def similarities_to(self, form: str, candidates: list[str]) -> np.ndarray:
        """Cosine of ``form`` against each candidate.

        Computed per pair (not via one matrix product) so every similarity is
        bitwise identical to cosine() on the same vectors, independent of
        which other candidates are present.
        """
        i = self._index.get(form)
        if i is None:
            raise UnknownQuery(f"{form!r} not in {self.language} space")
        q = self._matrix[i]
        qn = self._norms[i]
        matrix, norms, index = self._matrix, self._norms, self._index
        sims = np.empty(len(candidates), dtype=np.float64)
        for j, cand in enumerate(candidates):
            row = index[cand]
            s = float(np.dot(matrix[row], q)) / (norms[row] * qn)
            sims[j] = min(1.0, max(-1.0, s))
        return sims

    def similarity(self, a: str, b: str) -> float:
        return cosine(self.vector(a), self.vector(b))

    def knn(self, query: str, k: int, restriction: set[str]) -> NeighborList:
        return knn(self, query, k, restriction)


def load_vectors(path: str | Path, format: str = "vec-text", language: str = "") -> VectorSpace:
    """Load a fastText-style text file: header ``N D``, rows ``form v1 .. vD``.

    Zero-norm and malformed rows are skipped with a diagnostic, never fatal.
    """
    if format != "vec-text":
        raise ValueError(f"unsupported vector format: {format}")
    path = Path(path)
    diagnostics: list[str] = []
    entries: dict[str, np.ndarray] = {}
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise BadHeader(f"{path}: expected 'N D' header, got {header!r}")
        try:
            n, dim = int(header[0]), int(header[1])
        except ValueError:
            raise BadHeader(f"{path}: non-integer header fields {header!r}") from None
        if dim <= 0:
            raise BadHeader(f"{path}: non-positive dimension {dim}")
        for line_no, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                diagnostics.append(f"line {line_no}: expected {dim} values, got {len(parts) - 1}")
                continue
            form = unicodedata.normalize("NFC", parts[0])
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError:
                diagnostics.append(f"line {line_no}: non-numeric value")
                continue
            if not np.all(np.isfinite(vec)):
                diagnostics.append(f"line {line_no}: non-finite value")
                continue
            if np.linalg.norm(vec) == 0.0:
                diagnostics.append(f"line {line_no}: zero-norm vector for {form!r}, skipped")
                continue
            if form in entries:
                diagnostics.append(f"line {line_no}: duplicate form {form!r}, first kept")
                continue
            entries[form] = vec
    if len(entries) != n:
        diagnostics.append(f"header declared {n} rows, loaded {len(entries)}")
    return VectorSpace(language or path.stem, dim, entries, diagnostics)


@dataclass
class PointCloud:
    """A word's occurrence vectors; at most CLOUD_THRESHOLD members."""
    form: str
    vectors: np.ndarray  # (count, dim)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2 or self.vectors.shape[0] == 0:
            raise EmptyCloud(f"cloud for {self.form!r} is empty")
        if self.vectors.shape[0] > CLOUD_THRESHOLD:
            raise ValueError(f"cloud for {self.form!r} exceeds threshold {CLOUD_THRESHOLD}")
        norms = np.linalg.norm(self.vectors, axis=1)
        if np.any(norms == 0.0):
            raise ZeroNorm(f"zero-norm member in cloud for {self.form!r}")

    def __len__(self) -> int:
        return self.vectors.shape[0]


def pointcloud_distance(a: PointCloud, b: PointCloud, aggregation: str = "min") -> float:
    """Aggregate over all pairwise cosines between two clouds (default min)."""
    if a.vectors.shape[1] != b.vectors.shape[1]:
        raise DimensionMismatch(f"{a.vectors.shape[1]} vs {b.vectors.shape[1]}")
    if len(a) == 1 and len(b) == 1:
        # degenerate case shares cosine()'s exact code path
        return cosine(a.vectors[0], b.vectors[0])
    na = a.vectors / np.linalg.norm(a.vectors, axis=1, keepdims=True)
    nb = b.vectors / np.linalg.norm(b.vectors, axis=1, keepdims=True)
    sims = np.clip(na @ nb.T, -1.0, 1.0)
    if aggregation == "min":
        return float(sims.min())
    if aggregation == "max":
        return float(sims.max())
    if aggregation == "mean":
        return float(sims.mean())
    raise ValueError(f"unknown aggregation: {aggregation}")


class PointCloudStore:
    """Per-word point clouds of one language, uniform dimension."""

    def __init__(self, language: str, dim: int, clouds: dict[str, PointCloud],
                 diagnostics: list[str] | None = None, aggregation: str = "min"):
        for form, cloud in clouds.items():
            if cloud.vectors.shape[1] != dim:
                raise DimensionMismatch(
                    f"cloud for {form!r} has dim {cloud.vectors.shape[1]}, expected {dim}")
        self.language = language
        self.dim = dim
        self.clouds = clouds
        self.diagnostics = diagnostics or []
        self.aggregation = aggregation

    def __contains__(self, form: str) -> bool:
        return form in self.clouds

    def __len__(self) -> int:
        return len(self.clouds)

    @property
    def forms(self) -> list[str]:
        return sorted(self.clouds)

    def cloud(self, form: str) -> PointCloud:
        try:
            return self.clouds[form]
        except KeyError:
            raise UnknownQuery(f"{form!r} not in {self.language} cloud store") from None

    def similarity(self, a: str, b: str) -> float:
        return pointcloud_distance(self.cloud(a), self.cloud(b), self.aggregation)

    def knn(self, query: str, k: int, restriction: set[str]) -> NeighborList:
        return knn_cloud(self, query, k, restriction, self.aggregation)


def _clean_cloud(form: str, raw: np.ndarray, dim: int, diagnostics: list[str]) -> PointCloud | None:
    if raw.shape[0] > CLOUD_THRESHOLD:
        diagnostics.append(f"{form!r}: {raw.shape[0]} vectors truncated to {CLOUD_THRESHOLD}")
        raw = raw[:CLOUD_THRESHOLD]
    norms = np.linalg.norm(raw, axis=1)
    if np.any(norms == 0.0):
        dropped = int(np.sum(norms == 0.0))
        diagnostics.append(f"{form!r}: dropped {dropped} zero-norm members")
        raw = raw[norms > 0.0]
    if raw.shape[0] == 0:
        diagnostics.append(f"{form!r}: cloud empty after cleaning, omitted")
        return None
    return PointCloud(form, raw)


def load_clouds(path: str | Path, format: str | None = None, language: str = "",
                aggregation: str = "min") -> PointCloudStore:
    """Load a point-cloud store from PCLD binary or JSONL.

    Format is auto-detected from the magic bytes when not given. Oversize
    clouds are truncated to the threshold with a diagnostic.
    """
    path = Path(path)
    if format is None:
        with path.open("rb") as fh:
            format = "pcld-binary" if fh.read(4) == PCLD_MAGIC else "jsonl"
    diagnostics: list[str] = []
    clouds: dict[str, PointCloud] = {}
    dim: int | None = None

    if format == "pcld-binary":
        with path.open("rb") as fh:
            magic = fh.read(4)
            if magic != PCLD_MAGIC:
                raise BadMagic(f"{path}: bad magic {magic!r}")
            _version, dim = struct.unpack("<II", fh.read(8))
            while True:
                head = fh.read(4)
                if not head:
                    break
                (form_len,) = struct.unpack("<I", head)
                form = fh.read(form_len).decode("utf-8")
                (count,) = struct.unpack("<I", fh.read(4))
                raw = np.frombuffer(fh.read(4 * count * dim), dtype="<f4")
                raw = raw.reshape(count, dim).astype(np.float64)
                cloud = _clean_cloud(form, raw, dim, diagnostics)
                if cloud is not None:
                    clouds[form] = cloud
    elif format == "jsonl":
        with path.open(encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                record = json.loads(line)
                form = unicodedata.normalize("NFC", record["form"])
                raw = np.asarray(record["vectors"], dtype="<f4").astype(np.float64)
                if raw.ndim != 2:
                    diagnostics.append(f"line {line_no}: vectors not a matrix, skipped")
                    continue
                if dim is None:
                    dim = raw.shape[1]
                elif raw.shape[1] != dim:
                    raise DimensionMismatch(
                        f"{path}:{line_no}: dim {raw.shape[1]} != {dim}")
                cloud = _clean_cloud(form, raw, dim, diagnostics)
                if cloud is not None:
                    clouds[form] = cloud
    else:
        raise ValueError(f"unsupported cloud format: {format}")

    if dim is None:
        raise BadHeader(f"{path}: no records")
    return PointCloudStore(language or path.stem, dim, clouds, diagnostics, aggregation)


def write_clouds_pcld(clouds: dict[str, np.ndarray], dim: int, path: str | Path) -> None:
    """Write the PCLD binary format (float32 LE payload)."""
    with Path(path).open("wb") as fh:
        fh.write(PCLD_MAGIC)
        fh.write(struct.pack("<II", PCLD_VERSION, dim))
        for form in clouds:
            vectors = np.asarray(clouds[form], dtype="<f4")
            raw = form.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<I", vectors.shape[0]))
            fh.write(vectors.tobytes())


def _rank_candidates(query: str, candidates: list[str], sims: np.ndarray,
                     k: int) -> NeighborList:
    order = sorted(range(len(candidates)), key=lambda i: (-sims[i], candidates[i]))
    top = order[:k]
    neighbors = [(candidates[i], float(sims[i])) for i in top]
    return NeighborList(query, neighbors, k, shortfall=len(neighbors) < k)


def knn(space: VectorSpace, query: str, k: int, restriction: set[str]) -> NeighborList:
    """Exact top-k by cosine over (restriction ∩ space) \\ {query}."""
    if query not in space:
        raise UnknownQuery(f"{query!r} not in {space.language} space")
    candidates = sorted(f for f in restriction if f in space and f != query)
    if not candidates:
        raise EmptyCandidateSet(f"no candidates for {query!r}")
    sims = space.similarities_to(query, candidates)
    return _rank_candidates(query, candidates, sims, k)


def knn_cloud(store: PointCloudStore, query: str, k: int, restriction: set[str],
              aggregation: str = "min") -> NeighborList:
    """As knn, under the point-cloud distance (higher aggregated cosine = nearer)."""
    query_cloud = store.cloud(query)
    candidates = sorted(f for f in restriction if f in store and f != query)
    if not candidates:
        raise EmptyCandidateSet(f"no candidates for {query!r}")
    sims = np.array([pointcloud_distance(query_cloud, store.cloud(c), aggregation)
                     for c in candidates])
    return _rank_candidates(query, candidates, sims, k)


def match_vocabulary(space, forms: list[str], lowercase_fallback: bool = True) -> dict[str, str]:
    """Map lexicon forms to embedding vocabulary keys.

    Exact NFC match first; optional lowercase fallback second. Forms with no
    match are omitted (their concepts are skipped downstream).
    """
    mapping: dict[str, str] = {}
    for form in forms:
        if form in space:
            mapping[form] = form
        elif lowercase_fallback and form.lower() in space:
            mapping[form] = form.lower()
    return mapping
