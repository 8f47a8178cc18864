"""Embedding providers, normalization, and the on-disk vector store.

Vectors are stored as float32; similarity math downstream runs in float64.
The deterministic hash provider stands in for real encoders in tests and
demos; remote_embed talks to any service implementing the /embed protocol.
"""

from __future__ import annotations

import json
import re
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np
import requests

from ._hashing import GramHasher
from .errors import FormatError, ProtocolError, TransportError, ValidationError
from .perturb import FIELD_SEPARATOR, DocumentVariant

Key = tuple[str, str]  # (doc_id, code)


@dataclass(eq=False)
class EmbeddingRecord:
    doc_id: str
    code: str
    vector: np.ndarray  # 1-D float32

    @property
    def key(self) -> Key:
        return (self.doc_id, self.code)


class EmbeddingStore:
    """Keyed (doc_id, code) -> vector map with a single fixed dimension.

    Lookups of missing keys are explicit (None / KeyError), never a zero
    vector. Immutable by convention once a pipeline stage has built it.
    """

    def __init__(self, model_name: str = "", dimension: int | None = None):
        self.model_name = model_name
        self._dimension = dimension
        self._records: dict[Key, np.ndarray] = {}

    @property
    def dimension(self) -> int | None:
        return self._dimension

    def add(self, record: EmbeddingRecord) -> None:
        vec = np.asarray(record.vector, dtype=np.float32)
        if vec.ndim != 1 or vec.size < 1:
            raise ValidationError(f"{record.key}: vector must be 1-D and non-empty")
        if not np.isfinite(vec).all():
            raise ValidationError(f"{record.key}: vector contains NaN/Inf")
        if self._dimension is None:
            self._dimension = int(vec.size)
        elif vec.size != self._dimension:
            raise ValidationError(
                f"{record.key}: dimension {vec.size} != store dimension {self._dimension}"
            )
        if record.key in self._records:
            raise ValidationError(f"duplicate embedding key {record.key}")
        self._records[record.key] = vec

    def add_all(self, records: Iterable[EmbeddingRecord]) -> None:
        for r in records:
            self.add(r)

    def get(self, doc_id: str, code: str) -> EmbeddingRecord | None:
        vec = self._records.get((doc_id, code))
        return None if vec is None else EmbeddingRecord(doc_id, code, vec)

    def vector(self, key: Key) -> np.ndarray:
        try:
            return self._records[key]
        except KeyError:
            raise ValidationError(f"missing embedding for key {key}") from None

    def __contains__(self, key: Key) -> bool:
        return key in self._records

    def __len__(self) -> int:
        return len(self._records)

    def keys(self) -> list[Key]:
        return sorted(self._records)

    def keys_for_code(self, code: str) -> list[Key]:
        return sorted(k for k in self._records if k[1] == code)

    def items(self) -> Iterator[tuple[Key, np.ndarray]]:
        for key in self.keys():
            yield key, self._records[key]


# ---------------------------------------------------------------------------
# Providers
# ---------------------------------------------------------------------------

_hashers: dict[int, GramHasher] = {}
_WS_RUN = re.compile(r"\s+")


def hash_embed(variant: DocumentVariant, dimension: int = 64) -> EmbeddingRecord:
    """Deterministic character-3-gram bucket embedding (the test oracle provider).

    Case-folds title + ". " + abstract, collapses whitespace runs to single
    spaces (so pure whitespace noise maps to near-identical vectors), buckets
    every 3-gram with a stable hash, and L2-normalizes. Text too short for a
    3-gram maps to the unit vector on bucket 0.
    """
    if dimension < 8:
        raise ValidationError("hash_embed dimension must be >= 8")
    hasher = _hashers.get(dimension)
    if hasher is None:
        hasher = _hashers[dimension] = GramHasher(dimension)
    text = _WS_RUN.sub(" ", (variant.title + FIELD_SEPARATOR + variant.abstract).casefold())
    counts = np.zeros(dimension, dtype=np.float64)
    for i in range(len(text) - 2):
        counts[hasher.bucket(text[i : i + 3])] += 1.0
    norm = float(np.linalg.norm(counts))
    if norm == 0.0:
        counts[0] = 1.0
        norm = 1.0
    return EmbeddingRecord(variant.doc_id, variant.code, (counts / norm).astype(np.float32))


def hash_embed_all(variants: Iterable[DocumentVariant], dimension: int = 64) -> EmbeddingStore:
    store = EmbeddingStore(model_name=f"hash3-{dimension}")
    store.add_all(hash_embed(v, dimension) for v in variants)
    return store


@dataclass
class RemoteConfig:
    endpoint: str
    model: str
    batch_size: int = 32
    max_attempts: int = 3
    timeout: float = 60.0
    parallelism: int = 1
    backoff: float = 0.5
    sleep: Callable[[float], None] = field(default=time.sleep, repr=False)


def remote_embed(
    variants: Sequence[DocumentVariant],
    endpoint: str,
    model: str,
    *,
    config: RemoteConfig | None = None,
    session: requests.Session | None = None,
) -> list[EmbeddingRecord]:
    """Embed variants through a remote /embed service, batched with retries.

    Transient failures (connection errors, 5xx) are retried with exponential
    backoff up to max_attempts; a malformed request (4xx) or a contract
    violation in the response (dimension drift, missing id) is a protocol
    error and is not retried.
    """
    cfg = config or RemoteConfig(endpoint=endpoint, model=model)
    cfg.endpoint, cfg.model = endpoint, model
    sess = session or requests.Session()
    batches = [
        list(variants[i : i + cfg.batch_size]) for i in range(0, len(variants), cfg.batch_size)
    ]
    results: list[list[EmbeddingRecord]] = [[] for _ in batches]
    declared_dim: list[int | None] = [None]

    def run(idx: int) -> None:
        results[idx] = _embed_batch(batches[idx], cfg, sess, declared_dim)

    if cfg.parallelism > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            list(pool.map(run, range(len(batches))))
    else:
        for i in range(len(batches)):
            run(i)
    return [record for batch in results for record in batch]


def _embed_batch(
    batch: list[DocumentVariant],
    cfg: RemoteConfig,
    sess: requests.Session,
    declared_dim: list[int | None],
) -> list[EmbeddingRecord]:
    url = cfg.endpoint.rstrip("/") + "/embed"
    payload = {
        "model": cfg.model,
        "inputs": [
            {"id": v.doc_id, "code": v.code, "title": v.title, "abstract": v.abstract}
            for v in batch
        ],
    }
    batch_ids = [v.doc_id for v in batch]
    last_failure = "no attempt made"
    for attempt in range(cfg.max_attempts):
        if attempt:
            cfg.sleep(cfg.backoff * 2 ** (attempt - 1))
        try:
            response = sess.post(url, json=payload, timeout=cfg.timeout)
        except requests.RequestException as exc:
            last_failure = f"{type(exc).__name__}: {exc}"
            continue
        if 500 <= response.status_code < 600:
            last_failure = f"HTTP {response.status_code}"
            continue
        if response.status_code != 200:
            raise ProtocolError(
                f"{url}: HTTP {response.status_code} for batch {batch_ids}: {response.text[:200]}"
            )
        return _parse_batch_response(response, batch, url, declared_dim)
    raise TransportError(
        f"{url}: unreachable after {cfg.max_attempts} attempts "
        f"(last failure: {last_failure}) for batch ids {batch_ids}"
    )


def _parse_batch_response(
    response: requests.Response,
    batch: list[DocumentVariant],
    url: str,
    declared_dim: list[int | None],
) -> list[EmbeddingRecord]:
    try:
        body = response.json()
        dim = int(body["dim"])
        by_key: dict[Key, list[float]] = {
            (item["id"], item["code"]): item["vector"] for item in body["vectors"]
        }
    except (ValueError, KeyError, TypeError) as exc:
        raise ProtocolError(f"{url}: malformed response body: {exc}") from exc
    if declared_dim[0] is None:
        declared_dim[0] = dim
    elif dim != declared_dim[0]:
        raise ProtocolError(f"{url}: dimension changed across batches: {declared_dim[0]} -> {dim}")
    records = []
    for v in batch:
        vec = by_key.get((v.doc_id, v.code))
        if vec is None:
            raise ProtocolError(f"{url}: response missing id ({v.doc_id}, {v.code})")
        arr = np.asarray(vec, dtype=np.float32)
        if arr.shape != (dim,):
            raise ProtocolError(
                f"{url}: vector for ({v.doc_id}, {v.code}) has length {arr.size}, declared {dim}"
            )
        records.append(EmbeddingRecord(v.doc_id, v.code, arr))
    return records


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


def l2_normalize(record: EmbeddingRecord) -> EmbeddingRecord:
    """Scale to unit Euclidean norm; a zero vector is an upstream fault."""
    vec = record.vector.astype(np.float64)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ValidationError(f"cannot normalize zero vector for {record.key}")
    return EmbeddingRecord(record.doc_id, record.code, (vec / norm).astype(np.float32))


def l2_normalize_store(store: EmbeddingStore) -> EmbeddingStore:
    out = EmbeddingStore(model_name=store.model_name, dimension=store.dimension)
    for (doc_id, code), vec in store.items():
        out.add(l2_normalize(EmbeddingRecord(doc_id, code, vec)))
    return out


def standardize(
    store: EmbeddingStore, reference: Iterable[Key] | None = None, sigma_floor: float = 1e-8
) -> EmbeddingStore:
    """Per-dimension z-scoring: (v - mu) / max(sigma, floor), stats over the reference keys.

    The default reference is every T+A record; mean and population standard
    deviation are computed in float64 and applied to every vector in the store.
    """
    ref_keys = sorted(reference) if reference is not None else store.keys_for_code("T+A")
    if len(ref_keys) < 2:
        raise ValidationError("standardize requires at least 2 reference vectors")
    ref = np.stack([store.vector(k) for k in ref_keys]).astype(np.float64)
    mu = ref.mean(axis=0)
    sigma = np.maximum(ref.std(axis=0), sigma_floor)
    out = EmbeddingStore(model_name=store.model_name, dimension=store.dimension)
    for (doc_id, code), vec in store.items():
        standardized = (vec.astype(np.float64) - mu) / sigma
        out.add(EmbeddingRecord(doc_id, code, standardized.astype(np.float32)))
    return out


def normalize_store(store: EmbeddingStore, mode: str) -> EmbeddingStore:
    if mode == "none":
        return store
    if mode == "l2":
        return l2_normalize_store(store)
    if mode == "standardize":
        return standardize(store)
    raise ValidationError(f"unknown normalization {mode!r} (expected none, l2, standardize)")


# ---------------------------------------------------------------------------
# Store persistence: binary NBRV and JSONL
# ---------------------------------------------------------------------------

NBRV_MAGIC = b"NBRV"
NBRV_VERSION = 1


def save_store(store: EmbeddingStore, path: str | Path, fmt: str = "nbrv") -> None:
    if fmt == "nbrv":
        _save_nbrv(store, Path(path))
    elif fmt == "jsonl":
        _save_jsonl(store, Path(path))
    else:
        raise ValidationError(f"unknown store format {fmt!r} (expected nbrv or jsonl)")


def load_store(path: str | Path) -> EmbeddingStore:
    """Load a store, sniffing NBRV magic vs JSONL."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == NBRV_MAGIC:
        return _load_nbrv(path)
    return _load_jsonl(path)


def _save_nbrv(store: EmbeddingStore, path: Path) -> None:
    dim = store.dimension or 0
    name_bytes = store.model_name.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(NBRV_MAGIC)
        fh.write(struct.pack("<III", NBRV_VERSION, dim, len(store)))
        for (doc_id, code), vec in store.items():
            id_bytes = doc_id.encode("utf-8")
            code_bytes = code.encode("utf-8")
            fh.write(struct.pack("<H", len(id_bytes)))
            fh.write(id_bytes)
            fh.write(struct.pack("<H", len(code_bytes)))
            fh.write(code_bytes)
            fh.write(vec.astype("<f4").tobytes())
        # optional trailer: readers of the bare layout can stop after the records
        fh.write(struct.pack("<H", len(name_bytes)))
        fh.write(name_bytes)


def _read_exact(fh, n: int, path: Path, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise FormatError(f"{path}: truncated while reading {what}")
    return data


def _load_nbrv(path: Path) -> EmbeddingStore:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, path, "magic")
        if magic != NBRV_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected {NBRV_MAGIC!r}")
        version, dim, count = struct.unpack("<III", _read_exact(fh, 12, path, "header"))
        if version != NBRV_VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        store = EmbeddingStore(dimension=dim if count else None)
        for _ in range(count):
            (id_len,) = struct.unpack("<H", _read_exact(fh, 2, path, "doc_id length"))
            doc_id = _read_exact(fh, id_len, path, "doc_id").decode("utf-8")
            (code_len,) = struct.unpack("<H", _read_exact(fh, 2, path, "code length"))
            code = _read_exact(fh, code_len, path, "code").decode("utf-8")
            raw = _read_exact(fh, 4 * dim, path, f"vector for ({doc_id}, {code})")
            vec = np.frombuffer(raw, dtype="<f4").copy()
            store.add(EmbeddingRecord(doc_id, code, vec))
        trailer = fh.read()
    if trailer:
        if len(trailer) < 2:
            raise FormatError(f"{path}: truncated trailer")
        (name_len,) = struct.unpack("<H", trailer[:2])
        if len(trailer) != 2 + name_len:
            raise FormatError(f"{path}: trailer length mismatch")
        store.model_name = trailer[2:].decode("utf-8")
    return store


def _save_jsonl(store: EmbeddingStore, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for (doc_id, code), vec in store.items():
            fh.write(
                json.dumps(
                    {"doc_id": doc_id, "code": code, "vector": [float(x) for x in vec]},
                    ensure_ascii=False,
                )
            )
            fh.write("\n")


def _load_jsonl(path: Path) -> EmbeddingStore:
    store = EmbeddingStore()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                r = json.loads(line)
                record = EmbeddingRecord(
                    r["doc_id"], r["code"], np.asarray(r["vector"], dtype=np.float32)
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{path}:{lineno}: bad store record: {exc}") from exc
            store.add(record)
    return store
