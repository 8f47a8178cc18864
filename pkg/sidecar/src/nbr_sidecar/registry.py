"""Model registry: per-model input composition, pooling, and encoder backends.

Three backend families:
  hash  - character n-gram bucketing; dependency-free reference encoder
  toy   - a small randomly initialized (seeded) transformer with real
          tokenization, truncation, padding masks, and pooling; useful for
          exercising the full serving path without pretrained weights
  hf    - any local/remote transformers checkpoint (SciBERT-family etc.)

All encoders are deterministic for fixed weights and run in inference mode.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger("nbr_sidecar")

ENV_REAL_MODEL = "NBR_SIDECAR_REAL_MODEL"


@dataclass(frozen=True)
class ModelRegistryEntry:
    """How one served model composes its input and pools its output."""

    name: str
    backend: str  # hash | toy | hf
    dim: int
    separator: str = " "
    max_chars: int = 20000  # composition-level truncation, flagged when hit
    max_tokens: int = 128  # sequence truncation for transformer backends
    pooling: str = "first"  # first | mean
    seed: int = 1234  # toy backend weight seed
    source: str = ""  # hf checkpoint name or path
    layers: int = 2
    heads: int = 4

    def compose(self, title: str, abstract: str) -> tuple[str, bool]:
        """Join the non-empty fields; returns (text, truncated_at_char_level)."""
        parts = [p for p in (title, abstract) if p]
        text = self.separator.join(parts)
        if len(text) > self.max_chars:
            return text[: self.max_chars], True
        return text, False

    def describe(self) -> dict:
        return {
            "name": self.name,
            "backend": self.backend,
            "dim": self.dim,
            "separator": self.separator,
            "max_chars": self.max_chars,
            "max_tokens": self.max_tokens,
            "pooling": self.pooling,
        }


class HashNgramEncoder:
    """Unit-norm character-3-gram bucket vectors (sha256 bucketing)."""

    def __init__(self, entry: ModelRegistryEntry):
        self.entry = entry

    def encode(self, texts: list[str]) -> np.ndarray:
        dim = self.entry.dim
        out = np.zeros((len(texts), dim), dtype=np.float32)
        for row, text in enumerate(texts):
            folded = " ".join(text.casefold().split())
            for i in range(len(folded) - 2):
                gram = folded[i : i + 3].encode("utf-8")
                bucket = int.from_bytes(hashlib.sha256(gram).digest()[:8], "big") % dim
                out[row, bucket] += 1.0
            norm = float(np.linalg.norm(out[row]))
            if norm == 0.0:
                out[row, 0] = 1.0
            else:
                out[row] /= norm
        return out


class ToyTransformerEncoder:
    """Seeded random-weight transformer with hashed-byte tokenization.

    Not a trained model; it exists so the serving contract (truncation,
    padding invariance, pooling, determinism) can be exercised end to end on
    machines without checkpoint access.
    """

    VOCAB = 4096
    BOS = 1
    PAD = 0

    def __init__(self, entry: ModelRegistryEntry):
        import torch

        self.entry = entry
        self.torch = torch
        torch.manual_seed(entry.seed)
        self.embedding = torch.nn.Embedding(self.VOCAB, entry.dim, padding_idx=self.PAD)
        self.positions = torch.nn.Embedding(entry.max_tokens, entry.dim)
        layer = torch.nn.TransformerEncoderLayer(
            d_model=entry.dim,
            nhead=entry.heads,
            dim_feedforward=2 * entry.dim,
            dropout=0.0,
            batch_first=True,
        )
        # plain masked attention; the nested-tensor fast path is still a prototype
        self.encoder = torch.nn.TransformerEncoder(
            layer, num_layers=entry.layers, enable_nested_tensor=False
        )
        for module in (self.embedding, self.positions, self.encoder):
            module.eval()
            for p in module.parameters():
                p.requires_grad_(False)

    def _token_ids(self, text: str) -> list[int]:
        # word-level hashing keeps the id sequence stable and padding-free
        ids = [self.BOS]
        for word in text.casefold().split():
            digest = hashlib.sha256(word.encode("utf-8")).digest()
            ids.append(2 + int.from_bytes(digest[:4], "big") % (self.VOCAB - 2))
        return ids[: self.entry.max_tokens]

    def encode(self, texts: list[str]) -> np.ndarray:
        torch = self.torch
        token_rows = [self._token_ids(t) for t in texts]
        width = max(len(r) for r in token_rows)
        batch = torch.full((len(texts), width), self.PAD, dtype=torch.long)
        mask = torch.ones((len(texts), width), dtype=torch.bool)  # True = padding
        for i, row in enumerate(token_rows):
            batch[i, : len(row)] = torch.tensor(row, dtype=torch.long)
            mask[i, : len(row)] = False
        with torch.no_grad():
            states = self.embedding(batch) + self.positions.weight[:width][None, :, :]
            states = self.encoder(states, src_key_padding_mask=mask)
            if self.entry.pooling == "first":
                pooled = states[:, 0, :]
            else:
                keep = (~mask).unsqueeze(-1).to(states.dtype)
                pooled = (states * keep).sum(dim=1) / keep.sum(dim=1)
        return pooled.numpy().astype(np.float32)


class HFTransformerEncoder:
    """Pretrained checkpoint via transformers; first-token or masked-mean pooling."""

    def __init__(self, entry: ModelRegistryEntry):
        import torch
        from transformers import AutoModel, AutoTokenizer

        self.entry = entry
        self.torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(entry.source)
        self.model = AutoModel.from_pretrained(entry.source)
        self.model.eval()

    def encode(self, texts: list[str]) -> np.ndarray:
        torch = self.torch
        encoded = self.tokenizer(
            texts,
            padding=True,
            truncation=True,
            max_length=self.entry.max_tokens,
            return_tensors="pt",
        )
        with torch.no_grad():
            output = self.model(**encoded).last_hidden_state
            if self.entry.pooling == "first":
                pooled = output[:, 0, :]
            else:
                mask = encoded["attention_mask"].unsqueeze(-1).to(output.dtype)
                pooled = (output * mask).sum(dim=1) / mask.sum(dim=1)
        return pooled.numpy().astype(np.float32)


_BACKENDS = {
    "hash": HashNgramEncoder,
    "toy": ToyTransformerEncoder,
    "hf": HFTransformerEncoder,
}


@dataclass
class Registry:
    entries: dict[str, ModelRegistryEntry] = field(default_factory=dict)
    _encoders: dict[str, object] = field(default_factory=dict, repr=False)

    def add(self, entry: ModelRegistryEntry) -> None:
        if entry.backend not in _BACKENDS:
            raise ValueError(f"unknown backend {entry.backend!r} for model {entry.name!r}")
        self.entries[entry.name] = entry

    def names(self) -> list[str]:
        return list(self.entries)

    def entry(self, name: str) -> ModelRegistryEntry:
        return self.entries[name]

    def encoder(self, name: str):
        if name not in self._encoders:
            entry = self.entries[name]
            log.info("loading model %s (%s, dim %d)", name, entry.backend, entry.dim)
            self._encoders[name] = _BACKENDS[entry.backend](entry)
        return self._encoders[name]


def load_registry(config_path: str | Path | None = None) -> Registry:
    """Build the registry from a JSON config file, or the built-in defaults.

    Config shape: {"models": [{"name": ..., "backend": ..., "dim": ..., ...}]}.
    A ${ENV_VAR} value in "source" is expanded; entries whose expansion is
    empty are skipped (a real checkpoint is optional on dev machines).
    """
    registry = Registry()
    if config_path is None:
        for entry in default_entries():
            registry.add(entry)
        return registry
    with open(config_path, encoding="utf-8") as fh:
        config = json.load(fh)
    for raw in config["models"]:
        source = os.path.expandvars(raw.get("source", ""))
        if raw.get("backend") == "hf" and (not source or source.startswith("$")):
            log.warning("skipping hf model %s: no checkpoint configured", raw.get("name"))
            continue
        registry.add(ModelRegistryEntry(**{**raw, "source": source}))
    return registry


def default_entries() -> list[ModelRegistryEntry]:
    entries = [
        ModelRegistryEntry(name="hash-384", backend="hash", dim=384),
        ModelRegistryEntry(
            name="toy-64", backend="toy", dim=64, max_tokens=128,
            pooling="first", separator=" [SEP] ",
        ),
        ModelRegistryEntry(
            name="toy-64-mean", backend="toy", dim=64, max_tokens=128,
            pooling="mean", separator=" [SEP] ",
        ),
    ]
    real = os.environ.get(ENV_REAL_MODEL, "")
    if real:
        entries.append(
            ModelRegistryEntry(
                name="scibert", backend="hf", dim=768, max_tokens=512,
                pooling="first", separator=" ", source=real,
            )
        )
    return entries
