"""Corpus-level action similarity matrix: build, persist, query, sample rows.

File format (little-endian): magic ``ATSM``, uint16 version = 1, uint32 N,
then N*N IEEE-754 binary32 values row-major.  The vocabulary lives in a
companion UTF-8 text file, one canonical action string per line, line k
being index k.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .codec import parse_action, serialize_action
from .errors import MatrixFormatError, TodkitError
from .model import Dialog, Ontology
from .tree import pairwise_distances, to_tree, tree_size

_MAGIC = b"ATSM"
_VERSION = 1
_HEADER = struct.Struct("<4sHI")


@dataclass(frozen=True)
class ActionVocab:
    """Deduplicated canonical action strings in first-occurrence order."""

    actions: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.actions)) != len(self.actions):
            raise TodkitError("action vocabulary contains duplicates")

    def __len__(self) -> int:
        return len(self.actions)

    def __getitem__(self, index: int) -> str:
        return self.actions[index]

    def index_of(self, action: str) -> int:
        try:
            return self.actions.index(action)
        except ValueError:
            raise KeyError(action) from None


@dataclass(frozen=True)
class SimilarityMatrix:
    vocab: ActionVocab
    values: np.ndarray  # (N, N) float32, symmetric, unit diagonal

    @property
    def size(self) -> int:
        return len(self.vocab)


def collect_vocab(corpus: Iterable[Dialog]) -> ActionVocab:
    """Every distinct canonical action string, in first-occurrence order."""
    seen: dict[str, None] = {}
    for dialog in corpus:
        for turn in dialog.turns:
            seen.setdefault(serialize_action(turn.action), None)
    return ActionVocab(actions=tuple(seen.keys()))


def build_matrix(vocab: ActionVocab, ontology: Ontology, threads: int = 1) -> SimilarityMatrix:
    """Dense pairwise tree similarity over the vocabulary.

    Only the strict upper triangle is computed (N(N-1)/2 tree-distance
    evaluations); the lower triangle is mirrored and the diagonal set to 1.
    The result is identical for any thread count.
    """
    if len(vocab) == 0:
        raise TodkitError("cannot build a similarity matrix over an empty vocabulary")
    trees = [to_tree(parse_action(a, ontology)) for a in vocab.actions]
    sizes = np.asarray([tree_size(t) for t in trees], dtype=np.float64)
    dist = pairwise_distances(trees, threads=threads, full=False)
    max_size = np.maximum.outer(sizes, sizes)
    sim = np.clip((max_size - dist) / max_size, 0.0, None).astype(np.float32)
    upper = np.triu(sim, k=1)
    values = upper + upper.T
    np.fill_diagonal(values, np.float32(1.0))
    return SimilarityMatrix(vocab=vocab, values=values)


def default_vocab_path(matrix_path) -> str:
    return f"{os.fspath(matrix_path)}.vocab"


def save_matrix(matrix: SimilarityMatrix, path, vocab_path=None) -> None:
    n = matrix.size
    if matrix.values.shape != (n, n):
        raise TodkitError("matrix shape disagrees with vocabulary size")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(_MAGIC, _VERSION, n))
        f.write(np.ascontiguousarray(matrix.values, dtype="<f4").tobytes())
    if vocab_path is None:
        vocab_path = default_vocab_path(path)
    with open(vocab_path, "w", encoding="utf-8") as f:
        for action in matrix.vocab.actions:
            f.write(action + "\n")


def load_matrix(path, vocab_path=None) -> SimilarityMatrix:
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise MatrixFormatError(f"{path}: file too short for header")
        magic, version, n = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise MatrixFormatError(f"{path}: bad magic {magic!r}")
        if version != _VERSION:
            raise MatrixFormatError(f"{path}: unsupported version {version}")
        payload = f.read()
    expected = 4 * n * n
    if len(payload) != expected:
        raise MatrixFormatError(
            f"{path}: payload holds {len(payload)} bytes, expected {expected} for N={n}"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(n, n).copy()
    if vocab_path is None:
        vocab_path = default_vocab_path(path)
    with open(vocab_path, encoding="utf-8") as f:
        actions = tuple(line.rstrip("\n") for line in f)
    if len(actions) != n:
        raise MatrixFormatError(
            f"{vocab_path}: {len(actions)} vocabulary lines for a matrix of size {n}"
        )
    return SimilarityMatrix(vocab=ActionVocab(actions=actions), values=values)


def sampling_row(matrix: SimilarityMatrix, index: int) -> np.ndarray:
    """Replacement distribution for one ground-truth index.

    The ground-truth index gets exactly zero mass; the rest is its similarity
    row normalized to sum 1.  An all-zero row falls back to the uniform
    distribution over the other indices.
    """
    n = matrix.size
    if not 0 <= index < n:
        raise IndexError(f"action index {index} out of range for vocabulary of {n}")
    if n < 2:
        raise TodkitError("no replacement candidates in a single-action vocabulary")
    row = matrix.values[index].astype(np.float64)
    row[index] = 0.0
    total = row.sum()
    if total <= 0.0:
        row = np.full(n, 1.0 / (n - 1))
        row[index] = 0.0
        return row
    row /= total
    row /= row.sum()
    return row
