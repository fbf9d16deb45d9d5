"""Token dictionary, Huffman coding and the negative-sampling table.

No frequency subsampling is ever applied: every token of a term serialization
has to survive so the corpus stays parseable, and rare constants are exactly
the interesting ones.  The default ``min_count`` is therefore 1.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .traversal import CorpusLine

__all__ = [
    "Dictionary",
    "HuffmanCoding",
    "NegativeTable",
    "build_dictionary",
    "build_huffman",
    "build_negative_table",
    "NEGATIVE_EXPONENT",
    "MAX_NEGATIVE_TABLE",
]

NEGATIVE_EXPONENT = 0.75
MAX_NEGATIVE_TABLE = 10_000_000
_FULL_TABLE_VOCAB = 10_000  # vocabularies under this get a proportionally smaller table


@dataclass
class Dictionary:
    """Token ids assigned by descending count, ties broken by first appearance."""

    token_to_id: dict
    id_to_token: list
    counts: np.ndarray

    def __len__(self):
        return len(self.id_to_token)

    def __contains__(self, token):
        return token in self.token_to_id

    def encode(self, tokens: Iterable[str]) -> list:
        """Token ids for a line, silently dropping out-of-vocabulary tokens."""
        t2i = self.token_to_id
        return [t2i[t] for t in tokens if t in t2i]


def build_dictionary(corpus: Iterable[CorpusLine], min_count: int = 1) -> Dictionary:
    counts = {}
    for line in corpus:
        for token in line.tokens:
            counts[token] = counts.get(token, 0) + 1
    if not counts:
        raise ValueError("empty corpus")
    first_seen = {token: i for i, token in enumerate(counts)}  # dict preserves first appearance
    kept = [t for t, c in counts.items() if c >= min_count]
    if not kept:
        raise ValueError(f"no token reaches min_count={min_count}")
    kept.sort(key=lambda t: (-counts[t], first_seen[t]))
    return Dictionary(
        token_to_id={t: i for i, t in enumerate(kept)},
        id_to_token=kept,
        counts=np.asarray([counts[t] for t in kept], dtype=np.int64),
    )


@dataclass
class HuffmanCoding:
    """Root-to-leaf paths (internal node ids 0..V-2) and code bits per token."""

    paths: list
    codes: list
    internal_count: int

    def __len__(self):
        return len(self.paths)


def build_huffman(counts) -> HuffmanCoding:
    """Bottom-up Huffman coding over token counts.

    Deterministic: the heap orders by (count, node id) and the lower-id node
    of each merge becomes the left child (code bit 0).
    """
    counts = np.asarray(counts)
    v = len(counts)
    if v < 1:
        raise ValueError("empty vocabulary")
    if v == 1:
        return HuffmanCoding(
            paths=[np.empty(0, dtype=np.int64)], codes=[np.empty(0, dtype=np.float64)],
            internal_count=0,
        )
    heap = [(int(c), i) for i, c in enumerate(counts)]
    heapq.heapify(heap)
    children = {}  # internal node id -> (left, right)
    next_id = v
    while len(heap) > 1:
        ca, a = heapq.heappop(heap)
        cb, b = heapq.heappop(heap)
        left, right = (a, b) if a < b else (b, a)
        children[next_id] = (left, right)
        heapq.heappush(heap, (ca + cb, next_id))
        next_id += 1
    root = heap[0][1]
    paths = [None] * v
    codes = [None] * v
    stack = [(root, [], [])]
    while stack:
        node, path, code = stack.pop()
        if node < v:
            paths[node] = np.asarray(path, dtype=np.int64)
            codes[node] = np.asarray(code, dtype=np.float64)
        else:
            left, right = children[node]
            internal = node - v
            stack.append((left, path + [internal], code + [0.0]))
            stack.append((right, path + [internal], code + [1.0]))
    return HuffmanCoding(paths=paths, codes=codes, internal_count=v - 1)


@dataclass
class NegativeTable:
    """Unigram^0.75 sampling table; token i fills a slot share of counts[i]^0.75."""

    table: np.ndarray

    @property
    def size(self):
        return self.table.size


def build_negative_table(counts, table_size: Optional[int] = None) -> NegativeTable:
    counts = np.asarray(counts, dtype=np.float64)
    v = len(counts)
    if v < 2:
        raise ValueError("negative sampling needs a vocabulary of at least 2 tokens")
    if table_size is None:
        table_size = min(MAX_NEGATIVE_TABLE, max(v, round(MAX_NEGATIVE_TABLE * v / _FULL_TABLE_VOCAB)))
    powered = counts ** NEGATIVE_EXPONENT
    boundaries = np.rint(np.cumsum(powered) / powered.sum() * table_size).astype(np.int64)
    slots = np.diff(boundaries, prepend=0)
    return NegativeTable(table=np.repeat(np.arange(v, dtype=np.int64), slots))
