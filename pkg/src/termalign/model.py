"""Embedding model container and its text file format.

The file holds ``V D`` on the first line, ``#key value`` metadata lines, V
input-matrix rows as ``token f1 ... fD`` (9 significant digits), a ``#OUTPUT``
sentinel, and V output-matrix rows in the same order.  Rows of the input
matrix are the published word vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .vocab import Dictionary

__all__ = ["EmbeddingModel", "save_model", "load_model"]

OUTPUT_SENTINEL = "#OUTPUT"


@dataclass
class EmbeddingModel:
    dictionary: Dictionary
    input_vectors: np.ndarray   # V x D, the word vectors
    output_vectors: np.ndarray  # V x D, per-loss output parameters
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.input_vectors.shape[1]

    def __len__(self):
        return len(self.dictionary)

    def vector(self, token: str) -> np.ndarray:
        return self.input_vectors[self.dictionary.token_to_id[token]]


def _format_row(token, row):
    return token + " " + " ".join(f"{x:.9g}" for x in row)


def save_model(model: EmbeddingModel, path, metadata=None) -> None:
    meta = dict(model.metadata)
    if metadata:
        meta.update(metadata)
    v, d = model.input_vectors.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{v} {d}\n")
        for key in sorted(meta):
            fh.write(f"#{key} {meta[key]}\n")
        for token, row in zip(model.dictionary.id_to_token, model.input_vectors):
            fh.write(_format_row(token, row) + "\n")
        fh.write(OUTPUT_SENTINEL + "\n")
        for token, row in zip(model.dictionary.id_to_token, model.output_vectors):
            fh.write(_format_row(token, row) + "\n")


def _parse_row(line, dim, path):
    fields = line.split(" ")
    if len(fields) < dim + 1:
        raise ValueError(f"{path}: malformed model row: {line[:60]!r}")
    token = " ".join(fields[:-dim])
    return token, [float(x) for x in fields[-dim:]]


def load_model(path) -> EmbeddingModel:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: expected 'V D' on the first line")
        v, d = int(header[0]), int(header[1])
        metadata = {}
        tokens = []
        input_rows = []
        output_rows = []
        current = input_rows
        for raw in fh:
            line = raw.rstrip("\n")
            if not line:
                continue
            if line == OUTPUT_SENTINEL:
                current = output_rows
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(" ")
                metadata[key] = value
                continue
            token, row = _parse_row(line, d, path)
            if current is input_rows:
                tokens.append(token)
            current.append(row)
    if len(input_rows) != v or len(output_rows) != v:
        raise ValueError(f"{path}: expected {v} rows per matrix, found "
                         f"{len(input_rows)} input and {len(output_rows)} output rows")
    dictionary = Dictionary(
        token_to_id={t: i for i, t in enumerate(tokens)},
        id_to_token=tokens,
        counts=np.ones(v, dtype=np.int64),  # counts are not persisted
    )
    return EmbeddingModel(
        dictionary=dictionary,
        input_vectors=np.asarray(input_rows, dtype=np.float64).reshape(v, d),
        output_vectors=np.asarray(output_rows, dtype=np.float64).reshape(v, d),
        metadata=metadata,
    )
