"""Word2Vec training engine: CBOW and skip-gram with three loss variants.

Every update follows the same four steps: build the hidden vector, accumulate
the input-side gradient while updating the touched output rows, then add the
accumulated gradient to the input rows.  The losses differ only in which
output rows are touched: softmax updates all V rows, hierarchical softmax the
Huffman path of the target, negative sampling the target plus K sampled rows.

Updates are gradient *ascent* steps on the per-sample log-likelihood; the
gradient-check tests exploit this by diffing matrices around a single update.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import expit

from .model import EmbeddingModel
from .traversal import CorpusLine
from .vocab import (
    Dictionary,
    HuffmanCoding,
    NegativeTable,
    build_dictionary,
    build_huffman,
    build_negative_table,
)

__all__ = [
    "LOSSES",
    "MODELS",
    "TrainConfig",
    "ContextSample",
    "context_window",
    "softmax_probs",
    "cbow_update",
    "skipgram_update",
    "train",
]

LOSSES = ("softmax", "hs", "ns")
MODELS = ("cbow", "skipgram")

LR_FLOOR_FACTOR = 1e-5
_RESAMPLE_CAP = 100


@dataclass
class TrainConfig:
    dim: int = 100
    learning_rate: float = 0.05
    window: int = 10
    epochs: int = 5
    negatives: int = 5
    loss: str = "ns"
    model: str = "cbow"
    threads: int = 4
    seed: int = 0
    min_count: int = 1
    is_tt: bool = True

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.epochs < 1 or self.negatives < 1:
            raise ValueError("dim, window, epochs and negatives must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")


@dataclass
class ContextSample:
    target: int
    context: np.ndarray  # token ids around the target, possibly empty


def context_window(line, pos: int, window: int, rng) -> ContextSample:
    """Randomized context span: b ~ uniform{1..window}, clipped to the line.

    An empty context (single-token line) means the caller skips the sample.
    """
    line = np.asarray(line, dtype=np.int64)
    b = int(rng.integers(1, window + 1))
    lo = max(0, pos - b)
    hi = min(line.size, pos + b + 1)
    context = np.concatenate((line[lo:pos], line[pos + 1:hi]))
    return ContextSample(int(line[pos]), context)


def softmax_probs(output_vectors: np.ndarray, hidden: np.ndarray) -> np.ndarray:
    """softmax(N h^T) over the whole vocabulary, max-subtracted for stability."""
    z = output_vectors @ hidden
    z -= z.max()
    e = np.exp(z)
    return e / e.sum()


def _draw_negatives(table: NegativeTable, target: int, k: int, rng) -> np.ndarray:
    """k samples from the table, resampling collisions with the target.

    Each colliding slot is retried up to the cap and then dropped, so the
    result can be shorter than k.
    """
    row = table.table[rng.integers(0, table.size, size=k)]
    if not (row == target).any():
        return row
    out = [int(x) for x in row if x != target]
    for _ in range(k - len(out)):
        for _attempt in range(_RESAMPLE_CAP):
            cand = int(table.table[rng.integers(0, table.size)])
            if cand != target:
                out.append(cand)
                break
    return np.asarray(out, dtype=np.int64)


def _scatter_add(matrix, rows, increments):
    # fancy-indexed += collapses duplicate rows; fall back to add.at for them
    if len(set(rows.tolist())) == rows.size:
        matrix[rows] += increments
    else:
        np.add.at(matrix, rows, increments)


def _output_update(model, hidden, target, lr, loss, huffman, table, rng, negatives):
    """Steps 2 and 3: update the touched output rows, return the gradient g."""
    n = model.output_vectors
    if loss == "softmax":
        probs = softmax_probs(n, hidden)
        coef = -lr * probs
        coef[target] += lr
        g = coef @ n
        n += np.outer(coef, hidden)
        return g
    if loss == "hs":
        nodes = huffman.paths[target]
        if nodes.size == 0:  # V == 1: the single leaf has probability 1
            return np.zeros_like(hidden)
        rows = n[nodes]
        coef = lr * (huffman.codes[target] - expit(rows @ hidden))
        g = coef @ rows
        n[nodes] += np.outer(coef, hidden)
        return g
    if negatives is None:
        negatives = _draw_negatives(table, target, rng.negatives_k, rng)
    rows_idx = np.empty(negatives.size + 1, dtype=np.int64)
    rows_idx[0] = target
    rows_idx[1:] = negatives
    labels = np.zeros(rows_idx.size)
    labels[0] = 1.0
    rows = n[rows_idx]
    coef = lr * (labels - expit(rows @ hidden))
    g = coef @ rows
    _scatter_add(n, rows_idx, np.outer(coef, hidden))
    return g


class _TrainRng:
    """Worker rng plus the configured negative count for internal draws."""

    def __init__(self, rng, negatives_k):
        self._rng = rng
        self.negatives_k = negatives_k

    def integers(self, *args, **kwargs):
        return self._rng.integers(*args, **kwargs)


def _as_train_rng(rng, num_negatives):
    if isinstance(rng, _TrainRng):
        return rng
    return _TrainRng(rng, num_negatives)


def cbow_update(
    model: EmbeddingModel,
    lr_eff: float,
    sample: ContextSample,
    loss: str,
    huffman: Optional[HuffmanCoding] = None,
    negative_table: Optional[NegativeTable] = None,
    rng=None,
    negatives: Optional[np.ndarray] = None,
    num_negatives: int = 5,
):
    """One CBOW step: h = mean of context rows, predict the target."""
    context = np.asarray(sample.context, dtype=np.int64)
    if context.size == 0:
        raise ValueError("empty context")
    uniq, mult = np.unique(context, return_counts=True)
    weights = mult.astype(np.float64)
    h = (weights @ model.input_vectors[uniq]) / context.size
    if loss == "ns" and negatives is None:
        rng = _as_train_rng(rng, num_negatives)
    g = _output_update(model, h, sample.target, lr_eff, loss, huffman, negative_table, rng, negatives)
    model.input_vectors[uniq] += np.outer(weights, g / context.size)


def skipgram_update(
    model: EmbeddingModel,
    lr_eff: float,
    sample: ContextSample,
    loss: str,
    huffman: Optional[HuffmanCoding] = None,
    negative_table: Optional[NegativeTable] = None,
    rng=None,
    negatives: Optional[Sequence[np.ndarray]] = None,
    num_negatives: int = 5,
):
    """One skip-gram step: an inner round per context token, h = current M row.

    ``negatives``, when given, supplies one array of negative ids per round.
    """
    context = np.asarray(sample.context, dtype=np.int64)
    if context.size == 0:
        raise ValueError("empty context")
    if loss == "ns" and negatives is None:
        rng = _as_train_rng(rng, num_negatives)
    word = sample.target
    for i, u in enumerate(context):
        h = model.input_vectors[word].copy()
        round_negatives = None if negatives is None else negatives[i]
        g = _output_update(model, h, int(u), lr_eff, loss, huffman, negative_table, rng, round_negatives)
        model.input_vectors[word] += g


def _train_line(model, ids, lr_eff, config, huffman, table, rng):
    n = ids.size
    bs = rng.integers(1, config.window + 1, size=n)
    pre_negatives = None
    if config.loss == "ns" and config.model == "cbow":
        # one bulk draw per line; per-position collisions are patched below
        pre_negatives = table.table[rng.integers(0, table.size, size=(n, config.negatives))]
    is_cbow = config.model == "cbow"
    for pos in range(n):
        b = bs[pos]
        lo = pos - b
        if lo < 0:
            lo = 0
        hi = pos + b + 1
        if hi > n:
            hi = n
        if hi - lo <= 1:
            continue
        target = int(ids[pos])
        sample = ContextSample(target, np.concatenate((ids[lo:pos], ids[pos + 1:hi])))
        if is_cbow:
            negs = None
            if pre_negatives is not None:
                negs = pre_negatives[pos]
                if (negs == target).any():
                    negs = _draw_negatives_from_row(negs, target, table, rng)
            cbow_update(model, lr_eff, sample, config.loss, huffman, table, rng, negs,
                        config.negatives)
        else:
            skipgram_update(model, lr_eff, sample, config.loss, huffman, table, rng,
                            num_negatives=config.negatives)


def _draw_negatives_from_row(row, target, table, rng):
    out = [int(x) for x in row if x != target]
    for _ in range(row.size - len(out)):
        for _attempt in range(_RESAMPLE_CAP):
            cand = int(table.table[rng.integers(0, table.size)])
            if cand != target:
                out.append(cand)
                break
    return np.asarray(out, dtype=np.int64)


def train(
    corpus: Iterable[CorpusLine],
    config: TrainConfig,
    dictionary: Optional[Dictionary] = None,
) -> EmbeddingModel:
    """Train a model over the corpus.

    The input matrix starts uniform in [-1/D, 1/D], the output matrix at zero.
    The learning rate decays linearly with tokens seen, floored at 1e-5 of the
    start rate, and each line trains at ``line.lr_scale`` times the current
    rate.  With ``threads`` > 1 the workers share the matrices without locks
    (lost updates are tolerated); results are reproducible only for 1 thread.
    """
    lines = corpus if isinstance(corpus, list) else list(corpus)
    if dictionary is None:
        dictionary = build_dictionary(lines, config.min_count)
    encoded = []
    for line in lines:
        ids = dictionary.encode(line.tokens)
        if ids:
            encoded.append((np.asarray(ids, dtype=np.int64), float(line.lr_scale)))
    if not encoded:
        raise ValueError("no trainable lines in the corpus")

    v, d = len(dictionary), config.dim
    huffman = build_huffman(dictionary.counts) if config.loss == "hs" else None
    table = build_negative_table(dictionary.counts) if config.loss == "ns" else None

    seeds = np.random.SeedSequence(config.seed).spawn(config.threads + 1)
    init_rng = np.random.default_rng(seeds[0])
    model = EmbeddingModel(
        dictionary=dictionary,
        input_vectors=init_rng.uniform(-1.0 / d, 1.0 / d, size=(v, d)),
        output_vectors=np.zeros((v, d)),
        metadata={"loss": config.loss, "model": config.model, "seed": str(config.seed)},
    )

    total_tokens = sum(ids.size for ids, _ in encoded)
    planned = config.epochs * total_tokens
    lr0 = config.learning_rate
    floor = lr0 * LR_FLOOR_FACTOR
    progress = [0]  # shared token counter; approximate under concurrent workers

    def run(shard, seed):
        rng = _TrainRng(np.random.default_rng(seed), config.negatives)
        for _ in range(config.epochs):
            for ids, scale in shard:
                lr = lr0 * (1.0 - progress[0] / planned)
                if lr < floor:
                    lr = floor
                _train_line(model, ids, scale * lr, config, huffman, table, rng)
                progress[0] += ids.size

    if config.threads == 1:
        run(encoded, seeds[1])
    else:
        chunk = (len(encoded) + config.threads - 1) // config.threads
        workers = []
        for w in range(config.threads):
            shard = encoded[w * chunk:(w + 1) * chunk]
            if not shard:
                continue
            thread = threading.Thread(target=run, args=(shard, seeds[w + 1]), daemon=True)
            workers.append(thread)
            thread.start()
        for thread in workers:
            thread.join()
    return model
