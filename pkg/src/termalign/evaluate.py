"""Cosine retrieval and the Top-N hit metric against a gold alignment.

Neighbor queries are restricted to library-prefixed constant tokens of the
requested library; structural tokens, normalized variables and shared logical
tokens are never candidates.  A gold pair hits at N when the true partner is
among the N nearest cross-library neighbors of the query constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .model import EmbeddingModel
from .traversal import library_token, split_library_token

__all__ = [
    "cosine",
    "GoldAlignment",
    "load_gold",
    "HitReport",
    "report_tsv",
    "NeighborIndex",
    "nearest",
    "topn_hit",
    "mean_vector",
]


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine is undefined for zero-norm vectors")
    return float(u @ v / (nu * nv))


def mean_vector(model: EmbeddingModel, tokens: Iterable[str]) -> np.ndarray:
    """Average vector of a set of tokens (set-level similarity utility)."""
    ids = [model.dictionary.token_to_id[t] for t in tokens]
    if not ids:
        raise ValueError("no tokens given")
    return model.input_vectors[ids].mean(axis=0)


@dataclass(frozen=True)
class GoldAlignment:
    """Manually verified (library-1 name, library-2 name) pairs, deduplicated."""

    pairs: tuple


def load_gold(path) -> GoldAlignment:
    """Read TSV ``name1<TAB>name2``; ``#`` comment lines and blanks ignored."""
    pairs = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ValueError(f"malformed gold line: {line!r}")
            pair = (fields[0], fields[1])
            if pair not in seen:
                seen.add(pair)
                pairs.append(pair)
    return GoldAlignment(tuple(pairs))


@dataclass
class HitReport:
    """Hits per cutoff over ``universe`` gold pairs; ``oov`` of them had an
    out-of-vocabulary query constant and were scored as misses."""

    totals: dict
    universe: int
    oov: int = 0


def report_tsv(report: HitReport) -> str:
    lines = [f"{n}\t{report.totals[n]}\t{report.universe}" for n in sorted(report.totals)]
    return "\n".join(lines) + "\n"


class NeighborIndex:
    """Read-only cosine retrieval over a model's constant tokens."""

    def __init__(self, model: EmbeddingModel):
        self.model = model
        matrix = model.input_vectors
        norms = np.linalg.norm(matrix, axis=1)
        self._unit = matrix / np.where(norms == 0.0, 1.0, norms)[:, None]
        by_library = {}
        for i, token in enumerate(model.dictionary.id_to_token):
            library_id, _ = split_library_token(token)
            if library_id is not None:
                by_library.setdefault(library_id, []).append(i)
        self._candidates = {
            lib: np.asarray(ids, dtype=np.int64) for lib, ids in by_library.items()
        }
        self._tokens = model.dictionary.id_to_token

    def candidate_ids(self, library: int) -> np.ndarray:
        return self._candidates.get(library, np.empty(0, dtype=np.int64))

    def nearest(self, token: str, k: int, library: int) -> list:
        """k highest-cosine constant tokens of the library, never the query.

        Descending score, ties broken lexicographically by token.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        query_id = self.model.dictionary.token_to_id.get(token)
        if query_id is None:
            raise KeyError(token)
        candidates = self.candidate_ids(library)
        candidates = candidates[candidates != query_id]
        if candidates.size == 0:
            return []
        scores = self._unit[candidates] @ self._unit[query_id]
        order = np.argsort(-scores, kind="stable")
        # resolve equal-score runs lexicographically, enough to fill k results
        out = []
        i = 0
        while i < order.size and len(out) < k:
            j = i
            while j < order.size and scores[order[j]] == scores[order[i]]:
                j += 1
            run = sorted(self._tokens[candidates[x]] for x in order[i:j])
            score = float(scores[order[i]])
            for name in run:
                out.append((name, score))
            i = j
        return out[:k]

    def rank_of(self, query_token: str, target_token: str, library: int):
        """Exact retrieval rank of the target under the tie-break, or None."""
        query_id = self.model.dictionary.token_to_id.get(query_token)
        target_id = self.model.dictionary.token_to_id.get(target_token)
        if query_id is None or target_id is None:
            return None
        candidates = self.candidate_ids(library)
        candidates = candidates[candidates != query_id]
        position = np.searchsorted(candidates, target_id)
        if position >= candidates.size or candidates[position] != target_id:
            return None
        scores = self._unit[candidates] @ self._unit[query_id]
        target_score = scores[position]
        better = int((scores > target_score).sum())
        ties = scores == target_score
        if ties.sum() > 1:
            tokens = np.asarray([self._tokens[i] for i in candidates[ties]])
            better += int((tokens < target_token).sum())
        return better + 1

    def similarity(self, token1: str, token2: str) -> float:
        return cosine(self.model.vector(token1), self.model.vector(token2))


def nearest(model: EmbeddingModel, token: str, k: int, library: int) -> list:
    """Convenience wrapper building a one-shot index; see NeighborIndex.nearest."""
    return NeighborIndex(model).nearest(token, k, library)


def topn_hit(
    model: EmbeddingModel,
    gold: GoldAlignment,
    cutoffs: Sequence[int],
    query_library: int = 1,
    target_library: int = 2,
) -> HitReport:
    """Hit counts at each cutoff; OOV query constants count as misses."""
    index = NeighborIndex(model)
    totals = {int(n): 0 for n in cutoffs}
    oov = 0
    for name1, name2 in gold.pairs:
        query = library_token(name1, query_library)
        target = library_token(name2, target_library)
        if query not in model.dictionary.token_to_id:
            oov += 1
            continue
        rank = index.rank_of(query, target, target_library)
        if rank is None:
            continue
        for n in totals:
            if rank <= n:
                totals[n] += 1
    return HitReport(totals=totals, universe=len(gold.pairs), oov=oov)
