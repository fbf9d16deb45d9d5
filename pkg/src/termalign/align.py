"""Iterative pattern-matching baseline for constant alignment.

The pattern of a term abstracts every non-logical constant into a hole,
numbered by first occurrence in preorder; bound variables are renamed by
binder order so alpha-equivalent terms share a pattern.  Two terms from
different libraries with the same pattern form a matching pair, and their
corresponding holes induce matching constant pairs.  Scores then flow back
and forth between term pairs and constant pairs until the constant scores
stabilize; the normalization g(x) = x/(x+1) keeps them in [0, 1) and drives
convergence.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .terms import Abs, Comb, DEFAULT_LOGICAL_CONSTANTS, Id, TtItem, TtTerm

__all__ = [
    "Hole",
    "Pattern",
    "MatchSet",
    "ScoreState",
    "patternify",
    "enumerate_matches",
    "g",
    "score_iterate",
    "rank_alignments",
    "write_alignments",
]


@dataclass(frozen=True)
class Hole:
    index: int


@dataclass(frozen=True)
class Pattern:
    """Hole-abstracted skeleton plus its canonical grouping key."""

    skeleton: object  # TtTerm with Hole leaves
    key: str
    hole_count: int


def _skeleton_key(node, out):
    if isinstance(node, Hole):
        out.append(f"(Hole {node.index})")
    elif isinstance(node, Id):
        out.append(f'(Id "{node.name}")')
    elif isinstance(node, Comb):
        out.append("(Comb ")
        _skeleton_key(node.fun, out)
        out.append(" ")
        _skeleton_key(node.arg, out)
        out.append(")")
    else:
        out.append(f'(Abs "{node.var}" ')
        _skeleton_key(node.var_type, out)
        out.append(" ")
        _skeleton_key(node.body, out)
        out.append(")")


_MISSING = object()


def patternify(term: TtTerm, logical_set=DEFAULT_LOGICAL_CONSTANTS, known_constants=None):
    """Return (pattern, constants): the hole skeleton and the hole constants.

    Hole k stands for the k-th distinct non-logical constant in preorder;
    repeated occurrences of a constant map to the same hole.  Binders are
    renamed x0, x1, ... in preorder binder order.  Classification follows
    ``constants_of``: bound names are variables, free names are constants
    unless ``known_constants`` excludes them.
    """
    holes = {}
    constants = []
    env = {}
    binder_count = [0]

    def build(node):
        if isinstance(node, Id):
            name = node.name
            bound = env.get(name)
            if bound is not None:
                return Id(bound)
            if name in logical_set:
                return Id(name)
            if known_constants is not None and name not in known_constants:
                return Id(name)  # free variable, kept literal
            index = holes.get(name)
            if index is None:
                index = len(constants) + 1
                holes[name] = index
                constants.append(name)
            return Hole(index)
        if isinstance(node, Comb):
            return Comb(build(node.fun), build(node.arg))
        fresh = f"x{binder_count[0]}"
        binder_count[0] += 1
        var_type = build(node.var_type)
        saved = env.get(node.var, _MISSING)
        env[node.var] = fresh
        body = build(node.body)
        if saved is _MISSING:
            del env[node.var]
        else:
            env[node.var] = saved
        return Abs(fresh, var_type, body)

    skeleton = build(term)
    parts = []
    _skeleton_key(skeleton, parts)
    return Pattern(skeleton, "".join(parts), len(constants)), constants


@dataclass
class MatchSet:
    """Matching term pairs, induced constant pairs, and their statistics.

    ``induced[i]`` lists the indices of the constant pairs induced by term
    pair i (delta(c_j, t_i) = 1 iff j is in induced[i]).  ``p`` counts term
    pairs sharing pair i's pattern (including itself), ``q`` the distinct
    constant pairs it induces, and ``r1``/``r2`` how many terms of each
    library contain the pair's constants.
    """

    term_pairs: list
    constant_pairs: list
    induced: list
    p: np.ndarray
    q: np.ndarray
    r1: np.ndarray
    r2: np.ndarray

    @property
    def m(self):
        return len(self.term_pairs)

    @property
    def n(self):
        return len(self.constant_pairs)

    def delta(self, j: int, i: int) -> bool:
        return j in self.induced[i]


def _library_analysis(items, logical_set, known_constants):
    """Per item: (name, pattern key, hole constants); plus containment counts."""
    rows = []
    containing = defaultdict(int)
    for item in items:
        known = item.constants if known_constants == "item" else known_constants
        pattern, constants = patternify(item.term, logical_set, known)
        rows.append((item.name, pattern.key, constants))
        for name in set(constants):
            containing[name] += 1
    return rows, containing


def enumerate_matches(
    library1: Iterable[TtItem],
    library2: Iterable[TtItem],
    logical_set=DEFAULT_LOGICAL_CONSTANTS,
    known_constants=None,
) -> MatchSet:
    """Group terms by pattern and cross the groups into matching pairs.

    ``known_constants`` may be None (free names are constants), a set applied
    to both libraries, or the string ``"item"`` to use each item's own quoted
    set.  Quadratic in the group sizes by design.
    """
    rows1, contains1 = _library_analysis(list(library1), logical_set, known_constants)
    rows2, contains2 = _library_analysis(list(library2), logical_set, known_constants)
    groups1 = defaultdict(list)
    for row in rows1:
        groups1[row[1]].append(row)
    groups2 = defaultdict(list)
    for row in rows2:
        groups2[row[1]].append(row)

    term_pairs = []
    induced = []
    p = []
    q = []
    pair_index = {}
    constant_pairs = []
    for key, group1 in groups1.items():
        group2 = groups2.get(key)
        if not group2:
            continue
        pattern_pairs = len(group1) * len(group2)
        for name1, _, consts1 in group1:
            for name2, _, consts2 in group2:
                pairs = sorted(set(zip(consts1, consts2)))
                indices = []
                for pair in pairs:
                    j = pair_index.get(pair)
                    if j is None:
                        j = len(constant_pairs)
                        pair_index[pair] = j
                        constant_pairs.append(pair)
                    indices.append(j)
                term_pairs.append((name1, name2))
                induced.append(indices)
                p.append(pattern_pairs)
                q.append(len(pairs))

    r1 = np.asarray([contains1[a] for a, _ in constant_pairs], dtype=np.int64)
    r2 = np.asarray([contains2[b] for _, b in constant_pairs], dtype=np.int64)
    return MatchSet(
        term_pairs=term_pairs,
        constant_pairs=constant_pairs,
        induced=induced,
        p=np.asarray(p, dtype=np.int64),
        q=np.asarray(q, dtype=np.int64),
        r1=r1,
        r2=r2,
    )


def g(x):
    """Normalization g(x) = x/(x+1), strictly increasing from [0,inf) to [0,1)."""
    x = np.asarray(x, dtype=np.float64)
    if (x < 0).any():
        raise ValueError("g is defined for x >= 0")
    result = x / (x + 1.0)
    return float(result) if result.ndim == 0 else result


@dataclass
class ScoreState:
    term_scores: np.ndarray
    const_scores: np.ndarray
    iterations: int
    converged: bool
    final_delta: float


def score_iterate(match_set: MatchSet, eps: float = 1e-6, max_iters: int = 100) -> ScoreState:
    """Run the scoring recurrence until the constant scores move less than eps.

    Constant scores start at 1; each round scores term pairs from the constant
    scores and constant pairs from the term scores, weighted by the pattern
    and containment heuristics.  Non-convergence within ``max_iters`` is
    reported in the state, not raised.
    """
    m, n = match_set.m, match_set.n
    if m < 1 or n < 1:
        raise ValueError("score iteration needs at least one term pair and one constant pair")
    w_t = 1.0 / (np.log(2.0 + match_set.p) * np.log(2.0 + match_set.q))
    w_c = 1.0 / np.log(2.0 + match_set.r1.astype(np.float64) * match_set.r2)

    # flattened incidence of delta(c_j, t_i) = 1
    pair_idx = np.concatenate(
        [np.full(len(js), i, dtype=np.int64) for i, js in enumerate(match_set.induced)]
    )
    const_idx = np.concatenate(
        [np.asarray(js, dtype=np.int64) for js in match_set.induced]
    )

    const_scores = np.ones(n)
    term_scores = np.zeros(m)
    delta = np.inf
    iterations = 0
    for iterations in range(1, max_iters + 1):
        term_scores = w_t * np.bincount(pair_idx, weights=const_scores[const_idx], minlength=m)
        raw = np.bincount(const_idx, weights=term_scores[pair_idx], minlength=n)
        new_scores = g(w_c * raw)
        delta = float(np.abs(new_scores - const_scores).max())
        const_scores = new_scores
        if delta < eps:
            break
    return ScoreState(
        term_scores=term_scores,
        const_scores=const_scores,
        iterations=iterations,
        converged=delta < eps,
        final_delta=delta,
    )


def rank_alignments(state: ScoreState, match_set: MatchSet) -> list:
    """Constant pairs by score descending, ties lexicographic on (c1, c2)."""
    rows = [
        (c1, c2, float(state.const_scores[j]))
        for j, (c1, c2) in enumerate(match_set.constant_pairs)
    ]
    rows.sort(key=lambda row: (-row[2], row[0], row[1]))
    return rows


def write_alignments(rows, path) -> None:
    """TSV ``c1<TAB>c2<TAB>score`` with six-decimal scores."""
    with open(path, "w", encoding="utf-8") as fh:
        for c1, c2, score in rows:
            fh.write(f"{c1}\t{c2}\t{score:.6f}\n")
