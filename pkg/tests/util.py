"""Independent oracles and generators shared across the test modules.

Everything here is deliberately written without reusing the code paths it
checks: plain-Python scoring loops, brute-force enumerations, and
finite-difference gradients.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from termalign.model import EmbeddingModel
from termalign.terms import Abs, Comb, Id
from termalign.vocab import Dictionary

NAME_ALPHABET = "abcxyz_/0189"


def random_name(rng, alphabet=NAME_ALPHABET, max_len=6):
    length = int(rng.integers(1, max_len + 1))
    return "".join(alphabet[int(i)] for i in rng.integers(0, len(alphabet), size=length))


def random_term(rng, max_depth=8, alphabet=NAME_ALPHABET):
    """Random term tree; leaves/branches chosen uniformly until depth runs out."""
    if max_depth <= 0:
        return Id(random_name(rng, alphabet))
    roll = rng.random()
    if roll < 0.4:
        return Id(random_name(rng, alphabet))
    if roll < 0.8:
        return Comb(random_term(rng, max_depth - 1, alphabet),
                    random_term(rng, max_depth - 1, alphabet))
    return Abs(random_name(rng, alphabet),
               random_term(rng, max_depth - 1, alphabet),
               random_term(rng, max_depth - 1, alphabet))


def node_count(term):
    if isinstance(term, Id):
        return 1
    if isinstance(term, Comb):
        return 1 + node_count(term.fun) + node_count(term.arg)
    return 1 + node_count(term.var_type) + node_count(term.body)


def collect_leaves(term):
    """Independent recursive leaf collector over the raw term."""
    if isinstance(term, Id):
        return [term.name]
    if isinstance(term, Comb):
        return collect_leaves(term.fun) + collect_leaves(term.arg)
    return collect_leaves(term.var_type) + collect_leaves(term.body)


def alpha_rename(term, suffix="_r"):
    """Consistently rename every bound variable (free names untouched)."""
    counter = itertools.count()

    def walk(node, env):
        if isinstance(node, Id):
            return Id(env.get(node.name, node.name))
        if isinstance(node, Comb):
            return Comb(walk(node.fun, env), walk(node.arg, env))
        fresh = f"v{next(counter)}{suffix}"
        new_env = dict(env)
        new_env[node.var] = fresh
        return Abs(fresh, walk(node.var_type, env), walk(node.body, new_env))

    return walk(term, {})


def rename_constants(term, mapping, logical_set):
    """Apply an injective renaming to free non-logical identifiers."""

    def walk(node, bound):
        if isinstance(node, Id):
            name = node.name
            if name in bound or name in logical_set:
                return node
            return Id(mapping.get(name, name))
        if isinstance(node, Comb):
            return Comb(walk(node.fun, bound), walk(node.arg, bound))
        return Abs(node.var, walk(node.var_type, bound), walk(node.body, bound | {node.var}))

    return walk(term, frozenset())


# ---------------------------------------------------------------------------
# straight-line evaluator of the scoring recurrences


def straight_line_scores(delta, p, q, r1, r2, iterations):
    """Dense, loop-by-loop evaluation of the score recurrences.

    ``delta`` is an m x n 0/1 matrix; returns (term_scores, const_scores)
    after exactly ``iterations`` rounds.
    """
    m = len(delta)
    n = len(delta[0])
    w_t = [1.0 / (math.log(2 + p[i]) * math.log(2 + q[i])) for i in range(m)]
    w_c = [1.0 / math.log(2 + r1[j] * r2[j]) for j in range(n)]
    score_c = [1.0] * n
    score_t = [0.0] * m
    for _ in range(iterations):
        score_t = [
            w_t[i] * sum(delta[i][l] * score_c[l] for l in range(n)) for i in range(m)
        ]
        new_c = []
        for j in range(n):
            acc = w_c[j] * sum(delta[k][j] * score_t[k] for k in range(m))
            new_c.append(acc / (acc + 1.0))
        score_c = new_c
    return score_t, score_c


# ---------------------------------------------------------------------------
# prefix-code enumeration for Huffman optimality


def all_code_length_vectors(v):
    """Code-length vectors of every full binary tree with v labelled leaves."""
    if v == 1:
        return [(0,)]
    results = set()

    def trees(leaves):
        # yields tuples of (leaf, depth)
        if len(leaves) == 1:
            yield ((leaves[0], 0),)
            return
        seen = set()
        for k in range(1, len(leaves)):
            for left_set in itertools.combinations(leaves, k):
                right_set = tuple(x for x in leaves if x not in left_set)
                key = (left_set, right_set)
                if key in seen:
                    continue
                seen.add(key)
                for lt in trees(list(left_set)):
                    for rt in trees(list(right_set)):
                        yield tuple((leaf, d + 1) for leaf, d in lt + rt)

    for tree in trees(list(range(v))):
        lengths = [0] * v
        for leaf, depth in tree:
            lengths[leaf] = depth
        results.add(tuple(lengths))
    return sorted(results)


def optimal_expected_length(counts):
    """Minimum expected code length over all prefix codes (v <= 5)."""
    v = len(counts)
    best = math.inf
    for lengths in all_code_length_vectors(v):
        best = min(best, sum(c * l for c, l in zip(counts, lengths)))
    return best


# ---------------------------------------------------------------------------
# objectives and finite differences for the trainer


def log_sigmoid(x):
    return -np.logaddexp(0.0, -np.asarray(x, dtype=np.float64))


def sample_objective(m_mat, n_mat, kind, loss, target, context, huffman=None, negatives=None):
    """Per-sample log-likelihood for one update round.

    For CBOW, ``target`` is the center word and ``context`` the full context;
    for skip-gram, ``target`` is the center word and ``context`` a single
    predicted word (one inner round).
    """
    if kind == "cbow":
        hidden = m_mat[np.asarray(context)].mean(axis=0)
        predicted = target
    else:
        hidden = m_mat[target]
        predicted = int(context[0])
    if loss == "softmax":
        z = n_mat @ hidden
        z = z - z.max()
        return float(z[predicted] - np.log(np.exp(z).sum()))
    if loss == "hs":
        x = n_mat[huffman.paths[predicted]] @ hidden
        bits = huffman.codes[predicted]
        return float((bits * log_sigmoid(x) + (1.0 - bits) * log_sigmoid(-x)).sum())
    x_pos = n_mat[predicted] @ hidden
    x_neg = n_mat[np.asarray(negatives)] @ hidden
    return float(log_sigmoid(x_pos) + log_sigmoid(-x_neg).sum())


def numeric_gradients(objective, m_mat, n_mat, step=1e-4):
    """Central finite differences of ``objective(M, N)`` w.r.t. both matrices."""
    grads = []
    for which in (0, 1):
        base = (m_mat, n_mat)[which]
        grad = np.zeros_like(base)
        for i in range(base.shape[0]):
            for j in range(base.shape[1]):
                plus = [m_mat.copy(), n_mat.copy()]
                minus = [m_mat.copy(), n_mat.copy()]
                plus[which][i, j] += step
                minus[which][i, j] -= step
                grad[i, j] = (objective(*plus) - objective(*minus)) / (2.0 * step)
        grads.append(grad)
    return grads[0], grads[1]


def relative_error(analytic, numeric):
    denom = max(float(np.linalg.norm(numeric)), 1e-10)
    return float(np.linalg.norm(analytic - numeric)) / denom


def make_model(rng, v, d, scale=0.5):
    tokens = [f"t{i}" for i in range(v)]
    counts = np.asarray(sorted(rng.integers(1, 50, size=v), reverse=True), dtype=np.int64)
    dictionary = Dictionary({t: i for i, t in enumerate(tokens)}, tokens, counts)
    return EmbeddingModel(
        dictionary=dictionary,
        input_vectors=rng.normal(0.0, scale, size=(v, d)),
        output_vectors=rng.normal(0.0, scale, size=(v, d)),
    )
