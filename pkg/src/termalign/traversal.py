"""Token sequences from term trees.

Each library item becomes one or more corpus lines: full preorder, inorder and
postorder traversals (tree dump) or just the identifier leaves (leaf dump).
Traversal weights scale the SGD learning rate of the line they produced.

Tokens: interior nodes emit the fixed tokens ``Comb``/``Abs``; identifier
leaves emit their name.  Bound variables can be normalized to ``bvarK`` (K =
binder order within the item).  Constants outside the shared logical set get a
``L<libraryId>:`` prefix so the two libraries' vocabularies stay disjoint.
Free identifiers are treated as constants here; quoting information does not
survive the s-expression corpus round trip.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence

from .terms import Abs, Comb, DEFAULT_LOGICAL_CONSTANTS, Id, TtItem, TtTerm

__all__ = [
    "VarPolicy",
    "DumpMode",
    "Classification",
    "ConstantToken",
    "TraversalWeights",
    "CorpusLine",
    "DEFAULT_SHARED_SET",
    "library_token",
    "split_library_token",
    "classify_token",
    "tokenize_node",
    "preorder",
    "inorder",
    "postorder",
    "leaf_dump",
    "corpus_lines",
    "plain_text_lines",
    "write_corpus",
    "read_corpus",
]

DEFAULT_SHARED_SET = frozenset(DEFAULT_LOGICAL_CONSTANTS)

COMB_TOKEN = "Comb"
ABS_TOKEN = "Abs"

_LIBRARY_PREFIX = re.compile(r"^L(\d+):")
_BVAR = re.compile(r"^bvar\d+$")


class VarPolicy(str, Enum):
    LITERAL = "literal"
    NORMALIZED = "normalized"


class DumpMode(str, Enum):
    TREE = "tree"
    LEAF = "leaf"


class Classification(str, Enum):
    CONSTANT = "constant"
    VARIABLE = "variable"
    STRUCTURAL = "structural"


@dataclass(frozen=True)
class ConstantToken:
    """Per-library identity of a vocabulary token."""

    library_id: Optional[int]
    name: str
    classification: Classification

    @property
    def token(self) -> str:
        if self.classification is Classification.CONSTANT and self.library_id is not None:
            return library_token(self.name, self.library_id)
        return self.name


def library_token(name: str, library_id: int) -> str:
    return f"L{library_id}:{name}"


def split_library_token(token: str):
    """Return (library_id, name); library_id is None for unprefixed tokens."""
    m = _LIBRARY_PREFIX.match(token)
    if m:
        return int(m.group(1)), token[m.end():]
    return None, token


def classify_token(token: str) -> ConstantToken:
    if token in (COMB_TOKEN, ABS_TOKEN):
        return ConstantToken(None, token, Classification.STRUCTURAL)
    if _BVAR.match(token):
        return ConstantToken(None, token, Classification.VARIABLE)
    library_id, name = split_library_token(token)
    return ConstantToken(library_id, name, Classification.CONSTANT)


@dataclass(frozen=True)
class TraversalWeights:
    """Learning-rate multipliers per traversal; zero disables a traversal."""

    preorder: float = 0.33
    inorder: float = 0.33
    postorder: float = 0.33

    def __post_init__(self):
        for name in ("preorder", "inorder", "postorder"):
            w = getattr(self, name)
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"{name} weight must be in [0, 1], got {w}")

    @property
    def all_zero(self) -> bool:
        return self.preorder == 0.0 and self.inorder == 0.0 and self.postorder == 0.0


@dataclass(frozen=True)
class CorpusLine:
    tokens: tuple
    lr_scale: float

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("corpus line has no tokens")
        if not 0.0 < self.lr_scale <= 1.0:
            raise ValueError(f"lr scale must be in (0, 1], got {self.lr_scale}")


def tokenize_node(
    node: TtTerm,
    var_policy: VarPolicy = VarPolicy.LITERAL,
    library_id: Optional[int] = None,
    shared_set=DEFAULT_SHARED_SET,
    bound_index: Optional[int] = None,
) -> str:
    """Token for a single node.

    ``bound_index`` marks an Id leaf as a bound occurrence of the
    ``bound_index``-th binder; the traversal functions supply it from the
    binding context.
    """
    if isinstance(node, Comb):
        return COMB_TOKEN
    if isinstance(node, Abs):
        return ABS_TOKEN
    if bound_index is not None:
        if var_policy is VarPolicy.NORMALIZED:
            return f"bvar{bound_index}"
        return node.name
    if node.name in shared_set or library_id is None:
        return node.name
    return library_token(node.name, library_id)


class _TokNode:
    __slots__ = ("token", "left", "right")

    def __init__(self, token, left=None, right=None):
        self.token = token
        self.left = left
        self.right = right


_MISSING = object()


def _token_tree(term, var_policy, library_id, shared_set):
    """Annotate every node with its token; binders numbered in preorder."""
    counter = itertools.count()
    env = {}

    def build(node):
        if isinstance(node, Id):
            return _TokNode(
                tokenize_node(node, var_policy, library_id, shared_set, env.get(node.name))
            )
        if isinstance(node, Comb):
            return _TokNode(COMB_TOKEN, build(node.fun), build(node.arg))
        index = next(counter)
        var_type = build(node.var_type)  # binder not in scope over its own type
        saved = env.get(node.var, _MISSING)
        env[node.var] = index
        body = build(node.body)
        if saved is _MISSING:
            del env[node.var]
        else:
            env[node.var] = saved
        return _TokNode(ABS_TOKEN, var_type, body)

    return build(term)


def _preorder(node, out):
    out.append(node.token)
    if node.left is not None:
        _preorder(node.left, out)
        _preorder(node.right, out)


def _inorder(node, out):
    if node.left is None:
        out.append(node.token)
        return
    _inorder(node.left, out)
    out.append(node.token)
    _inorder(node.right, out)


def _postorder(node, out):
    if node.left is not None:
        _postorder(node.left, out)
        _postorder(node.right, out)
    out.append(node.token)


def _leaves(node, out):
    if node.left is None:
        out.append(node.token)
        return
    _leaves(node.left, out)
    _leaves(node.right, out)


def _sequence(walker, term, var_policy, library_id, shared_set):
    out = []
    walker(_token_tree(term, var_policy, library_id, shared_set), out)
    return out


def preorder(term, var_policy=VarPolicy.LITERAL, library_id=None, shared_set=DEFAULT_SHARED_SET):
    """Node, then children (Abs: varType before body)."""
    return _sequence(_preorder, term, var_policy, library_id, shared_set)


def inorder(term, var_policy=VarPolicy.LITERAL, library_id=None, shared_set=DEFAULT_SHARED_SET):
    """First child, node, second child (Abs: varType, node, body)."""
    return _sequence(_inorder, term, var_policy, library_id, shared_set)


def postorder(term, var_policy=VarPolicy.LITERAL, library_id=None, shared_set=DEFAULT_SHARED_SET):
    """Children, then node."""
    return _sequence(_postorder, term, var_policy, library_id, shared_set)


def leaf_dump(term, var_policy=VarPolicy.LITERAL, library_id=None, shared_set=DEFAULT_SHARED_SET):
    """Identifier leaves left to right; equals preorder filtered to leaves."""
    return _sequence(_leaves, term, var_policy, library_id, shared_set)


def corpus_lines(
    items: Iterable[TtItem],
    dump: DumpMode = DumpMode.TREE,
    weights: TraversalWeights = TraversalWeights(),
    var_policy: VarPolicy = VarPolicy.NORMALIZED,
    shared_set=DEFAULT_SHARED_SET,
) -> Iterator[CorpusLine]:
    """Corpus lines for a stream of items.

    Tree mode yields up to three lines per item (zero-weight traversals are
    skipped) with the traversal weight as the line's learning-rate scale; leaf
    mode yields one line per item with scale 1.
    """
    dump = DumpMode(dump)
    if dump is DumpMode.TREE and weights.all_zero:
        raise ValueError("tree dump requires at least one nonzero traversal weight")
    for item in items:
        root = _token_tree(item.term, var_policy, item.library_id, shared_set)
        if dump is DumpMode.LEAF:
            out = []
            _leaves(root, out)
            yield CorpusLine(tuple(out), 1.0)
            continue
        for walker, weight in (
            (_preorder, weights.preorder),
            (_inorder, weights.inorder),
            (_postorder, weights.postorder),
        ):
            if weight == 0.0:
                continue
            out = []
            walker(root, out)
            yield CorpusLine(tuple(out), weight)


def plain_text_lines(lines: Iterable[str]) -> Iterator[CorpusLine]:
    """Wrap whitespace-tokenized plain text as corpus lines with scale 1."""
    for line in lines:
        tokens = tuple(line.split())
        if tokens:
            yield CorpusLine(tokens, 1.0)


def write_corpus(lines: Iterable[CorpusLine], path) -> int:
    """Write ``<lrScale> <tok1> <tok2> ...`` lines; returns the line count."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(f"{line.lr_scale:g} " + " ".join(line.tokens) + "\n")
            count += 1
    return count


def read_corpus(path) -> list:
    out = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            fields = raw.split()
            if not fields:
                continue
            out.append(CorpusLine(tuple(fields[1:]), float(fields[0])))
    return out
