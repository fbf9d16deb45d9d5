"""Concept alignment across formal proof libraries.

Two routes to the same goal: joint word embeddings trained over tree-traversal
serializations of the libraries' terms, and the iterative pattern-matching
baseline.  An evaluation harness scores either against a gold alignment with
the Top-N hit metric.
"""

from .align import (
    MatchSet,
    Pattern,
    ScoreState,
    enumerate_matches,
    g,
    patternify,
    rank_alignments,
    score_iterate,
)
from .evaluate import (
    GoldAlignment,
    HitReport,
    NeighborIndex,
    cosine,
    load_gold,
    nearest,
    topn_hit,
)
from .model import EmbeddingModel, load_model, save_model
from .server import QueryServer
from .synthetic import synthetic_libraries
from .terms import (
    Abs,
    Comb,
    DEFAULT_LOGICAL_CONSTANTS,
    Id,
    Kind,
    TtItem,
    TtSyntaxError,
    constants_of,
    parse_sexp,
    parse_tt_file,
    to_sexp,
)
from .trainer import (
    ContextSample,
    TrainConfig,
    cbow_update,
    context_window,
    skipgram_update,
    softmax_probs,
    train,
)
from .traversal import (
    CorpusLine,
    DumpMode,
    TraversalWeights,
    VarPolicy,
    corpus_lines,
    inorder,
    leaf_dump,
    postorder,
    preorder,
    read_corpus,
    tokenize_node,
    write_corpus,
)
from .vocab import (
    Dictionary,
    HuffmanCoding,
    NegativeTable,
    build_dictionary,
    build_huffman,
    build_negative_table,
)

__version__ = "0.1.0"
