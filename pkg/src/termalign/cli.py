"""Command-line front end.

Subcommands: ``corpus`` (parse two tt files into a shuffled s-expression
corpus), ``train`` (corpus to model file), ``nn`` (nearest neighbors), ``eval``
(Top-N hits against a gold file), ``align`` (pattern-matching baseline) and
``serve`` (line-protocol query server).  Exit codes: 0 success, 1 usage error,
2 data error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import align as align_mod
from . import evaluate, trainer
from .model import load_model, save_model
from .server import QueryServer
from .terms import Kind, TtItem, TtSyntaxError, parse_sexp, parse_tt_file, to_sexp
from .traversal import DumpMode, TraversalWeights, VarPolicy, corpus_lines

__all__ = ["main"]

USAGE_ERROR = 1
DATA_ERROR = 2


class DataError(Exception):
    """Bad input data (missing file, parse failure, unknown token)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise DataError(str(exc)) from exc


def _parse_library(path, library_id):
    try:
        items = parse_tt_file(_read_text(path), library_id)
    except TtSyntaxError as exc:
        raise DataError(f"{path}: {exc}") from exc
    if not items:
        raise DataError(f"{path}: no tt items found")
    return items


def _load_model(path):
    try:
        return load_model(path)
    except OSError as exc:
        raise DataError(str(exc)) from exc
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _parse_weights(parser, text):
    fields = text.split(",")
    if len(fields) != 3:
        parser.error(f"--weights expects three comma-separated values, got {text!r}")
    try:
        values = [float(f) for f in fields]
    except ValueError:
        parser.error(f"--weights values must be numbers, got {text!r}")
    if any(w < 0 for w in values):
        parser.error("--weights values must be nonnegative")
    if any(w > 1 for w in values):
        parser.error("--weights values must be at most 1")
    return values


def cmd_corpus(args):
    items1 = _parse_library(args.in1, 1)
    items2 = _parse_library(args.in2, 2)
    combined = items1 + items2
    order = np.random.default_rng(args.seed).permutation(len(combined))
    with open(args.out, "w", encoding="utf-8") as fh:
        for i in order:
            item = combined[i]
            fh.write(f"L{item.library_id} {to_sexp(item.term)}\n")
    print(f"library 1: {len(items1)} items")
    print(f"library 2: {len(items2)} items")
    print(f"total: {len(combined)} lines")
    return 0


def _read_sexp_corpus(path):
    items = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                tag, _, sexp = line.partition(" ")
                if not tag.startswith("L") or not tag[1:].isdigit() or not sexp:
                    raise DataError(f"{path}:{lineno}: expected 'L<id> <sexp>'")
                try:
                    term = parse_sexp(sexp)
                except TtSyntaxError as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from exc
                items.append(TtItem(f"line{lineno}", Kind.AX, term, int(tag[1:])))
    except OSError as exc:
        raise DataError(str(exc)) from exc
    if not items:
        raise DataError(f"{path}: empty corpus")
    return items


def cmd_train(args, parser):
    weights = _parse_weights(parser, args.weights)
    dump = DumpMode(args.dump)
    if dump is DumpMode.TREE and all(w == 0 for w in weights):
        parser.error("--weights 0,0,0 disables every traversal in tree mode")
    items = _read_sexp_corpus(args.corpus)
    config = trainer.TrainConfig(
        dim=args.dim,
        learning_rate=args.lr,
        window=args.ws,
        epochs=args.epoch,
        negatives=args.neg,
        loss=args.loss,
        model=args.mode,
        threads=args.threads,
        seed=args.seed,
        min_count=args.min_count,
    )
    lines = list(corpus_lines(
        items,
        dump=dump,
        weights=TraversalWeights(*weights),
        var_policy=VarPolicy(args.var_policy),
    ))
    try:
        model = trainer.train(lines, config)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    metadata = {
        "weights": args.weights,
        "dump": args.dump,
        "var_policy": args.var_policy,
        "dim": str(args.dim),
        "lr": str(args.lr),
        "ws": str(args.ws),
        "epoch": str(args.epoch),
        "neg": str(args.neg),
        "threads": str(args.threads),
        "min_count": str(args.min_count),
    }
    save_model(model, args.out, metadata)
    print(f"trained {len(model)} tokens, dim {model.dim}, {len(lines)} corpus lines")
    return 0


def cmd_nn(args):
    model = _load_model(args.model)
    try:
        results = evaluate.nearest(model, args.query, args.k, args.lib)
    except KeyError:
        raise DataError(f"unknown token {args.query!r}") from None
    for token, score in results:
        print(f"{token}\t{score:.6f}")
    return 0


def cmd_eval(args, parser):
    try:
        cutoffs = [int(x) for x in args.topn.split(",")]
    except ValueError:
        parser.error(f"--topn expects comma-separated integers, got {args.topn!r}")
    if not cutoffs or any(n < 1 for n in cutoffs):
        parser.error("--topn cutoffs must be >= 1")
    model = _load_model(args.model)
    try:
        gold = evaluate.load_gold(args.gold)
    except OSError as exc:
        raise DataError(str(exc)) from exc
    except ValueError as exc:
        raise DataError(f"{args.gold}: {exc}") from exc
    report = evaluate.topn_hit(model, gold, cutoffs)
    ordered = sorted(report.totals)
    print("\t".join(f"Top-{n} Hit" for n in ordered))
    print("\t".join(str(report.totals[n]) for n in ordered))
    sys.stdout.write(evaluate.report_tsv(report))
    if report.oov:
        print(f"# out-of-vocabulary queries: {report.oov}", file=sys.stderr)
    return 0


def cmd_align(args):
    items1 = _parse_library(args.in1, 1)
    items2 = _parse_library(args.in2, 2)
    match_set = align_mod.enumerate_matches(items1, items2, known_constants="item")
    if match_set.m == 0 or match_set.n == 0:
        align_mod.write_alignments([], args.out)
        print("no matching term pairs")
        return 0
    state = align_mod.score_iterate(match_set, eps=args.eps, max_iters=args.max_iters)
    if not state.converged:
        print(
            f"warning: not converged after {state.iterations} iterations "
            f"(last delta {state.final_delta:.3g})",
            file=sys.stderr,
        )
    rows = align_mod.rank_alignments(state, match_set)
    align_mod.write_alignments(rows, args.out)
    print(f"{match_set.m} term pairs, {match_set.n} constant pairs, "
          f"{state.iterations} iterations")
    return 0


def cmd_serve(args):
    model = _load_model(args.model)
    server = QueryServer(model, port=args.port)
    print(f"serving on {server.address[0]}:{server.port}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


def build_parser():
    parser = _Parser(prog="termalign", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("corpus", help="parse two tt files into a shuffled s-expression corpus")
    p.add_argument("--in1", required=True, help="library 1 tt file")
    p.add_argument("--in2", required=True, help="library 2 tt file")
    p.add_argument("--out", required=True, help="output corpus file")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train", help="train an embedding model from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--ws", type=int, default=10)
    p.add_argument("--epoch", type=int, default=5)
    p.add_argument("--neg", type=int, default=5)
    p.add_argument("--loss", choices=trainer.LOSSES, default="ns")
    p.add_argument("--mode", choices=trainer.MODELS, default="cbow")
    p.add_argument("--dump", choices=[m.value for m in DumpMode], default="tree")
    p.add_argument("--weights", default="0.33,0.33,0.33")
    p.add_argument("--threads", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-count", type=int, default=1, dest="min_count")
    p.add_argument("--var-policy", choices=[v.value for v in VarPolicy],
                   default="normalized", dest="var_policy")

    p = sub.add_parser("nn", help="nearest neighbors of a token")
    p.add_argument("--model", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--lib", type=int, choices=(1, 2), required=True)

    p = sub.add_parser("eval", help="Top-N hit rates against a gold alignment")
    p.add_argument("--model", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--topn", default="1,3,10,20")

    p = sub.add_parser("align", help="iterative pattern-matching baseline")
    p.add_argument("--in1", required=True)
    p.add_argument("--in2", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=100, dest="max_iters")

    p = sub.add_parser("serve", help="line-protocol query server")
    p.add_argument("--model", required=True)
    p.add_argument("--port", type=int, required=True)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "corpus":
            return cmd_corpus(args)
        if args.command == "train":
            return cmd_train(args, parser)
        if args.command == "nn":
            if args.k < 1:
                parser.error("--k must be >= 1")
            return cmd_nn(args)
        if args.command == "eval":
            return cmd_eval(args, parser)
        if args.command == "align":
            return cmd_align(args)
        return cmd_serve(args)
    except DataError as exc:
        print(f"termalign: error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
