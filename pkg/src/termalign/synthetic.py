"""Paired synthetic libraries with a planted constant bijection.

Desk-scale stand-in for real library exports: both libraries instantiate the
same term templates, differing only in constant names, so the pattern matcher
recovers the planted pairs exactly and the embedding pipeline has a ground
truth to be scored against.  Each constant is wired to its own pair of logical
operators and a binder, which gives its occurrences a distinctive context
signature made of shared tokens.
"""

from __future__ import annotations

import numpy as np

from .evaluate import GoldAlignment
from .terms import Abs, Comb, Id, Kind, TtItem

__all__ = ["synthetic_libraries"]

_OPS = ("=", ">", "/\\", "\\/", "==>", "<=>")
_BINDERS = ("!", "?")


def _signature(k):
    """Distinct (operator, operator, binder) triple per constant index."""
    return _OPS[k % 6], _OPS[(k // 6) % 6], _BINDERS[(k // 36) % 2]


def _infix(op, left, right):
    return Comb(Id(op), Comb(left, right))


def _apply(fun, arg):
    return Comb(fun, arg)


def _constant_fragment(k, name, var):
    """A small formula shape unique to constant k, mentioning it twice."""
    op1, op2, _ = _signature(k)
    left = _apply(Id(name), Id(var))
    right = _infix(op2, Id(var), _apply(Id(name), Id(var)))
    return _infix(op1, left, right)


def _template_body(rng, slot_indices, names, var):
    parts = [_constant_fragment(k, names[k], var) for k in slot_indices]
    # filler clause so single-slot templates still vary in shape
    filler_op = _OPS[int(rng.integers(0, len(_OPS)))]
    parts.append(_infix(filler_op, Id(var), Id(var)))
    body = parts[0]
    for part in parts[1:]:
        joiner = _OPS[int(rng.integers(0, len(_OPS)))]
        body = _infix(joiner, body, part)
    return body


def synthetic_libraries(n_templates=500, n_constants=50, seed=0):
    """Build (library1_items, library2_items, gold) with a planted bijection.

    Every template yields one item per library with identical structure;
    library 1 uses constants ``cons/a<k>``, library 2 their partners
    ``cons/b<k>``.  Each library also declares one ty item per constant.
    """
    rng = np.random.default_rng(seed)
    names1 = [f"cons/a{k}" for k in range(n_constants)]
    names2 = [f"cons/b{k}" for k in range(n_constants)]

    template_specs = []
    for _ in range(n_templates):
        n_slots = int(rng.integers(1, 4))
        slots = rng.choice(n_constants, size=n_slots, replace=False)
        # skew usage so constant frequencies vary
        slots = np.unique((slots * slots // (n_constants // 2 + 1)) % n_constants)
        spec_seed = int(rng.integers(0, 2**31))
        template_specs.append((tuple(int(s) for s in slots), spec_seed))

    def instantiate(names, library_id):
        items = []
        for k in range(n_constants):
            partner_a = names[(k + 1) % n_constants]
            partner_b = names[(k * 7 + 3) % n_constants]
            shape = k % 4
            if shape == 0:
                type_term = _infix(">", Id(partner_a), Id(partner_b))
            elif shape == 1:
                type_term = _infix(">", Id(partner_a), _infix(">", Id(partner_b), Id(partner_a)))
            elif shape == 2:
                type_term = _infix(">", _infix(">", Id(partner_a), Id(partner_b)), Id(partner_b))
            else:
                type_term = _infix(">", Id(partner_a), _infix(">", Id(partner_a), Id(partner_b)))
            term = Comb(Id(":"), Comb(Id(names[k]), type_term))
            items.append(TtItem(f"def{k}", Kind.TY, term, library_id,
                                frozenset({names[k], partner_a, partner_b, ">", ":"})))
        for t, (slots, spec_seed) in enumerate(template_specs):
            trng = np.random.default_rng(spec_seed)
            primary = slots[0]
            _, _, binder = _signature(primary)
            body = _template_body(trng, slots, names, "x")
            term = Comb(Id(binder), Abs("x", _apply(Id(names[primary]), Id("x")), body))
            used = frozenset(names[k] for k in slots) | {binder, "="}
            items.append(TtItem(f"thm{t}", Kind.AX, term, library_id, used))
        return items

    gold = GoldAlignment(tuple(zip(names1, names2)))
    return instantiate(names1, 1), instantiate(names2, 2), gold
