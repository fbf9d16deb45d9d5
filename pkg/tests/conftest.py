import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from termalign.terms import Abs, Comb, Id

LISTING2 = """\
tt('const/arith/PRE', ty, ('type/nums/num' > 'type/nums/num')).
tt('thm/arith/PRE_0', ax,
    (('const/arith/PRE' ('const/nums/NUMERAL' 'const/nums/_0')) =
      ('const/nums/NUMERAL' 'const/nums/_0'))).
tt('thm/arith/PRE_1', ax,
    (![n : 'type/nums/num']:
      (('const/arith/PRE' ('const/nums/SUC' n)) = n))).
"""

# golden serializations of the three term trees of the PRE definition
LISTING2_GOLDEN = (
    '(Comb (Id ":") (Comb (Id "const/arith/PRE") (Comb (Id ">") '
    '(Comb (Id "type/nums/num") (Id "type/nums/num")))))',
    '(Comb (Id "=") (Comb (Comb (Id "const/arith/PRE") '
    '(Comb (Id "const/nums/NUMERAL") (Id "const/nums/_0"))) '
    '(Comb (Id "const/nums/NUMERAL") (Id "const/nums/_0"))))',
    '(Comb (Id "!") (Abs "n" (Id "type/nums/num") (Comb (Id "=") '
    '(Comb (Comb (Id "const/arith/PRE") (Comb (Id "const/nums/SUC") (Id "n"))) '
    '(Id "n")))))',
)


@pytest.fixture
def listing2_text():
    return LISTING2


@pytest.fixture
def listing2_golden():
    return LISTING2_GOLDEN


@pytest.fixture
def simple_theorem():
    """The worked traversal example: for all x of type num, x = x."""
    return Comb(Id("!"), Abs("x", Id("num"), Comb(Id("="), Comb(Id("x"), Id("x")))))


def quantified_equation(type_name, op_name, unit_name):
    """for all x of the given type: (x <op> <unit>) = x, with pair-style application."""
    body = Comb(Id("="), Comb(Comb(Id(op_name), Comb(Id("x"), Id(unit_name))), Id("x")))
    return Comb(Id("!"), Abs("x", Id(type_name), body))


@pytest.fixture
def matching_pair():
    """Two alpha-similar theorems over different constants: x+0=x and x*1=x."""
    return quantified_equation("num", "+", "0"), quantified_equation("real", "*", "1")
