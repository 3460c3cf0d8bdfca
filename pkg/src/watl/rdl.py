"""Relative distance logic over timed words.

Formulas are built from letter tests P[a](x), position comparisons
x <= y, set membership X(x), and the past distance predicate
dpast[REL c](X, x), closed under negation, disjunction and first- and
second-order existential quantification.  First-order variables start
with a lowercase letter or underscore, second-order variables with an
uppercase letter.

The past distance predicate looks at the greatest position z in X
strictly before x: when such a z exists it compares the elapsed time
between events z and x against the constant, and otherwise it compares
the absolute time of event x.

Concrete syntax (``&`` and ``all x.`` are sugar for the primitive
connectives; quantifier bodies extend as far right as possible)::

    P[a](x)   x <= y   X(x)   dpast[<=2](X,x)   !f   f | g   f & g
    ex x. f   EX X. f   all x. f
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Optional

from .core import TimedWord
from .errors import ParseError, WatlError

DIST_RELATIONS = ("<", "<=", "=", ">=", ">")


# ---------------------------------------------------------------------------
# Abstract syntax


@dataclass(frozen=True)
class Letter:
    letter: str
    var: str


@dataclass(frozen=True)
class Leq:
    left: str
    right: str


@dataclass(frozen=True)
class InSet:
    setvar: str
    var: str


@dataclass(frozen=True)
class Dist:
    rel: str
    bound: int
    setvar: str
    var: str

    def __post_init__(self):
        if self.rel not in DIST_RELATIONS:
            raise ValueError(f"unknown distance relation {self.rel!r}")
        if not isinstance(self.bound, int) or self.bound < 0:
            raise ValueError("distance bounds are naturals")


@dataclass(frozen=True)
class Not:
    sub: "RdlFormula"


@dataclass(frozen=True)
class Or:
    left: "RdlFormula"
    right: "RdlFormula"


@dataclass(frozen=True)
class ExistsFO:
    var: str
    sub: "RdlFormula"


@dataclass(frozen=True)
class ExistsSO:
    setvar: str
    sub: "RdlFormula"


RdlFormula = object


def is_so_name(name: str) -> bool:
    return bool(name) and name[0].isupper()


def is_fo_name(name: str) -> bool:
    return bool(name) and not name[0].isupper()


# ---------------------------------------------------------------------------
# Builders for derived forms


def rdl_and(left, right):
    return Not(Or(Not(left), Not(right)))


def rdl_implies(premise, conclusion):
    return Or(Not(premise), conclusion)


def rdl_forall_fo(var, sub):
    return Not(ExistsFO(var, Not(sub)))


def rdl_true():
    """A closed tautology: timed words are non-empty."""
    return ExistsFO("u0", Leq("u0", "u0"))


def rdl_false():
    return Not(rdl_true())


def rdl_first(var):
    """No position lies strictly before var."""
    return Not(ExistsFO("z0", rdl_and(Leq("z0", var), Not(Leq(var, "z0")))))


def rdl_last(var):
    """No position lies strictly after var."""
    return Not(ExistsFO("z0", rdl_and(Leq(var, "z0"), Not(Leq("z0", var)))))


def big_or(parts):
    parts = list(parts)
    if not parts:
        return rdl_false()
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def big_and(parts):
    parts = list(parts)
    if not parts:
        return rdl_true()
    out = parts[0]
    for p in parts[1:]:
        out = rdl_and(out, p)
    return out


# ---------------------------------------------------------------------------
# Structural utilities


def iter_subformulas(formula) -> Iterator:
    yield formula
    if isinstance(formula, Not):
        yield from iter_subformulas(formula.sub)
    elif isinstance(formula, Or):
        yield from iter_subformulas(formula.left)
        yield from iter_subformulas(formula.right)
    elif isinstance(formula, (ExistsFO, ExistsSO)):
        yield from iter_subformulas(formula.sub)


def free_vars(formula):
    """(free first-order vars, free second-order vars)."""
    if isinstance(formula, Letter):
        return frozenset([formula.var]), frozenset()
    if isinstance(formula, Leq):
        return frozenset([formula.left, formula.right]), frozenset()
    if isinstance(formula, InSet):
        return frozenset([formula.var]), frozenset([formula.setvar])
    if isinstance(formula, Dist):
        return frozenset([formula.var]), frozenset([formula.setvar])
    if isinstance(formula, Not):
        return free_vars(formula.sub)
    if isinstance(formula, Or):
        lf, ls = free_vars(formula.left)
        rf, rs = free_vars(formula.right)
        return lf | rf, ls | rs
    if isinstance(formula, ExistsFO):
        fo, so = free_vars(formula.sub)
        return fo - {formula.var}, so
    if isinstance(formula, ExistsSO):
        fo, so = free_vars(formula.sub)
        return fo, so - {formula.setvar}
    raise TypeError(f"not a formula: {formula!r}")


def dist_vars(formula) -> frozenset:
    """Set variables applied in a past distance predicate anywhere."""
    return frozenset(
        sub.setvar for sub in iter_subformulas(formula) if isinstance(sub, Dist)
    )


def so_quantified_vars(formula) -> frozenset:
    return frozenset(
        sub.setvar for sub in iter_subformulas(formula) if isinstance(sub, ExistsSO)
    )


def substitute_fo(formula, old: str, new: str):
    """Rename free occurrences of a first-order variable.

    The caller must pick ``new`` fresh; a binder for ``new`` inside the
    formula would capture it, which is rejected.
    """
    def walk(node, shadowed):
        if isinstance(node, Letter):
            return Letter(node.letter, new if node.var == old and old not in shadowed else node.var)
        if isinstance(node, Leq):
            left = new if node.left == old and old not in shadowed else node.left
            right = new if node.right == old and old not in shadowed else node.right
            return Leq(left, right)
        if isinstance(node, InSet):
            return InSet(node.setvar, new if node.var == old and old not in shadowed else node.var)
        if isinstance(node, Dist):
            return Dist(node.rel, node.bound, node.setvar,
                        new if node.var == old and old not in shadowed else node.var)
        if isinstance(node, Not):
            return Not(walk(node.sub, shadowed))
        if isinstance(node, Or):
            return Or(walk(node.left, shadowed), walk(node.right, shadowed))
        if isinstance(node, ExistsFO):
            if node.var == new and old not in shadowed:
                fo, _ = free_vars(node.sub)
                if old in fo:
                    raise WatlError(f"substitution would capture {new!r}")
            return ExistsFO(node.var, walk(node.sub, shadowed | {node.var}))
        if isinstance(node, ExistsSO):
            return ExistsSO(node.setvar, walk(node.sub, shadowed))
        raise TypeError(f"not a formula: {node!r}")

    return walk(formula, frozenset())


def map_letter_atoms(formula, builder: Callable[[str, str], object]):
    """Replace every letter atom P[a](x) by builder(a, x)."""
    if isinstance(formula, Letter):
        return builder(formula.letter, formula.var)
    if isinstance(formula, (Leq, InSet, Dist)):
        return formula
    if isinstance(formula, Not):
        return Not(map_letter_atoms(formula.sub, builder))
    if isinstance(formula, Or):
        return Or(map_letter_atoms(formula.left, builder),
                  map_letter_atoms(formula.right, builder))
    if isinstance(formula, ExistsFO):
        return ExistsFO(formula.var, map_letter_atoms(formula.sub, builder))
    if isinstance(formula, ExistsSO):
        return ExistsSO(formula.setvar, map_letter_atoms(formula.sub, builder))
    raise TypeError(f"not a formula: {formula!r}")


def strip_double_negation(formula):
    while isinstance(formula, Not) and isinstance(formula.sub, Not):
        formula = formula.sub.sub
    return formula


def match_and(formula) -> Optional[tuple]:
    """Recognize the derived conjunction Not(Or(Not(a), Not(b)))."""
    if not (isinstance(formula, Not) and isinstance(formula.sub, Or)):
        return None
    left, right = formula.sub.left, formula.sub.right
    if isinstance(left, Not) and isinstance(right, Not):
        return left.sub, right.sub
    return None


# ---------------------------------------------------------------------------
# Concrete syntax


_SYMBOLS = ("<=", "(", ")", "[", "]", ",", ".", "!", "|", "&")


def _tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            name = text[i:j]
            if name == "P" and j < n and text[j] == "[":
                k = text.find("]", j + 1)
                if k < 0:
                    raise ParseError("unterminated letter predicate", i)
                tokens.append(("LETTER", text[j + 1:k], i))
                i = k + 1
                continue
            tokens.append(("NAME", name, i))
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("NAT", int(text[i:j]), i))
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append((sym, sym, i))
                i += len(sym)
                break
        else:
            for rel in (">=", "<", ">", "="):
                if text.startswith(rel, i):
                    tokens.append(("REL", rel, i))
                    i += len(rel)
                    break
            else:
                raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("EOF", None, n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self):
        formula = self.or_expr()
        tok = self.peek()
        if tok[0] != "EOF":
            raise ParseError(f"trailing input starting at {tok[1]!r}", tok[2])
        return formula

    def or_expr(self):
        left = self.and_expr()
        while self.peek()[0] == "|":
            self.next()
            left = Or(left, self.and_expr())
        return left

    def and_expr(self):
        left = self.unary()
        while self.peek()[0] == "&":
            self.next()
            left = rdl_and(left, self.unary())
        return left

    def unary(self):
        kind, value, pos = self.peek()
        if kind == "!":
            self.next()
            return Not(self.unary())
        if kind == "NAME" and value in ("ex", "EX", "all"):
            self.next()
            var = self.expect("NAME")[1]
            self.expect(".")
            body = self.or_expr()
            if value == "ex":
                if not is_fo_name(var):
                    raise ParseError(f"'ex' binds first-order variables, got {var!r}", pos)
                return ExistsFO(var, body)
            if value == "EX":
                if not is_so_name(var):
                    raise ParseError(f"'EX' binds second-order variables, got {var!r}", pos)
                return ExistsSO(var, body)
            if is_fo_name(var):
                return rdl_forall_fo(var, body)
            return Not(ExistsSO(var, Not(body)))
        return self.atom()

    def atom(self):
        kind, value, pos = self.next()
        if kind == "(":
            inner = self.or_expr()
            self.expect(")")
            return inner
        if kind == "LETTER":
            self.expect("(")
            var = self.expect("NAME")[1]
            self.expect(")")
            if not is_fo_name(var):
                raise ParseError("letter predicates take a first-order variable", pos)
            return Letter(value, var)
        if kind == "NAME" and value == "dpast":
            self.expect("[")
            tok = self.next()
            if tok[0] == "<=":
                rel = "<="
            elif tok[0] == "REL":
                rel = tok[1]
            else:
                raise ParseError("expected a relation in dpast[...]", tok[2])
            bound = self.expect("NAT")[1]
            self.expect("]")
            self.expect("(")
            setvar = self.expect("NAME")[1]
            self.expect(",")
            var = self.expect("NAME")[1]
            self.expect(")")
            if not is_so_name(setvar) or not is_fo_name(var):
                raise ParseError("dpast takes (set variable, position variable)", pos)
            return Dist(rel, bound, setvar, var)
        if kind == "NAME" and is_so_name(value):
            self.expect("(")
            var = self.expect("NAME")[1]
            self.expect(")")
            return InSet(value, var)
        if kind == "NAME" and is_fo_name(value):
            self.expect("<=")
            right = self.expect("NAME")[1]
            if not is_fo_name(right):
                raise ParseError("<= compares first-order variables", pos)
            return Leq(value, right)
        raise ParseError(f"unexpected token {value!r}", pos)


def parse_rdl(text: str):
    """Parse concrete syntax into a formula."""
    return _Parser(text).parse()


def to_text(formula) -> str:
    """Render a formula; parse_rdl(to_text(f)) == f."""
    if isinstance(formula, Letter):
        return f"P[{formula.letter}]({formula.var})"
    if isinstance(formula, Leq):
        return f"{formula.left} <= {formula.right}"
    if isinstance(formula, InSet):
        return f"{formula.setvar}({formula.var})"
    if isinstance(formula, Dist):
        return f"dpast[{formula.rel}{formula.bound}]({formula.setvar},{formula.var})"
    if isinstance(formula, Not):
        return f"!({to_text(formula.sub)})"
    if isinstance(formula, Or):
        return f"({to_text(formula.left)} | {to_text(formula.right)})"
    if isinstance(formula, ExistsFO):
        return f"(ex {formula.var}. {to_text(formula.sub)})"
    if isinstance(formula, ExistsSO):
        return f"(EX {formula.setvar}. {to_text(formula.sub)})"
    raise TypeError(f"not a formula: {formula!r}")


# ---------------------------------------------------------------------------
# Semantics


class Assignment:
    """Variable assignment: positions for first-order variables,
    position sets for second-order variables (1-based)."""

    def __init__(self, fo: Optional[Mapping] = None, so: Optional[Mapping] = None):
        self.fo = dict(fo or {})
        self.so = {k: frozenset(v) for k, v in (so or {}).items()}

    def with_fo(self, var, position):
        out = Assignment(self.fo, self.so)
        out.fo[var] = position
        return out

    def with_so(self, var, positions):
        out = Assignment(self.fo, self.so)
        out.so[var] = frozenset(positions)
        return out

    def __repr__(self):
        return f"Assignment(fo={self.fo}, so={self.so})"


def dist_holds(word: TimedWord, positions: frozenset, position: int, rel: str, bound: int) -> bool:
    """Truth of the past distance predicate at a position.

    Positions in the set at or after ``position`` are ignored; without an
    earlier set position the absolute event time is compared.
    """
    sums = word.prefix_sums()
    earlier = [z for z in positions if z < position]
    if earlier:
        delta = sums[position - 1] - sums[max(earlier) - 1]
    else:
        delta = sums[position - 1]
    if rel == "<":
        return delta < bound
    if rel == "<=":
        return delta <= bound
    if rel == "=":
        return delta == bound
    if rel == ">=":
        return delta >= bound
    return delta > bound


def validate_assignment(formula, word: TimedWord, sigma: Assignment) -> None:
    """Raise unless the assignment covers the free variables and stays in
    the word's position range."""
    fo, so = free_vars(formula)
    missing = sorted(fo - set(sigma.fo)) + sorted(so - set(sigma.so))
    if missing:
        raise WatlError(f"unbound variables in model check: {', '.join(missing)}")
    n = len(word)
    for var, pos in sigma.fo.items():
        if not 1 <= pos <= n:
            raise WatlError(f"assignment sends {var!r} to {pos}, outside 1..{n}")
    for var, positions in sigma.so.items():
        if any(not 1 <= p <= n for p in positions):
            raise WatlError(f"assignment of {var!r} leaves 1..{n}")


def _check_raw(node, word: TimedWord, sigma: Assignment) -> bool:
    """The recursion behind model_check, without input validation; every
    free variable must already be bound in range."""
    if isinstance(node, Letter):
        return word.entries[sigma.fo[node.var] - 1][0] == node.letter
    if isinstance(node, Leq):
        return sigma.fo[node.left] <= sigma.fo[node.right]
    if isinstance(node, InSet):
        return sigma.fo[node.var] in sigma.so[node.setvar]
    if isinstance(node, Dist):
        return dist_holds(word, sigma.so[node.setvar], sigma.fo[node.var], node.rel, node.bound)
    if isinstance(node, Not):
        return not _check_raw(node.sub, word, sigma)
    if isinstance(node, Or):
        return _check_raw(node.left, word, sigma) or _check_raw(node.right, word, sigma)
    if isinstance(node, ExistsFO):
        return any(_check_raw(node.sub, word, sigma.with_fo(node.var, i))
                   for i in range(1, len(word) + 1))
    if isinstance(node, ExistsSO):
        n = len(word)
        for mask in range(2 ** n):
            subset = frozenset(i + 1 for i in range(n) if mask >> i & 1)
            if _check_raw(node.sub, word, sigma.with_so(node.setvar, subset)):
                return True
        return False
    raise TypeError(f"not a formula: {node!r}")


def model_check(formula, word: TimedWord, assignment: Optional[Assignment] = None) -> bool:
    """Decide word, assignment |= formula by structural recursion.

    Second-order quantifiers enumerate all position subsets, so this is
    exponential in the word length and intended for desk-scale inputs.
    """
    sigma = assignment or Assignment()
    validate_assignment(formula, word, sigma)
    return _check_raw(formula, word, sigma)


# ---------------------------------------------------------------------------
# Fragments


@dataclass(frozen=True)
class RdlClassification:
    dist_vars: frozenset
    free_fo: frozenset
    free_so: frozenset
    is_sentence: bool
    in_rdl_past: bool
    exists_rdl_past_sentence: bool


def classify(formula) -> RdlClassification:
    """Fragment membership used by the weighted logic.

    in_rdl_past: no second-order quantifier binds a variable that is
    used in a past distance predicate anywhere in the formula.
    exists_rdl_past_sentence: the formula is a sentence of the shape
    EX X1. ... EX Xm. body where {X1..Xm} is exactly the set of distance
    variables of the body and the body is in the past fragment.
    """
    fo, so = free_vars(formula)
    dvars = dist_vars(formula)
    is_sentence = not fo and not so
    in_past = not (so_quantified_vars(formula) & dvars)

    prefix = []
    body = formula
    while isinstance(body, ExistsSO):
        prefix.append(body.setvar)
        body = body.sub
    body_class_ok = not (so_quantified_vars(body) & dist_vars(body))
    exists_past = (
        is_sentence
        and len(prefix) == len(set(prefix))
        and frozenset(prefix) == dist_vars(body)
        and body_class_ok
    )
    return RdlClassification(dvars, fo, so, is_sentence, in_past, exists_past)
