"""Weighted relative distance logic over idempotent pv-monoids.

Syntax: boolean tests B(beta) with beta in the past fragment of the
unweighted logic, constants from the monoid, | and & interpreted by plus
and the product operation, first- and second-order existential
quantification interpreted by plus over positions respectively position
sets, and the two-operand universal all x.(f1, f2) interpreted by the
monoid's global valuation of the pair sequence ((f1 at i, f2 at i), t_i).

The module also implements the canonical form of syntactically
restricted sentences and the translations between such sentences and
Nivat triples whose language component is a logic sentence.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import rdl
from .core import TimedWord
from .errors import DomainError, FragmentError, ParseError, WatlError
from .monoids import TimedPvMonoid, WeightPairWord, sum_over
from .transform import NivatTriple
from .weights import INF, NEG_INF, Weight, format_weight, is_finite

# ---------------------------------------------------------------------------
# Abstract syntax


@dataclass(frozen=True)
class Bool:
    payload: object


@dataclass(frozen=True)
class Const:
    value: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class ExistsFO:
    var: str
    sub: object


@dataclass(frozen=True)
class Forall:
    var: str
    left: object
    right: object


@dataclass(frozen=True)
class ExistsSO:
    setvar: str
    sub: object


WrdlFormula = object


def free_vars(formula):
    """(free first-order vars, free second-order vars)."""
    if isinstance(formula, Bool):
        return rdl.free_vars(formula.payload)
    if isinstance(formula, Const):
        return frozenset(), frozenset()
    if isinstance(formula, (Or, And)):
        lf, ls = free_vars(formula.left)
        rf, rs = free_vars(formula.right)
        return lf | rf, ls | rs
    if isinstance(formula, ExistsFO):
        fo, so = free_vars(formula.sub)
        return fo - {formula.var}, so
    if isinstance(formula, Forall):
        lf, ls = free_vars(formula.left)
        rf, rs = free_vars(formula.right)
        return (lf | rf) - {formula.var}, ls | rs
    if isinstance(formula, ExistsSO):
        fo, so = free_vars(formula.sub)
        return fo, so - {formula.setvar}
    raise TypeError(f"not a weighted formula: {formula!r}")


def iter_nodes(formula):
    yield formula
    if isinstance(formula, (Or, And)):
        yield from iter_nodes(formula.left)
        yield from iter_nodes(formula.right)
    elif isinstance(formula, (ExistsFO, ExistsSO)):
        yield from iter_nodes(formula.sub)
    elif isinstance(formula, Forall):
        yield from iter_nodes(formula.left)
        yield from iter_nodes(formula.right)


def _all_names(formula) -> set:
    """Every variable name occurring anywhere, bound or free."""
    names = set()
    for node in iter_nodes(formula):
        if isinstance(node, Bool):
            for sub in rdl.iter_subformulas(node.payload):
                if isinstance(sub, rdl.Letter):
                    names.add(sub.var)
                elif isinstance(sub, rdl.Leq):
                    names.update((sub.left, sub.right))
                elif isinstance(sub, (rdl.InSet, rdl.Dist)):
                    names.update((sub.setvar, sub.var))
                elif isinstance(sub, rdl.ExistsFO):
                    names.add(sub.var)
                elif isinstance(sub, rdl.ExistsSO):
                    names.add(sub.setvar)
        elif isinstance(node, (ExistsFO, Forall)):
            names.add(node.var)
        elif isinstance(node, ExistsSO):
            names.add(node.setvar)
    return names


class NameSupply:
    """Fresh variable names avoiding everything seen so far."""

    def __init__(self, used):
        self.used = set(used)

    def fresh_fo(self, base="y") -> str:
        return self._fresh(base)

    def fresh_so(self, base="S") -> str:
        return self._fresh(base)

    def _fresh(self, base) -> str:
        i = 0
        while f"{base}{i}" in self.used:
            i += 1
        name = f"{base}{i}"
        self.used.add(name)
        return name


def validate_formula(formula, monoid: Optional[TimedPvMonoid] = None) -> None:
    """Structural validity: payloads in the past fragment, constants in
    the monoid domain, variable kinds consistent."""
    problems = []
    for node in iter_nodes(formula):
        if isinstance(node, Bool):
            if not rdl.classify(node.payload).in_rdl_past:
                problems.append(
                    f"boolean payload {rdl.to_text(node.payload)} leaves the past fragment")
        elif isinstance(node, Const):
            if monoid is not None and not monoid.contains(node.value):
                problems.append(f"constant {node.value!r} outside monoid domain")
        elif isinstance(node, (ExistsFO, Forall)):
            if not rdl.is_fo_name(node.var):
                problems.append(f"{node.var!r} is not a first-order variable name")
        elif isinstance(node, ExistsSO):
            if not rdl.is_so_name(node.setvar):
                problems.append(f"{node.setvar!r} is not a second-order variable name")
    if problems:
        raise FragmentError("; ".join(problems))


def _require_pv(monoid) -> TimedPvMonoid:
    """The weighted logic is defined over idempotent pv-monoids only;
    duplicate summands collapse throughout (quantifiers revisit subsets,
    and the normal forms merge guard branches)."""
    if not isinstance(monoid, TimedPvMonoid):
        raise DomainError(
            "the weighted logic needs a product valuation monoid "
            "(sum0, avg0 or disc0:LAM)")
    if not monoid.idempotent:
        raise DomainError(
            f"the weighted logic needs an idempotent plus; "
            f"monoid {monoid.id!r} is not idempotent")
    return monoid


_require_idempotent_pv = _require_pv


# ---------------------------------------------------------------------------
# Concrete syntax


def _extract_balanced(text: str, start: int) -> tuple:
    """Return (inner, end) for the parenthesized group opening at start."""
    depth = 0
    for i in range(start, len(text)):
        if text[i] == "(":
            depth += 1
        elif text[i] == ")":
            depth -= 1
            if depth == 0:
                return text[start + 1:i], i + 1
    raise ParseError("unbalanced parentheses", start)


def _w_tokenize(text: str):
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
            if name == "B":
                k = j
                while k < n and text[k].isspace():
                    k += 1
                if k < n and text[k] == "(":
                    inner, end = _extract_balanced(text, k)
                    tokens.append(("RDL", inner, i))
                    i = end
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
        if ch in "()|&.,-/":
            tokens.append((ch, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("EOF", None, n))
    return tokens


class _WParser:
    def __init__(self, text: str):
        self.tokens = _w_tokenize(text)
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
            left = And(left, self.unary())
        return left

    def unary(self):
        kind, value, pos = self.peek()
        if kind == "NAME" and value in ("ex", "EX", "all"):
            self.next()
            var = self.expect("NAME")[1]
            self.expect(".")
            if value == "all":
                self.expect("(")
                left = self.or_expr()
                self.expect(",")
                right = self.or_expr()
                self.expect(")")
                if not rdl.is_fo_name(var):
                    raise ParseError("'all' binds a first-order variable", pos)
                return Forall(var, left, right)
            body = self.or_expr()
            if value == "ex":
                if not rdl.is_fo_name(var):
                    raise ParseError("'ex' binds a first-order variable", pos)
                return ExistsFO(var, body)
            if not rdl.is_so_name(var):
                raise ParseError("'EX' binds a second-order variable", pos)
            return ExistsSO(var, body)
        return self.primary()

    def primary(self):
        kind, value, pos = self.next()
        if kind == "RDL":
            return Bool(rdl.parse_rdl(value))
        if kind == "(":
            inner = self.or_expr()
            self.expect(")")
            return inner
        if kind == "-" or kind == "NAT":
            negative = kind == "-"
            if negative:
                tok = self.next()
                if tok[0] == "NAME" and tok[1] == "inf":
                    return Const(NEG_INF)
                if tok[0] != "NAT":
                    raise ParseError("expected a number after '-'", tok[2])
                value = tok[1]
            numerator = value
            if self.peek()[0] == "/":
                self.next()
                denominator = self.expect("NAT")[1]
                out = Fraction(numerator, denominator)
            else:
                out = Fraction(numerator)
            return Const(-out if negative else out)
        if kind == "NAME" and value == "inf":
            return Const(INF)
        raise ParseError(f"unexpected token {value!r}", pos)


def parse_wrdl(text: str, monoid: Optional[TimedPvMonoid] = None):
    """Parse concrete syntax; validates payload fragments and, when a
    monoid is given, constant domains."""
    formula = _WParser(text).parse()
    validate_formula(formula, monoid)
    return formula


def to_text(formula) -> str:
    if isinstance(formula, Bool):
        return f"B({rdl.to_text(formula.payload)})"
    if isinstance(formula, Const):
        return format_weight(formula.value)
    if isinstance(formula, Or):
        return f"({to_text(formula.left)} | {to_text(formula.right)})"
    if isinstance(formula, And):
        return f"({to_text(formula.left)} & {to_text(formula.right)})"
    if isinstance(formula, ExistsFO):
        return f"(ex {formula.var}. {to_text(formula.sub)})"
    if isinstance(formula, Forall):
        return f"(all {formula.var}. ({to_text(formula.left)}, {to_text(formula.right)}))"
    if isinstance(formula, ExistsSO):
        return f"(EX {formula.setvar}. {to_text(formula.sub)})"
    raise TypeError(f"not a weighted formula: {formula!r}")


# ---------------------------------------------------------------------------
# Semantics


def wrdl_eval(formula, word: TimedWord, monoid, assignment=None) -> Weight:
    """Evaluate a weighted formula at a word under an assignment.

    Disjunction and the quantifiers aggregate with plus, conjunction with
    the product operation, and the two-operand universal applies the
    global valuation to the pairs it collects at every position.
    Second-order quantification enumerates all position subsets.
    """
    monoid = _require_pv(monoid)
    validate_formula(formula, monoid)
    sigma = assignment or rdl.Assignment()
    fo, so = free_vars(formula)
    missing = sorted(fo - set(sigma.fo)) + sorted(so - set(sigma.so))
    if missing:
        raise WatlError(f"unbound variables in evaluation: {', '.join(missing)}")
    n = len(word)
    for var, pos in sigma.fo.items():
        if not 1 <= pos <= n:
            raise WatlError(f"assignment sends {var!r} to {pos}, outside 1..{n}")
    for var, positions in sigma.so.items():
        if any(not 1 <= p <= n for p in positions):
            raise WatlError(f"assignment of {var!r} leaves 1..{n}")

    def ev(node, sigma):
        if isinstance(node, Bool):
            # Quantifier recursion below keeps assignments total and in
            # range, so the raw checker is safe here and skips the
            # per-call validation walk.
            return monoid.one if rdl._check_raw(node.payload, word, sigma) else monoid.zero
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Or):
            return monoid.plus(ev(node.left, sigma), ev(node.right, sigma))
        if isinstance(node, And):
            return monoid.diamond(ev(node.left, sigma), ev(node.right, sigma))
        if isinstance(node, ExistsFO):
            return sum_over(monoid, (ev(node.sub, sigma.with_fo(node.var, i))
                                     for i in range(1, n + 1)))
        if isinstance(node, Forall):
            entries = []
            for i in range(1, n + 1):
                inner = sigma.with_fo(node.var, i)
                entries.append(((ev(node.left, inner), ev(node.right, inner)),
                                word.delays[i - 1]))
            return monoid.val(WeightPairWord(tuple(entries)))
        if isinstance(node, ExistsSO):
            def values():
                for mask in range(2 ** n):
                    subset = frozenset(i + 1 for i in range(n) if mask >> i & 1)
                    yield ev(node.sub, sigma.with_so(node.setvar, subset))
            return sum_over(monoid, values())
        raise TypeError(f"not a weighted formula: {node!r}")

    return ev(formula, sigma)


# ---------------------------------------------------------------------------
# Fragments


def almost_boolean(formula) -> bool:
    """Built from tests and constants with | and & only."""
    if isinstance(formula, (Bool, Const)):
        return True
    if isinstance(formula, (Or, And)):
        return almost_boolean(formula.left) and almost_boolean(formula.right)
    return False


@dataclass(frozen=True)
class WrdlClassification:
    is_sentence: bool
    almost_boolean: bool
    syntactically_restricted: bool


def _restricted(node, under_forall) -> bool:
    if isinstance(node, Const):
        return under_forall
    if isinstance(node, Bool):
        return True
    if isinstance(node, Or):
        return _restricted(node.left, under_forall) and _restricted(node.right, under_forall)
    if isinstance(node, And):
        shape = (almost_boolean(node.left) and almost_boolean(node.right)) \
            or isinstance(node.left, Bool) or isinstance(node.right, Bool)
        return shape and _restricted(node.left, under_forall) \
            and _restricted(node.right, under_forall)
    if isinstance(node, Forall):
        return almost_boolean(node.left) and almost_boolean(node.right) \
            and _restricted(node.left, True) and _restricted(node.right, True)
    if isinstance(node, (ExistsFO, ExistsSO)):
        return _restricted(node.sub, under_forall)
    raise TypeError(f"not a weighted formula: {node!r}")


def wrdl_classify(formula) -> WrdlClassification:
    fo, so = free_vars(formula)
    sentence = not fo and not so
    return WrdlClassification(
        is_sentence=sentence,
        almost_boolean=almost_boolean(formula),
        syntactically_restricted=sentence and _restricted(formula, False),
    )


# ---------------------------------------------------------------------------
# Step functions


@dataclass(frozen=True)
class StepFunction:
    """An exclusive and exhaustive guard family with one value per branch."""

    branches: tuple  # of (rdl formula, weight)

    def evaluate(self, word: TimedWord, assignment=None) -> Weight:
        sigma = assignment or rdl.Assignment()
        hits = [value for guard, value in self.branches
                if rdl.model_check(guard, word, sigma)]
        if len(hits) != 1:
            raise WatlError(f"guard family matched {len(hits)} branches, expected 1")
        return hits[0]


def to_step_function(formula, monoid) -> StepFunction:
    """Compile an almost boolean formula into a step function.

    Branch guards are the signed refinements of the tests occurring in
    the formula; unsatisfiable sign combinations are kept, favouring
    soundness over minimality.
    """
    monoid = _require_pv(monoid)
    if isinstance(formula, Const):
        return StepFunction(((rdl.rdl_true(), formula.value),))
    if isinstance(formula, Bool):
        return StepFunction(((formula.payload, monoid.one),
                             (rdl.Not(formula.payload), monoid.zero)))
    if isinstance(formula, (Or, And)):
        combine = monoid.plus if isinstance(formula, Or) else monoid.diamond
        left = to_step_function(formula.left, monoid)
        right = to_step_function(formula.right, monoid)
        branches = []
        for g1, v1 in left.branches:
            for g2, v2 in right.branches:
                branches.append((rdl.rdl_and(g1, g2), combine(v1, v2)))
        return StepFunction(tuple(branches))
    raise FragmentError(f"not almost boolean: {to_text(formula)}")


# ---------------------------------------------------------------------------
# Canonical sentences


@dataclass(frozen=True)
class CanonicalSentence:
    """EX V. all var. (sum of B(guard_i) & left_i, sum of B(guard_i) & right_i).

    The guard family is exclusive and exhaustive for every word and
    assignment of the prefix variables.
    """

    so_vars: tuple
    var: str
    guards: tuple
    left: tuple
    right: tuple

    def to_formula(self):
        left = _value_disjunction(self.guards, self.left)
        right = _value_disjunction(self.guards, self.right)
        body = Forall(self.var, left, right)
        for v in reversed(self.so_vars):
            body = ExistsSO(v, body)
        return body

    def check_family(self, word: TimedWord, assignment=None) -> bool:
        """True when exactly one guard holds at every position."""
        sigma = assignment or rdl.Assignment()
        for i in range(1, len(word) + 1):
            inner = sigma.with_fo(self.var, i)
            hits = sum(1 for g in self.guards if rdl.model_check(g, word, inner))
            if hits != 1:
                return False
        return True


def _value_disjunction(guards, values):
    return rdl_big_or_w([And(Bool(g), Const(v)) for g, v in zip(guards, values)])


def rdl_big_or_w(parts):
    if not parts:
        raise WatlError("empty weighted disjunction")
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def _rename_guard_fo(guards, old, new):
    return tuple(rdl.substitute_fo(g, old, new) for g in guards)


def _rename_guard_so(guards, old, new):
    return tuple(_substitute_so(g, old, new) for g in guards)


def _substitute_so(formula, old, new):
    """Rename free occurrences of a second-order variable in an
    unweighted formula; ``new`` must be fresh."""
    if isinstance(formula, (rdl.Letter, rdl.Leq)):
        return formula
    if isinstance(formula, rdl.InSet):
        return rdl.InSet(new if formula.setvar == old else formula.setvar, formula.var)
    if isinstance(formula, rdl.Dist):
        return rdl.Dist(formula.rel, formula.bound,
                        new if formula.setvar == old else formula.setvar, formula.var)
    if isinstance(formula, rdl.Not):
        return rdl.Not(_substitute_so(formula.sub, old, new))
    if isinstance(formula, rdl.Or):
        return rdl.Or(_substitute_so(formula.left, old, new),
                      _substitute_so(formula.right, old, new))
    if isinstance(formula, rdl.ExistsFO):
        return rdl.ExistsFO(formula.var, _substitute_so(formula.sub, old, new))
    if isinstance(formula, rdl.ExistsSO):
        if formula.setvar == old:
            return formula
        if formula.setvar == new:
            raise WatlError(f"substitution would capture {new!r}")
        return rdl.ExistsSO(formula.setvar, _substitute_so(formula.sub, old, new))
    raise TypeError(f"not a formula: {formula!r}")


def _freshen(canonical: CanonicalSentence, names: NameSupply,
             avoid_fo=frozenset(), avoid_so=frozenset(),
             force_var: Optional[str] = None) -> CanonicalSentence:
    """Rename the bound variables of a canonical sentence away from the
    given free names (and optionally onto a shared universal variable)."""
    guards = canonical.guards
    var = canonical.var
    so_vars = list(canonical.so_vars)
    if force_var is not None and var != force_var:
        guards = _rename_guard_fo(guards, var, force_var)
        var = force_var
    elif var in avoid_fo:
        fresh = names.fresh_fo()
        guards = _rename_guard_fo(guards, var, fresh)
        var = fresh
    for k, v in enumerate(so_vars):
        if v in avoid_so:
            fresh = names.fresh_so()
            guards = _rename_guard_so(guards, v, fresh)
            so_vars[k] = fresh
    return CanonicalSentence(tuple(so_vars), var, guards, canonical.left, canonical.right)


def canonicalize(formula, monoid) -> CanonicalSentence:
    """Transform a syntactically restricted sentence to canonical form.

    Almost boolean parts become signed-refinement step functions; a
    conjunct B(beta) refines every guard with beta plus a rejecting
    remainder branch; disjunction of canonical sentences is merged with a
    fresh selector set variable (empty selects the left operand),
    collapsing duplicate summands by idempotence; first-order existential
    quantification is absorbed as a fresh singleton set variable with the
    singleton test expressed in the past fragment.
    """
    monoid = _require_idempotent_pv(monoid)
    validate_formula(formula, monoid)
    if not wrdl_classify(formula).syntactically_restricted:
        raise FragmentError("canonical form needs a syntactically restricted sentence")
    names = NameSupply(_all_names(formula))

    def canon(node) -> CanonicalSentence:
        if almost_boolean(node):
            step = to_step_function(node, monoid)
            guards = tuple(g for g, _ in step.branches)
            left = tuple(monoid.one for _ in step.branches)
            right = []
            for _, value in step.branches:
                if value == monoid.one:
                    right.append(monoid.one)
                elif value == monoid.zero:
                    right.append(monoid.zero)
                else:
                    raise FragmentError(
                        "constants outside a universal quantifier cannot be "
                        "canonicalized")
            return CanonicalSentence((), names.fresh_fo(), guards, left, tuple(right))
        if isinstance(node, Forall):
            s1 = to_step_function(node.left, monoid)
            s2 = to_step_function(node.right, monoid)
            guards, left, right = [], [], []
            for g1, v1 in s1.branches:
                for g2, v2 in s2.branches:
                    guards.append(rdl.rdl_and(g1, g2))
                    left.append(v1)
                    right.append(v2)
            return CanonicalSentence((), node.var, tuple(guards), tuple(left), tuple(right))
        if isinstance(node, And):
            if isinstance(node.left, Bool):
                test, rest = node.left, node.right
            elif isinstance(node.right, Bool):
                test, rest = node.right, node.left
            else:
                raise FragmentError("conjunction without a boolean operand")
            inner = canon(rest)
            pf_fo, pf_so = rdl.free_vars(test.payload)
            inner = _freshen(inner, names, avoid_fo=pf_fo, avoid_so=pf_so)
            guards = tuple(rdl.rdl_and(test.payload, g) for g in inner.guards)
            guards += (rdl.Not(test.payload),)
            return CanonicalSentence(inner.so_vars, inner.var, guards,
                                     inner.left + (monoid.one,),
                                     inner.right + (monoid.zero,))
        if isinstance(node, Or):
            first = canon(node.left)
            second = canon(node.right)
            shared = names.fresh_fo()
            first = _freshen(first, names, force_var=shared)
            second = _freshen(second, names, avoid_so=frozenset(first.so_vars),
                              force_var=shared)
            selector = names.fresh_so()
            probe = names.fresh_fo()
            nonempty = rdl.ExistsFO(probe, rdl.InSet(selector, probe))
            guards = tuple(rdl.rdl_and(rdl.Not(nonempty), g) for g in first.guards)
            guards += tuple(rdl.rdl_and(nonempty, g) for g in second.guards)
            return CanonicalSentence((selector,) + first.so_vars + second.so_vars,
                                     shared, guards,
                                     first.left + second.left,
                                     first.right + second.right)
        if isinstance(node, ExistsSO):
            inner = canon(node.sub)
            inner = _freshen(inner, names, avoid_so=frozenset([node.setvar]))
            return CanonicalSentence((node.setvar,) + inner.so_vars, inner.var,
                                     inner.guards, inner.left, inner.right)
        if isinstance(node, ExistsFO):
            inner = canon(node.sub)
            inner = _freshen(inner, names, avoid_fo=frozenset([node.var]))
            witness = names.fresh_so()
            z = names.fresh_fo()
            u = names.fresh_fo()
            same = rdl.rdl_and(rdl.Leq(u, z), rdl.Leq(z, u))
            singleton = rdl.ExistsFO(z, rdl.rdl_and(
                rdl.InSet(witness, z),
                rdl.Not(rdl.ExistsFO(u, rdl.rdl_and(rdl.InSet(witness, u),
                                                    rdl.Not(same))))))
            guards = tuple(
                rdl.rdl_and(singleton,
                            rdl.ExistsFO(node.var,
                                         rdl.rdl_and(rdl.InSet(witness, node.var), g)))
                for g in inner.guards)
            guards += (rdl.Not(singleton),)
            return CanonicalSentence((witness,) + inner.so_vars, inner.var, guards,
                                     inner.left + (monoid.one,),
                                     inner.right + (monoid.zero,))
        raise FragmentError(f"cannot canonicalize {to_text(node)}")

    return canon(formula)


# ---------------------------------------------------------------------------
# Translations between sentences and Nivat triples


def _ordered_unique(values):
    out = []
    for v in values:
        if not any(v == u for u in out):
            out.append(v)
    return out


def gamma_letter(letter: str, m, mp) -> str:
    return f"{letter}|{format_weight(m)}|{format_weight(mp)}"


def relabeled_guards(canonical: CanonicalSentence, gamma, h) -> tuple:
    """The guard family lifted to an auxiliary alphabet: every letter test
    P[a](x) becomes the disjunction of the gamma letters projecting to a.
    Second-order binders inside guards are alpha-renamed first so that no
    bound name collides with another guard's distance variable."""
    supply = NameSupply(set(canonical.so_vars) | {canonical.var} |
                        set().union(*[_rdl_names(gd) for gd in canonical.guards]))
    out = []
    for guard in canonical.guards:
        guard = _rename_bound_so(guard, supply)
        out.append(rdl.map_letter_atoms(
            guard,
            lambda letter, var: rdl.big_or([rdl.Letter(c, var) for c in gamma
                                            if h[c] == letter])))
    return tuple(out)


def sentence_to_nivat(canonical: CanonicalSentence, alphabet: tuple,
                      monoid) -> NivatTriple:
    """Present a canonical sentence as a Nivat triple.

    The auxiliary alphabet pairs each letter with one of the left values
    and one of the right values of the family.  The language sentence
    asserts that at every position the value components of the letter
    agree with the branch the guards select; its models correspond to the
    choice functions the canonical semantics sums over, so folding with
    val o g and projecting through h recovers the sentence's semantics
    (duplicate choices collapse by idempotence).
    """
    monoid = _require_idempotent_pv(monoid)
    for v in canonical.left + canonical.right:
        monoid.require(v, "canonical value")
    lefts = [m for m in _ordered_unique(canonical.left) if is_finite(m)]
    rights = [m for m in _ordered_unique(canonical.right) if is_finite(m)]
    gamma, h, g = [], {}, {}
    for a in alphabet:
        for m in lefts:
            for mp in rights:
                name = gamma_letter(a, m, mp)
                gamma.append(name)
                h[name] = a
                g[name] = (m, mp)

    lifted = relabeled_guards(canonical, tuple(gamma), h)

    y = canonical.var
    clauses = []
    for guard, m, mp in zip(lifted, canonical.left, canonical.right):
        if is_finite(m) and is_finite(mp):
            matching = rdl.big_or([
                rdl.Letter(gamma_letter(a, m, mp), y) for a in alphabet])
        else:
            # A branch valued at an infinite weight contributes the
            # monoid zero, so its positions are simply ruled out of the
            # language component instead of carrying a letter.
            matching = rdl.rdl_false()
        clauses.append(rdl.rdl_implies(guard, matching))

    dist = rdl.dist_vars(rdl.big_and(clauses)) if clauses else frozenset()
    if not dist <= set(canonical.so_vars):
        raise WatlError("distance variables escaped the canonical prefix")
    # The existential prefix of the language sentence must consist of
    # exactly its distance variables, so selector and singleton variables
    # that never reach a distance predicate get a vacuous mention.
    for v in canonical.so_vars:
        if v not in dist:
            atom = rdl.Dist(">=", 0, v, y)
            clauses.append(rdl.Or(atom, rdl.Not(atom)))
    body = rdl.rdl_forall_fo(y, rdl.big_and(clauses))
    for v in reversed(canonical.so_vars):
        body = rdl.ExistsSO(v, body)
    if not rdl.classify(body).exists_rdl_past_sentence:
        raise WatlError("emitted language sentence left the expected fragment")
    return NivatTriple(tuple(gamma), h, g, body, "sentence")


def _rdl_names(formula) -> set:
    names = set()
    for sub in rdl.iter_subformulas(formula):
        if isinstance(sub, rdl.Letter):
            names.add(sub.var)
        elif isinstance(sub, rdl.Leq):
            names.update((sub.left, sub.right))
        elif isinstance(sub, (rdl.InSet, rdl.Dist)):
            names.update((sub.setvar, sub.var))
        elif isinstance(sub, rdl.ExistsFO):
            names.add(sub.var)
        elif isinstance(sub, rdl.ExistsSO):
            names.add(sub.setvar)
    return names


def _rename_bound_so(formula, supply: NameSupply):
    """Alpha-rename second-order binders to fresh names so that distinct
    guards cannot share a bound name with another guard's distance
    variable."""
    if isinstance(formula, (rdl.Letter, rdl.Leq, rdl.InSet, rdl.Dist)):
        return formula
    if isinstance(formula, rdl.Not):
        return rdl.Not(_rename_bound_so(formula.sub, supply))
    if isinstance(formula, rdl.Or):
        return rdl.Or(_rename_bound_so(formula.left, supply),
                      _rename_bound_so(formula.right, supply))
    if isinstance(formula, rdl.ExistsFO):
        return rdl.ExistsFO(formula.var, _rename_bound_so(formula.sub, supply))
    if isinstance(formula, rdl.ExistsSO):
        fresh = supply.fresh_so("Z")
        renamed = _substitute_so(formula.sub, formula.setvar, fresh)
        return rdl.ExistsSO(fresh, _rename_bound_so(renamed, supply))
    raise TypeError(f"not a formula: {formula!r}")


def nivat_to_sentence(triple: NivatTriple, monoid):
    """Translate a triple whose language is a logic sentence back into a
    syntactically restricted weighted sentence.

    Fresh set variables X_c guess which auxiliary letter each position
    came from; the boolean part asserts the guess is a partition refining
    the letter projection and that the relabeled language sentence holds,
    while the universal part charges g1/g2 of the guessed letter.
    """
    monoid = _require_idempotent_pv(monoid)
    if triple.language_class != "sentence":
        raise WatlError("nivat_to_sentence needs a triple with a sentence language")
    sentence = triple.language
    cls = rdl.classify(sentence)
    if not cls.exists_rdl_past_sentence:
        raise FragmentError(
            "the language sentence must be an existentially prefixed past sentence")
    for c in triple.gamma:
        monoid.require(triple.g[c][0], f"g1({c})")
        monoid.require(triple.g[c][1], f"g2({c})")

    prefix = []
    body = sentence
    while isinstance(body, rdl.ExistsSO):
        prefix.append(body.setvar)
        body = body.sub

    supply = NameSupply(_rdl_names(sentence))
    xvar = {c: supply.fresh_so("X") for c in triple.gamma}
    replaced = rdl.map_letter_atoms(
        body,
        lambda letter, var: rdl.rdl_and(rdl.Letter(triple.h.get(letter, letter), var),
                                        rdl.InSet(xvar[letter], var))
        if letter in xvar else rdl.rdl_false())

    p = supply.fresh_fo("p")
    part = rdl.rdl_forall_fo(p, rdl.big_or([
        rdl.big_and([rdl.InSet(xvar[c], p)] +
                    [rdl.Not(rdl.InSet(xvar[d], p)) for d in triple.gamma if d != c])
        for c in triple.gamma]))
    letter_ok = rdl.rdl_forall_fo(p, rdl.big_and([
        rdl.rdl_implies(rdl.InSet(xvar[c], p), rdl.Letter(triple.h[c], p))
        for c in triple.gamma]))
    # The partition test goes first: model checking short-circuits
    # conjunctions, and almost all subset tuples fail it cheaply.
    payload = rdl.big_and([part, letter_ok, replaced])
    if not rdl.classify(payload).in_rdl_past:
        raise WatlError("combined boolean payload left the past fragment")

    q = supply.fresh_fo("q")
    left = rdl_big_or_w([And(Bool(rdl.InSet(xvar[c], q)), Const(triple.g[c][0]))
                         for c in triple.gamma])
    right = rdl_big_or_w([And(Bool(rdl.InSet(xvar[c], q)), Const(triple.g[c][1]))
                          for c in triple.gamma])
    out = And(Bool(payload), Forall(q, left, right))
    for v in reversed(prefix):
        out = ExistsSO(v, out)
    for c in reversed(triple.gamma):
        out = ExistsSO(xvar[c], out)
    if not wrdl_classify(out).syntactically_restricted:
        raise WatlError("translation produced a non-restricted sentence")
    return out
