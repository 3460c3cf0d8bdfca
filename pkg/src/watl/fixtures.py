"""Hand-checked example models shared by the tests and the fuzz suites.

Every fixture is small enough to evaluate by hand; the values quoted in
the docstrings are frozen into the test-suite as expectations.
"""

from __future__ import annotations

from fractions import Fraction

from . import rdl
from .core import ClockConstraint, Edge, TimedAutomaton
from .monoids import monoid_from_id
from .wrdl import And, Bool, Const, ExistsSO, Forall, Or
from .wta import WeightedTimedAutomaton


def _true():
    return ClockConstraint.true()


def _zero_edge_weights(edges):
    return {e.id: Fraction(0) for e in edges}


# ---------------------------------------------------------------------------
# Plain and weighted automata


def all_words(alphabet=("a", "b")) -> TimedAutomaton:
    """Accepts every non-empty timed word, one run each."""
    edges = tuple(
        Edge(f"loop_{a}", "hub", a, _true(), frozenset(), "hub")
        for a in alphabet)
    return TimedAutomaton(
        alphabet=tuple(alphabet),
        locations=("hub",),
        clocks=(),
        initial=("hub",),
        final=("hub",),
        edges=edges,
        unambiguous=True,
    )


def all_words_ambiguous(alphabet=("a", "b")) -> TimedAutomaton:
    """Accepts every non-empty timed word with exactly two runs each: two
    disconnected copies of the single-location acceptor."""
    edges = []
    for copy in ("one", "two"):
        for a in alphabet:
            edges.append(Edge(f"{copy}_{a}", copy, a, _true(), frozenset(), copy))
    return TimedAutomaton(
        alphabet=tuple(alphabet),
        locations=("one", "two"),
        clocks=(),
        initial=("one", "two"),
        final=("one", "two"),
        edges=tuple(edges),
        unambiguous=False,
    )


def first_letter_rates() -> WeightedTimedAutomaton:
    """Value t1 when the word starts with 'a' and 2*t1 otherwise: rate 1
    or 2 is charged before the first letter and nothing afterwards.
    On (b,3)(a,1) the value is 6."""
    base = TimedAutomaton(
        alphabet=("a", "b"),
        locations=("start_a", "start_b", "rest"),
        clocks=(),
        initial=("start_a", "start_b"),
        final=("rest",),
        edges=(
            Edge("first_a", "start_a", "a", _true(), frozenset(), "rest"),
            Edge("first_b", "start_b", "b", _true(), frozenset(), "rest"),
            Edge("rest_a", "rest", "a", _true(), frozenset(), "rest"),
            Edge("rest_b", "rest", "b", _true(), frozenset(), "rest"),
        ),
        unambiguous=True,
    )
    rates = {"start_a": Fraction(1), "start_b": Fraction(2), "rest": Fraction(0)}
    return WeightedTimedAutomaton(base, monoid_from_id("sum"), rates,
                                  _zero_edge_weights(base.edges))


def parallel_edge_weights() -> WeightedTimedAutomaton:
    """Two parallel 'a' edges of discrete weights 1 and 2 (all rates 0);
    min-plus behavior on (a,1) is 1."""
    base = TimedAutomaton(
        alphabet=("a",),
        locations=("l0", "l1"),
        clocks=(),
        initial=("l0",),
        final=("l1",),
        edges=(
            Edge("cheap", "l0", "a", _true(), frozenset(), "l1"),
            Edge("dear", "l0", "a", _true(), frozenset(), "l1"),
            Edge("stay", "l1", "a", _true(), frozenset(), "l1"),
        ),
        unambiguous=False,
    )
    weights = {"cheap": Fraction(1), "dear": Fraction(2), "stay": Fraction(0)}
    return WeightedTimedAutomaton(base, monoid_from_id("sum"),
                                  {"l0": Fraction(0), "l1": Fraction(0)},
                                  weights)


def two_step_chain() -> WeightedTimedAutomaton:
    """Two-step chain with rates 1 then 5 and edge weights 0 then 7; the
    run on (a,1)(a,2) weighs 1*1+0 + 5*2+7 = 18 under min-plus sum."""
    base = TimedAutomaton(
        alphabet=("a",),
        locations=("l0", "l1", "l2"),
        clocks=(),
        initial=("l0",),
        final=("l2",),
        edges=(
            Edge("e1", "l0", "a", _true(), frozenset(), "l1"),
            Edge("e2", "l1", "a", _true(), frozenset(), "l2"),
        ),
        unambiguous=True,
    )
    return WeightedTimedAutomaton(
        base, monoid_from_id("sum"),
        {"l0": Fraction(1), "l1": Fraction(5), "l2": Fraction(0)},
        {"e1": Fraction(0), "e2": Fraction(7)})


def relabel_pair() -> tuple:
    """A weighted automaton over the two-letter alphabet {g1, g2} whose
    loops cost 1 and 2, together with the map sending both letters to
    'a'.  Summing over the four preimages of (a,1)(a,1) gives
    min{2,3,3,4} = 2."""
    base = TimedAutomaton(
        alphabet=("g1", "g2"),
        locations=("hub",),
        clocks=(),
        initial=("hub",),
        final=("hub",),
        edges=(
            Edge("pick1", "hub", "g1", _true(), frozenset(), "hub"),
            Edge("pick2", "hub", "g2", _true(), frozenset(), "hub"),
        ),
        unambiguous=True,
    )
    weighted = WeightedTimedAutomaton(
        base, monoid_from_id("sum"), {"hub": Fraction(0)},
        {"pick1": Fraction(1), "pick2": Fraction(2)})
    return weighted, {"g1": "a", "g2": "a"}


def duration_meter() -> WeightedTimedAutomaton:
    """Single-location rate-1 loop over {a}: behavior is the total
    duration of the word."""
    base = all_words(("a",))
    return WeightedTimedAutomaton(base, monoid_from_id("sum"),
                                  {"hub": Fraction(1)},
                                  _zero_edge_weights(base.edges))


def first_delay_bounded() -> TimedAutomaton:
    """Accepts the words over {a} whose first delay is at most 1."""
    return TimedAutomaton(
        alphabet=("a",),
        locations=("l0", "l1"),
        clocks=("x",),
        initial=("l0",),
        final=("l1",),
        edges=(
            Edge("gate", "l0", "a", ClockConstraint.parse("x<=1"),
                 frozenset(), "l1"),
            Edge("tail", "l1", "a", _true(), frozenset(), "l1"),
        ),
        unambiguous=True,
    )


def constant_one_product() -> WeightedTimedAutomaton:
    """Weighted over the counting monoid (natural addition, product of
    discrete weights): every word of the singleton alphabet is valued 1
    via the single run with all discrete weights 1."""
    base = all_words(("a",))
    return WeightedTimedAutomaton(base, monoid_from_id("prod"),
                                  {"hub": Fraction(0)},
                                  {"loop_a": Fraction(1)})


# ---------------------------------------------------------------------------
# Priced automata for the infimum-cost machinery


def priced_min_wait() -> WeightedTimedAutomaton:
    """Rate 3 until an edge guarded x>=2 of cost 1 fires: the cheapest
    accepting run costs 3*2+1 = 7, attained at delay exactly 2."""
    base = TimedAutomaton(
        alphabet=("a",),
        locations=("wait", "done"),
        clocks=("x",),
        initial=("wait",),
        final=("done",),
        edges=(
            Edge("go", "wait", "a", ClockConstraint.parse("x>=2"),
                 frozenset(), "done"),
        ),
        unambiguous=True,
    )
    return WeightedTimedAutomaton(
        base, monoid_from_id("sum"),
        {"wait": Fraction(3), "done": Fraction(0)},
        {"go": Fraction(1)})


def priced_unreachable() -> WeightedTimedAutomaton:
    """A final location without incoming edges: no accepting run."""
    base = TimedAutomaton(
        alphabet=("a",),
        locations=("wait", "stuck"),
        clocks=(),
        initial=("wait",),
        final=("stuck",),
        edges=(
            Edge("spin", "wait", "a", _true(), frozenset(), "wait"),
        ),
        unambiguous=True,
    )
    return WeightedTimedAutomaton(
        base, monoid_from_id("sum"),
        {"wait": Fraction(0), "stuck": Fraction(0)},
        {"spin": Fraction(0)})


def priced_strict_guard() -> WeightedTimedAutomaton:
    """Rate -1 until an edge guarded x<1 of cost 0 fires: run costs are
    -t for t < 1, so the infimum -1 is approached but never attained."""
    base = TimedAutomaton(
        alphabet=("a",),
        locations=("fall", "done"),
        clocks=("x",),
        initial=("fall",),
        final=("done",),
        edges=(
            Edge("leap", "fall", "a", ClockConstraint.parse("x<1"),
                 frozenset(), "done"),
        ),
        unambiguous=True,
    )
    return WeightedTimedAutomaton(
        base, monoid_from_id("sum"),
        {"fall": Fraction(-1), "done": Fraction(0)},
        {"leap": Fraction(0)})


def priced_negative_cycle() -> WeightedTimedAutomaton:
    """Two locations trading letters a/b with total cycle cost -1; runs
    of unboundedly negative weight exist, so the infimum is -inf."""
    base = TimedAutomaton(
        alphabet=("a", "b"),
        locations=("ping", "pong"),
        clocks=(),
        initial=("ping",),
        final=("pong",),
        edges=(
            Edge("down", "ping", "a", _true(), frozenset(), "pong"),
            Edge("back", "pong", "b", _true(), frozenset(), "ping"),
        ),
        unambiguous=True,
    )
    return WeightedTimedAutomaton(
        base, monoid_from_id("sum"),
        {"ping": Fraction(0), "pong": Fraction(0)},
        {"down": Fraction(-1), "back": Fraction(0)})


# ---------------------------------------------------------------------------
# Weighted sentences


def average_cost_sentence() -> Forall:
    """The average-cost sentence over {a,b}: every position charges rate
    C (1 for a, 2 for b) and discrete weight D (0 for a, 1 for b); over
    the average pv-monoid the value on (a,1)(b,1) is (1+0+2+1)/2 = 2."""

    def by_letter(table):
        return Or(
            And(Bool(rdl.Letter("a", "x")), Const(Fraction(table["a"]))),
            And(Bool(rdl.Letter("b", "x")), Const(Fraction(table["b"]))),
        )

    return Forall("x", by_letter({"a": 1, "b": 2}), by_letter({"a": 0, "b": 1}))


def squared_length_sentence() -> Forall:
    """all x.(0, all y.(0, 1)): over the min-plus pv-monoid the inner
    universal contributes |w| at every position, so the value is |w|^2.
    Not syntactically restricted (the inner universal is not almost
    boolean)."""
    return Forall("x", Const(Fraction(0)),
                  Forall("y", Const(Fraction(0)), Const(Fraction(1))))


def _only_position_within(atoms) -> Bool:
    """B(ex x. first(x) & last(x) & <distance atoms at x>): the word has
    exactly one position and its delay satisfies every atom.  The set
    variable Y is never made to hold anywhere relevant, so the distance
    predicates compare against the absolute event time."""
    body = rdl.rdl_and(rdl.rdl_first("x"), rdl.rdl_last("x"))
    for rel, bound in atoms:
        body = rdl.rdl_and(body, rdl.Dist(rel, bound, "Y", "x"))
    return Bool(rdl.ExistsFO("x", body))


def min_wait_sentence() -> ExistsSO:
    """Values 3*t1 + 1 on single-letter words with t1 >= 2 and infinity
    elsewhere (over min-plus); the infimum over all words is 7."""
    return ExistsSO("Y", And(
        _only_position_within([(">=", 2)]),
        Forall("z", Const(Fraction(3)), Const(Fraction(1)))))


def bounded_average_sentence() -> ExistsSO:
    """Averages (t+5)/t on single-letter words with 1 <= t <= 2 and
    infinity elsewhere; achievable averages fill [7/2, 6] with both ends
    attained."""
    return ExistsSO("Y", And(
        _only_position_within([(">=", 1), ("<=", 2)]),
        Forall("z", Const(Fraction(1)), Const(Fraction(5)))))
