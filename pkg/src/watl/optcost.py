"""Infimum run cost of sum-weighted timed automata and threshold
decisions for restricted weighted sentences.

The infimum is computed on the corner-point graph: nodes pair a location
with a clock region and one of the region's corner valuations, delay
arcs move to the time successor either for free (when the corner lies on
the shared boundary) or at one unit of the location rate, and discrete
arcs follow edges whose guard holds throughout the region.  Optimal
corner paths are limits of concrete runs, so shortest-path costs equal
the infimum over run weights; a negative cycle that is both reachable
and co-reachable witnesses an infimum of minus infinity.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import rdl, wrdl
from .core import (ClockAtom, ClockConstraint, Edge, TimedAutomaton, TimedWord,
                   constraint_satisfiable)
from .errors import DomainError, UnsupportedGuardError
from .monoids import TimedPvMonoid, monoid_from_id
from .transform import comp_automaton, product_intersect
from .weights import INF, NEG_INF, Weight, is_finite
from .wrdl import CanonicalSentence
from .wta import WeightedTimedAutomaton, behavior

# ---------------------------------------------------------------------------
# Clock regions


@dataclass(frozen=True)
class Region:
    """Statuses per clock plus the ordering of nonzero fractional parts.

    A status is ("eq", k) for integer value k, ("in", k) for a value in
    the open interval (k, k+1) below the clock's maximum constant, or
    ("gt",) above it.  ``fracs`` lists the groups of "in" clocks with
    equal fractional part, smallest fraction first.
    """

    statuses: tuple
    fracs: tuple
    max_consts: tuple

    def status_map(self) -> dict:
        return dict(self.statuses)

    def max_map(self) -> dict:
        return dict(self.max_consts)


def region_zero(max_consts) -> Region:
    return Region(tuple((c, ("eq", 0)) for c in sorted(max_consts)), (),
                  tuple(sorted(max_consts.items())))


def region_of(valuation, max_consts) -> Region:
    statuses = []
    buckets = {}
    for clock in sorted(max_consts):
        value = Fraction(valuation[clock])
        cap = max_consts[clock]
        if value > cap:
            statuses.append((clock, ("gt",)))
            continue
        whole = value.numerator // value.denominator
        frac = value - whole
        if frac == 0:
            statuses.append((clock, ("eq", whole)))
        else:
            statuses.append((clock, ("in", whole)))
            buckets.setdefault(frac, []).append(clock)
    fracs = tuple(frozenset(buckets[f]) for f in sorted(buckets))
    return Region(tuple(statuses), fracs, tuple(sorted(max_consts.items())))


def time_successor(region: Region) -> Region:
    """The region entered next under time elapse (self once all clocks
    are above their maximum constants)."""
    stats = region.status_map()
    caps = region.max_map()
    if all(s[0] == "gt" for s in stats.values()):
        return region
    at_integer = [c for c, s in stats.items() if s[0] == "eq"]
    if at_integer:
        new = dict(stats)
        group = []
        for c in at_integer:
            k = stats[c][1]
            if k < caps[c]:
                new[c] = ("in", k)
                group.append(c)
            else:
                new[c] = ("gt",)
        fracs = ((frozenset(group),) + region.fracs) if group else region.fracs
        return Region(tuple(sorted(new.items())), fracs, region.max_consts)
    new = dict(stats)
    for c in region.fracs[-1]:
        new[c] = ("eq", stats[c][1] + 1)
    return Region(tuple(sorted(new.items())), region.fracs[:-1], region.max_consts)


def region_reset(region: Region, resets) -> Region:
    new = region.status_map()
    for c in resets:
        new[c] = ("eq", 0)
    fracs = []
    for group in region.fracs:
        trimmed = group - frozenset(resets)
        if trimmed:
            fracs.append(trimmed)
    return Region(tuple(sorted(new.items())), tuple(fracs), region.max_consts)


def _atom_holds_on_region(status, atom: ClockAtom) -> bool:
    kind = status[0]
    if kind == "eq":
        return atom.holds(Fraction(status[1]))
    if kind == "in":
        k = status[1]
        if atom.rel in ("<=", "<"):
            return atom.bound >= k + 1
        if atom.rel in (">=", ">"):
            return atom.bound <= k
        return False  # "=" never holds strictly between integers
    # above the maximum constant; guard bounds never exceed it
    if atom.rel in (">=", ">"):
        return True
    return False


def region_satisfies(region: Region, constraint: ClockConstraint) -> bool:
    """Whether the (uniform) points of the region satisfy the guard."""
    stats = region.status_map()
    return all(_atom_holds_on_region(stats[a.clock], a) for a in constraint.atoms)


def region_corners(region: Region) -> tuple:
    """The integer vertices of the region's closure.

    Rounding a group of fractional clocks up is only consistent when all
    groups with larger fractions round up too, so the corners are indexed
    by how many of the largest groups are rounded up.  Clocks above their
    maximum constant get the placeholder value M+1; it never feeds guard
    checks, only bookkeeping.
    """
    stats = region.status_map()
    caps = region.max_map()
    base = {}
    for c, s in stats.items():
        base[c] = caps[c] + 1 if s[0] == "gt" else s[1]
    groups = region.fracs
    corners = []
    for up in range(len(groups) + 1):
        corner = dict(base)
        for gi in range(len(groups) - up, len(groups)):
            for c in groups[gi]:
                corner[c] = stats[c][1] + 1
        item = tuple(sorted(corner.items()))
        if item not in corners:
            corners.append(item)
    return tuple(corners)


def reachable_regions(max_consts) -> frozenset:
    """Regions reachable from the all-zero valuation by time elapse and
    single-clock resets."""
    start = region_zero(max_consts)
    seen = {start}
    queue = [start]
    while queue:
        region = queue.pop()
        steps = [time_successor(region)]
        steps.extend(region_reset(region, {c}) for c in max_consts)
        for nxt in steps:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return frozenset(seen)


# ---------------------------------------------------------------------------
# Corner-point graph and the cost infimum


@dataclass(frozen=True)
class CornerArc:
    """One move in the corner-point graph: a delay step (edge None,
    cost rate*time with time 0 or 1) or a discrete step firing an edge
    (cost = edge weight, time 0)."""

    src: tuple
    dst: tuple
    cost: Fraction
    time: int
    edge: Optional[Edge]


@dataclass(frozen=True)
class CornerPointGraph:
    """Finite graph over (location, region, corner) nodes whose accepting
    path costs have the same infimum as the automaton's run weights.

    A node's corner assigns each clock an integer from the closure of its
    region, with clocks above their maximum constant pinned to that
    constant plus one.  Accepting nodes carry a final location; a valid
    accepting path must end with a discrete arc into one (runs read at
    least one letter and end on an edge).
    """

    nodes: tuple
    arcs: tuple
    initial: tuple
    accepting: tuple


@dataclass(frozen=True)
class InfCostResult:
    """value is the infimum of run weights; when it is finite and some
    concrete word achieves it exactly, attained is True and witness holds
    such a word.  corner_word is the integral word read off the optimal
    corner path (also when the infimum is only approached)."""

    value: Weight
    attained: bool
    witness: Optional[TimedWord]
    corner_word: Optional[TimedWord] = None


def _require_finite_weights(wta: WeightedTimedAutomaton) -> None:
    problems = []
    for loc in wta.base.locations:
        if not is_finite(wta.wt_location(loc)):
            problems.append(f"location rate of {loc!r} is not a finite rational")
    for edge in wta.base.edges:
        if not is_finite(wta.wt_edge(edge.id)):
            problems.append(f"edge weight of {edge.id!r} is not a finite rational")
    if problems:
        raise DomainError("; ".join(problems))


def _build_graph(wta: WeightedTimedAutomaton):
    base = wta.base
    caps = base.max_constants()
    clocks = sorted(base.clocks)
    start_region = region_zero(caps)
    start_corner = tuple((c, 0) for c in clocks)
    inits = tuple((l, start_region, start_corner) for l in base.initial)
    nodes = set(inits)
    queue = list(inits)
    arcs = []
    corners_cache = {}
    edges_by_source = {}
    for e in base.edges:
        edges_by_source.setdefault(e.source, []).append(e)

    def push(node):
        if node not in nodes:
            nodes.add(node)
            queue.append(node)

    while queue:
        node = queue.pop()
        loc, region, corner = node
        rate = Fraction(wta.wt_location(loc))
        stats = region.status_map()
        corner_map = dict(corner)
        tracked = any(s[0] != "gt" for s in stats.values())
        if not tracked:
            arcs.append(CornerArc(node, node, rate, 1, None))
        else:
            succ = time_successor(region)
            succ_corners = corners_cache.setdefault(succ, set(region_corners(succ)))
            succ_stats = succ.status_map()

            def lift(bump):
                out = {}
                for c in clocks:
                    if succ_stats[c][0] == "gt":
                        out[c] = caps[c] + 1
                    else:
                        out[c] = corner_map[c] + bump
                return tuple(sorted(out.items()))

            slide = lift(0)
            if slide in succ_corners:
                target = (loc, succ, slide)
                arcs.append(CornerArc(node, target, Fraction(0), 0, None))
                push(target)
            unit = lift(1)
            if unit in succ_corners:
                target = (loc, succ, unit)
                arcs.append(CornerArc(node, target, rate, 1, None))
                push(target)
        for e in edges_by_source.get(loc, ()):
            if not region_satisfies(region, e.guard):
                continue
            reset_region = region_reset(region, e.resets)
            reset_corner = tuple(
                (c, 0 if c in e.resets else corner_map[c]) for c in clocks)
            target = (e.target, reset_region, reset_corner)
            arcs.append(CornerArc(node, target, Fraction(wta.wt_edge(e.id)), 0, e))
            push(target)
    return nodes, arcs, inits


def build_corner_points(wta: WeightedTimedAutomaton) -> CornerPointGraph:
    """The corner-point graph of a sum-weighted automaton.

    Guards are checked over whole regions (equivalently, on region
    closures approached from inside), which is what lets infima sit on
    the boundary of a strict guard without being attained there.
    """
    wta.validate()
    if wta.monoid.id != "sum":
        raise DomainError(
            f"corner-point graphs need the sum monoid, got {wta.monoid.id!r}")
    _require_finite_weights(wta)
    nodes, arcs, inits = _build_graph(wta)
    final = set(wta.base.final)
    accepting = tuple(n for n in sorted(nodes, key=repr) if n[0] in final)
    return CornerPointGraph(tuple(sorted(nodes, key=repr)), tuple(arcs),
                            inits, accepting)


def _bellman_ford(nodes, arcs, inits):
    dist = {n: None for n in nodes}
    pred = {}
    for n in inits:
        dist[n] = Fraction(0)
    rounds = len(nodes)
    converged = False
    for _ in range(rounds):
        changed = False
        for arc in arcs:
            ds = dist[arc.src]
            if ds is None:
                continue
            candidate = ds + arc.cost
            dd = dist[arc.dst]
            if dd is None or candidate < dd:
                dist[arc.dst] = candidate
                pred[arc.dst] = arc
                changed = True
        if not changed:
            converged = True
            break
    unstable = set()
    if not converged:
        for arc in arcs:
            ds = dist[arc.src]
            if ds is None:
                continue
            dd = dist[arc.dst]
            if dd is None or ds + arc.cost < dd:
                unstable.add(arc.dst)
    return dist, unstable, pred


def _forward_closure(seed, arcs):
    out = set(seed)
    changed = True
    while changed:
        changed = False
        for arc in arcs:
            if arc.src in out and arc.dst not in out:
                out.add(arc.dst)
                changed = True
    return out


def _backward_closure(seed, arcs):
    out = set(seed)
    changed = True
    while changed:
        changed = False
        for arc in arcs:
            if arc.dst in out and arc.src not in out:
                out.add(arc.src)
                changed = True
    return out


def _useful_subgraph(wta: WeightedTimedAutomaton):
    """The corner-point graph restricted to nodes lying on some path from
    an initial node to the source of an accepting discrete arc."""
    graph = build_corner_points(wta)
    acc_nodes = set(graph.accepting)
    acc_arcs = [a for a in graph.arcs
                if a.edge is not None and a.dst in acc_nodes]
    reach = _forward_closure(graph.initial, graph.arcs)
    co = _backward_closure({a.src for a in acc_arcs}, graph.arcs)
    useful = reach & co
    arcs = [a for a in graph.arcs if a.src in useful and a.dst in useful]
    inits = tuple(n for n in graph.initial if n in useful)
    acc_arcs = [a for a in acc_arcs if a.src in useful]
    return useful, arcs, inits, acc_arcs


def _negative_cycle(nodes, arcs, inits, unstable, pred):
    """Extract one negative-cost cycle after a failed convergence, as a
    forward-ordered arc list."""
    bound = len(nodes)
    for start in unstable:
        node = start
        ok = True
        for _ in range(bound):
            arc = pred.get(node)
            if arc is None:
                ok = False
                break
            node = arc.src
        if not ok:
            continue
        cycle = []
        cur = node
        while True:
            arc = pred[cur]
            cycle.append(arc)
            cur = arc.src
            if cur == node:
                break
        cycle.reverse()
        if sum(a.cost for a in cycle) < 0:
            return cycle
    return None


def _arc_path(arcs, sources, targets):
    """A fewest-arc path from any source node to any target node, or None.
    Returns [] when a source is already a target."""
    targets = set(targets)
    seen = set(sources)
    back = {}
    dq = deque(sources)
    hit = None
    for s in sources:
        if s in targets:
            return []
    out = {}
    for arc in arcs:
        out.setdefault(arc.src, []).append(arc)
    while dq and hit is None:
        node = dq.popleft()
        for arc in out.get(node, ()):
            if arc.dst in seen:
                continue
            seen.add(arc.dst)
            back[arc.dst] = arc
            if arc.dst in targets:
                hit = arc.dst
                break
            dq.append(arc.dst)
    if hit is None:
        return None
    path = []
    node = hit
    while node in back:
        arc = back[node]
        path.append(arc)
        node = arc.src
    path.reverse()
    return path


def _tight_parents(dist, arcs, inits):
    """A cycle-free parent assignment realizing the computed distances."""
    children = {}
    for arc in arcs:
        ds, dd = dist[arc.src], dist[arc.dst]
        if ds is not None and dd is not None and ds + arc.cost == dd:
            children.setdefault(arc.src, []).append(arc)
    parent = {}
    roots = [n for n in inits if dist[n] == Fraction(0)]
    seen = set(roots)
    dq = deque(roots)
    while dq:
        node = dq.popleft()
        for arc in children.get(node, ()):
            if arc.dst not in seen:
                seen.add(arc.dst)
                parent[arc.dst] = arc
                dq.append(arc.dst)
    return parent, seen


def _word_of_path(path) -> Optional[TimedWord]:
    letters = []
    delays = []
    pending = Fraction(0)
    for arc in path:
        if arc.edge is None:
            pending += arc.time
        else:
            letters.append(arc.edge.label)
            delays.append(pending)
            pending = Fraction(0)
    if not letters:
        return None
    return TimedWord.from_pairs(zip(letters, delays))


def _perturbations(word: TimedWord):
    """The corner word plus nearby rational variants used to probe
    whether the infimum is actually reached."""
    yield word
    letters = word.letters
    delays = word.delays
    seen = {delays}
    for j in range(1, 7):
        eps = Fraction(1, 2 ** j)
        variants = (
            tuple(t + eps for t in delays),
            tuple(t - eps if t > eps else t for t in delays),
            tuple(t + eps if t == 0 else t for t in delays),
            tuple(t - eps if t > eps else t + eps for t in delays),
            tuple(t + eps if t == 0 else (t - eps if t > eps else t) for t in delays),
        )
        for d in variants:
            if d not in seen:
                seen.add(d)
                yield TimedWord.from_pairs(zip(letters, d))


def inf_cost(wta: WeightedTimedAutomaton) -> InfCostResult:
    """Infimum of run weights under the finite-rational sum valuation.

    Requires the sum monoid with every location rate and edge weight a
    finite rational; callers with infinite weights must prune them first
    (sound for the minimum).  Returns inf when no accepting run exists
    and -inf when runs of unboundedly negative weight exist.
    """
    useful, arcs, inits, acc_arcs = _useful_subgraph(wta)
    if not acc_arcs or not inits:
        return InfCostResult(INF, False, None, None)
    dist, unstable, _ = _bellman_ford(useful, arcs, inits)
    if unstable:
        return InfCostResult(NEG_INF, False, None, None)
    best = None
    best_arc = None
    for arc in acc_arcs:
        ds = dist[arc.src]
        if ds is None:
            continue
        value = ds + arc.cost
        if best is None or value < best:
            best = value
            best_arc = arc
    if best is None:
        return InfCostResult(INF, False, None, None)
    parent, covered = _tight_parents(dist, arcs, inits)
    corner_word = None
    if best_arc.src in covered:
        path = []
        node = best_arc.src
        while node in parent:
            arc = parent[node]
            path.append(arc)
            node = arc.src
        path.reverse()
        path.append(best_arc)
        corner_word = _word_of_path(path)
    witness = None
    attained = False
    if corner_word is not None:
        for candidate in _perturbations(corner_word):
            if behavior(wta, candidate) == best:
                witness = candidate
                attained = True
                break
    return InfCostResult(best, attained, witness, corner_word)


def _below(value, bound, strict: bool) -> bool:
    return value < bound or (not strict and value <= bound)


def _pumped_witness(wta: WeightedTimedAutomaton, bound, strict: bool):
    """A word of behavior below the bound built by pumping a negative
    cycle of the corner-point graph, with its exact value, or None."""
    useful, arcs, inits, acc_arcs = _useful_subgraph(wta)
    if not acc_arcs or not inits:
        return None
    dist, unstable, pred = _bellman_ford(useful, arcs, inits)
    cycle = _negative_cycle(useful, arcs, inits, unstable, pred)
    if cycle is None:
        return None
    entry = cycle[0].src
    prefix = _arc_path(arcs, inits, {entry})
    tail = _arc_path(arcs, [entry], {a.src for a in acc_arcs})
    if prefix is None or tail is None:
        return None
    end = tail[-1].dst if tail else entry
    last = min((a for a in acc_arcs if a.src == end), key=lambda a: a.cost)
    suffix = tail + [last]
    fixed = sum(a.cost for a in prefix) + sum(a.cost for a in suffix)
    lap = sum(a.cost for a in cycle)
    laps = 1
    while laps <= 4096:
        if _below(fixed + laps * lap, bound, strict):
            word = _word_of_path(prefix + cycle * laps + suffix)
            if word is not None and len(word.letters) <= 4000:
                for candidate in _perturbations(word):
                    value = behavior(wta, candidate)
                    if _below(value, bound, strict):
                        return candidate, value
        laps *= 2
    return None


def witness_below(wta: WeightedTimedAutomaton, result: InfCostResult,
                  bound, strict: bool = True) -> Optional[tuple]:
    """A concrete word whose behavior lies below the bound (strictly, or
    weakly when strict is False), with its exact value, or None.

    Finite infima are probed near the optimal corner path; an infimum of
    minus infinity is chased by pumping a negative corner cycle.
    """
    if result.value is NEG_INF:
        return _pumped_witness(wta, bound, strict)
    if not is_finite(result.value) or result.corner_word is None:
        return None
    for candidate in _perturbations(result.corner_word):
        value = behavior(wta, candidate)
        if _below(value, bound, strict):
            return candidate, value
    return None


# ---------------------------------------------------------------------------
# Compiling canonical guard families into timed automata


def _match_first(formula):
    """Recognize 'no position strictly precedes v'; returns v."""
    if isinstance(formula, rdl.Not) and isinstance(formula.sub, rdl.ExistsFO):
        w = formula.sub.var
        pair = rdl.match_and(formula.sub.sub)
        if pair:
            p, q = pair
            if (isinstance(p, rdl.Leq) and isinstance(q, rdl.Not)
                    and isinstance(q.sub, rdl.Leq)):
                if (p.left == w and q.sub.right == w and p.right == q.sub.left
                        and p.right != w):
                    return p.right
    return None


def _match_last(formula):
    """Recognize 'no position strictly follows v'; returns v."""
    if isinstance(formula, rdl.Not) and isinstance(formula.sub, rdl.ExistsFO):
        w = formula.sub.var
        pair = rdl.match_and(formula.sub.sub)
        if pair:
            p, q = pair
            if (isinstance(p, rdl.Leq) and isinstance(q, rdl.Not)
                    and isinstance(q.sub, rdl.Leq)):
                if (p.right == w and q.sub.left == w and p.left == q.sub.right
                        and p.left != w):
                    return p.left
    return None


def _match_singleton(formula):
    """Recognize 'X contains exactly one position'; returns X."""
    if not isinstance(formula, rdl.ExistsFO):
        return None
    z = formula.var
    pair = rdl.match_and(formula.sub)
    if not pair:
        return None
    member, rest = pair
    if not (isinstance(member, rdl.InSet) and member.var == z):
        return None
    setvar = member.setvar
    if not (isinstance(rest, rdl.Not) and isinstance(rest.sub, rdl.ExistsFO)):
        return None
    u = rest.sub.var
    pair2 = rdl.match_and(rest.sub.sub)
    if not pair2:
        return None
    member2, diff = pair2
    if not (isinstance(member2, rdl.InSet) and member2.setvar == setvar
            and member2.var == u):
        return None
    if not isinstance(diff, rdl.Not):
        return None
    pair3 = rdl.match_and(diff.sub)
    if not pair3:
        return None
    le1, le2 = pair3
    if (isinstance(le1, rdl.Leq) and isinstance(le2, rdl.Leq)
            and le1.left == u and le1.right == z
            and le2.left == z and le2.right == u):
        return setvar
    return None


class _Analyzer:
    """Decomposes guards into per-position tests and global parts.

    Supported per-position leaves: a concrete letter test, membership of
    the position in a prefix set variable, a past-distance test (realized
    as a clock comparison), first/last position, and trivial
    reflexive orderings.  Global parts are closed formulas of the shape
    'some position satisfies a per-position test' or 'X is a singleton'.
    Anything else raises UnsupportedGuardError.
    """

    def __init__(self, so_vars):
        self.so = set(so_vars)
        self.parts = []
        self._keys = {}

    def _part(self, key, make):
        if key not in self._keys:
            self._keys[key] = len(self.parts)
            self.parts.append(make())
        return ("global", self._keys[key])

    def analyze(self, formula, pos):
        v = _match_first(formula)
        if v is not None:
            if v == pos:
                return ("first",)
            raise UnsupportedGuardError(
                f"first-position test on foreign variable {v!r}")
        v = _match_last(formula)
        if v is not None:
            if v == pos:
                return ("last",)
            raise UnsupportedGuardError(
                f"last-position test on foreign variable {v!r}")
        v = _match_singleton(formula)
        if v is not None and v in self.so:
            return self._part(("sing", v), lambda: ("singleton", v))
        if isinstance(formula, rdl.Letter):
            if formula.var == pos:
                return ("letter", formula.letter)
        elif isinstance(formula, rdl.Leq):
            if formula.left == formula.right:
                return ("true",)
        elif isinstance(formula, rdl.InSet):
            if formula.var == pos and formula.setvar in self.so:
                return ("bit", formula.setvar)
        elif isinstance(formula, rdl.Dist):
            if formula.var == pos and formula.setvar in self.so:
                if formula.rel == "=":
                    raise UnsupportedGuardError(
                        "exact-distance tests are outside the compiled fragment")
                return ("clock", formula.rel, formula.bound, formula.setvar)
        elif isinstance(formula, rdl.Not):
            return ("not", self.analyze(formula.sub, pos))
        elif isinstance(formula, rdl.Or):
            return ("or", self.analyze(formula.left, pos),
                    self.analyze(formula.right, pos))
        elif isinstance(formula, rdl.ExistsFO):
            tree = self._local(formula.sub, formula.var)
            return self._part(("exists", formula),
                              lambda: ("exists", formula.var, tree))
        raise UnsupportedGuardError(
            f"guard outside the compiled fragment: {rdl.to_text(formula)}")

    def _local(self, formula, pos):
        v = _match_first(formula)
        if v == pos:
            return ("first",)
        v = _match_last(formula)
        if v == pos:
            return ("last",)
        if isinstance(formula, rdl.Letter) and formula.var == pos:
            return ("letter", formula.letter)
        if isinstance(formula, rdl.Leq) and formula.left == formula.right:
            return ("true",)
        if isinstance(formula, rdl.InSet) and formula.var == pos \
                and formula.setvar in self.so:
            return ("bit", formula.setvar)
        if isinstance(formula, rdl.Dist) and formula.var == pos \
                and formula.setvar in self.so and formula.rel != "=":
            return ("clock", formula.rel, formula.bound, formula.setvar)
        if isinstance(formula, rdl.Not):
            return ("not", self._local(formula.sub, pos))
        if isinstance(formula, rdl.Or):
            return ("or", self._local(formula.left, pos),
                    self._local(formula.right, pos))
        raise UnsupportedGuardError(
            f"quantified body outside the per-position fragment: {rdl.to_text(formula)}")


def _eval_tree(tree, ctx):
    kind = tree[0]
    if kind == "true":
        return True
    if kind == "letter":
        return ctx["letter"] == tree[1]
    if kind == "bit":
        return tree[1] in ctx["bits"]
    if kind == "clock":
        return ctx["delta"][(tree[1], tree[2], tree[3])]
    if kind == "first":
        return ctx["first"]
    if kind == "last":
        return ctx["last"]
    if kind == "global":
        return ctx["tau"][tree[1]]
    if kind == "not":
        return not _eval_tree(tree[1], ctx)
    return _eval_tree(tree[1], ctx) or _eval_tree(tree[2], ctx)


def _clock_atoms_of(tree, acc):
    kind = tree[0]
    if kind == "clock":
        acc.add((tree[1], tree[2], tree[3]))
    elif kind == "not":
        _clock_atoms_of(tree[1], acc)
    elif kind == "or":
        _clock_atoms_of(tree[1], acc)
        _clock_atoms_of(tree[2], acc)


_COMPLEMENT = {"<=": ">", "<": ">=", ">=": "<", ">": "<="}


@dataclass(frozen=True)
class CompiledFamily:
    """A timed acceptor of the words on which the guessed branch data is
    consistent with the guard family; one accepting run per consistent
    choice of the prefix sets."""

    automaton: TimedAutomaton
    clock_of: dict


def compile_guard_family(guards, values, gamma, g, so_vars, posvar) -> CompiledFamily:
    """Build a timed automaton over ``gamma`` accepting exactly the words
    where, for some assignment of the prefix set variables, every
    position carries the value pair of its selected guard branch.

    Set membership is guessed per position; each distance variable gets a
    clock reset at its guessed positions, so past-distance tests become
    clock guards.  Closed existential parts are guessed up front and
    verified at the final transition.
    """
    analyzer = _Analyzer(so_vars)
    trees = [analyzer.analyze(guard, posvar) for guard in guards]
    parts = analyzer.parts
    atoms = set()
    for tree in trees:
        _clock_atoms_of(tree, atoms)
    for part in parts:
        if part[0] == "exists":
            _clock_atoms_of(part[2], atoms)
    atoms = sorted(atoms)
    clock_vars = sorted({a[2] for a in atoms})
    if len(so_vars) > 4 or len(parts) > 4 or len(atoms) > 4:
        raise UnsupportedGuardError(
            "guard family too large for the compiled fragment "
            f"({len(so_vars)} set variables, {len(parts)} global parts, "
            f"{len(atoms)} distance atoms)")
    clock_of = {x: f"k_{x}" for x in clock_vars}
    exists_idx = [i for i, p in enumerate(parts) if p[0] == "exists"]
    sing_vars = [p[1] for p in parts if p[0] == "singleton"]
    sing_idx = [i for i, p in enumerate(parts) if p[0] == "singleton"]

    bit_choices = [frozenset(s) for r in range(len(so_vars) + 1)
                   for s in itertools.combinations(so_vars, r)]
    deltas = [dict(zip(atoms, bits))
              for bits in itertools.product((False, True), repeat=len(atoms))]
    taus = list(itertools.product((False, True), repeat=len(parts)))

    def loc_name(state):
        phase, tau, wit, counts = state
        tau_s = "".join("1" if b else "0" for b in tau)
        wit_s = "".join("1" if b else "0" for b in wit)
        cnt_s = "".join(str(k) for k in counts)
        return f"q{phase}.{tau_s}.{wit_s}.{cnt_s}"

    starts = [(0, tau, (False,) * len(parts), (0,) * len(sing_vars))
              for tau in taus]
    seen = set(starts)
    queue = list(starts)
    edges = []
    counter = 0
    accept = "acc"
    while queue:
        state = queue.pop()
        phase, tau, wit, counts = state
        source = loc_name(state)
        for letter in gamma:
            for bits in bit_choices:
                resets = frozenset(clock_of[x] for x in bits if x in clock_of)
                for delta in deltas:
                    guard_atoms = tuple(
                        ClockAtom(clock_of[x],
                                  rel if truth else _COMPLEMENT[rel], bound)
                        for (rel, bound, x), truth in delta.items())
                    guard = ClockConstraint(guard_atoms)
                    if guard_atoms and not constraint_satisfiable(guard):
                        continue
                    for last in (False, True):
                        ctx = {"letter": letter, "bits": bits, "delta": delta,
                               "first": phase == 0, "last": last, "tau": tau}
                        new_wit = list(wit)
                        rejected = False
                        for i in exists_idx:
                            _, var, tree = parts[i]
                            if _eval_tree(tree, ctx):
                                if not tau[i]:
                                    rejected = True
                                    break
                                new_wit[i] = True
                        if rejected:
                            continue
                        truths = [_eval_tree(t, ctx) for t in trees]
                        if sum(truths) != 1:
                            continue
                        branch = truths.index(True)
                        if values[branch] != g[letter]:
                            continue
                        new_counts = tuple(
                            min(2, counts[k] + (1 if x in bits else 0))
                            for k, x in enumerate(sing_vars))
                        if last:
                            ok = all(new_wit[i] for i in exists_idx if tau[i])
                            for k, i in enumerate(sing_idx):
                                if tau[i] != (new_counts[k] == 1):
                                    ok = False
                            if not ok:
                                continue
                            target = accept
                        else:
                            nxt = (1, tau, tuple(new_wit), new_counts)
                            if nxt not in seen:
                                seen.add(nxt)
                                queue.append(nxt)
                            target = loc_name(nxt)
                        edges.append(Edge(f"e{counter}", source, letter, guard,
                                          resets, target))
                        counter += 1
    locations = tuple(loc_name(s) for s in sorted(seen)) + (accept,)
    automaton = TimedAutomaton(
        alphabet=tuple(gamma),
        locations=locations,
        clocks=tuple(clock_of[x] for x in clock_vars),
        initial=tuple(loc_name(s) for s in starts),
        final=(accept,),
        edges=tuple(edges),
        unambiguous=False,
    )
    return CompiledFamily(automaton, clock_of)


# ---------------------------------------------------------------------------
# Threshold decisions


@dataclass(frozen=True)
class DecisionResult:
    """Whether some word is valued below the threshold (strictly by
    default; weakly when the decision was made with strict=False, which
    additionally needs the infimum to be attained when it sits exactly at
    the threshold).

    ``infimum`` is the infimum of the compared quantity when it is
    computed directly (sum); for averages only the shifted infimum (of
    the rate-shifted sum, negative iff the answer is yes on positive
    durations) is reported.  The witness, when found, is a word over the
    original alphabet whose exact sentence value lies below the
    threshold.
    """

    holds: bool
    threshold: Fraction
    infimum: Optional[Weight]
    shifted_infimum: Optional[Weight]
    witness: Optional[TimedWord]
    witness_value: Optional[Weight]
    strict: bool = True


def _as_canonical(sentence, monoid) -> tuple:
    if isinstance(sentence, CanonicalSentence):
        return sentence, sentence.to_formula()
    return wrdl.canonicalize(sentence, monoid), sentence


def _composed_over_gamma(canonical, alphabet, pv):
    """The sum-weighted automaton over the auxiliary alphabet whose
    behavior at a gamma word equals the sentence value of the projected
    word, or None when every branch value is infinite.

    The auxiliary alphabet only carries finite value pairs, so the
    infimum machinery (which needs finite rationals) applies directly;
    words whose positions fall on an infinite-valued branch are excluded
    by the guard checker, matching their infinite sentence value."""
    triple = wrdl.sentence_to_nivat(canonical, tuple(alphabet), pv)
    if not triple.gamma:
        return None
    guards = wrdl.relabeled_guards(canonical, triple.gamma, triple.h)
    compiled = compile_guard_family(
        guards, tuple(zip(canonical.left, canonical.right)), triple.gamma,
        triple.g, canonical.so_vars, canonical.var)
    comp = comp_automaton(triple.gamma, triple.g, monoid_from_id("sum"))
    product = product_intersect(comp, compiled.automaton)
    return product, triple.h


def _project(word: TimedWord, h) -> TimedWord:
    return TimedWord.from_pairs((h[letter], t) for letter, t in word.entries)


def decide_sum_threshold(sentence, alphabet, threshold,
                         monoid: Optional[TimedPvMonoid] = None,
                         strict: bool = True) -> DecisionResult:
    """Decide whether some timed word is valued below the threshold
    (strictly, or weakly with strict=False) by a syntactically restricted
    sum-sentence.

    The strict question is equivalent to the infimum over all words
    lying below the threshold, so the canonical form is folded into a
    sum automaton over the auxiliary alphabet and the corner-point
    infimum is compared; the weak variant additionally accepts an
    attained infimum equal to the threshold.
    """
    pv = monoid or monoid_from_id("sum0")
    if not isinstance(pv, TimedPvMonoid) or pv.base.id != "sum":
        raise DomainError("sum threshold decisions need the sum0 monoid")
    threshold = Fraction(threshold)
    canonical, formula = _as_canonical(sentence, pv)
    composed = _composed_over_gamma(canonical, alphabet, pv)
    if composed is None:
        return DecisionResult(False, threshold, INF, None, None, None, strict)
    product, h = composed
    result = inf_cost(product)
    holds = result.value < threshold or (
        not strict and result.value == threshold and result.attained)
    witness = None
    witness_value = None
    if holds:
        found = witness_below(product, result, threshold, strict)
        if found is not None:
            candidate = _project(found[0], h)
            exact = wrdl.wrdl_eval(formula, candidate, pv)
            if _below(exact, threshold, strict):
                witness = candidate
                witness_value = exact
    return DecisionResult(holds, threshold, result.value, None,
                          witness, witness_value, strict)


def _shift_rates(wta: WeightedTimedAutomaton, delta: Fraction) -> WeightedTimedAutomaton:
    rates = {l: wta.wt_location(l) - delta for l in wta.base.locations}
    return WeightedTimedAutomaton(wta.base, wta.monoid, rates,
                                  dict(wta.edge_weights))


def _require_positive_duration(wta: WeightedTimedAutomaton) -> WeightedTimedAutomaton:
    """Accept only runs of positive total duration: a fresh never-reset
    clock must be positive on (duplicated) edges into fresh final copies."""
    base = wta.base
    stamp = "zdur"
    k = 0
    while stamp in base.clocks:
        stamp = f"zdur{k}"
        k += 1
    final = set(base.final)
    shadow = {f: f"{f}#pos" for f in final}
    edges = list(base.edges)
    edge_weights = dict(wta.edge_weights)
    rates = dict(wta.location_weights)
    positive = ClockConstraint((ClockAtom(stamp, ">", 0),))
    used = False
    for e in base.edges:
        if e.target in final:
            used = True
            eid = f"{e.id}#pos"
            edges.append(Edge(eid, e.source, e.label,
                              e.guard.conjoin(positive), e.resets,
                              shadow[e.target]))
            edge_weights[eid] = wta.wt_edge(e.id)
    for f, s in shadow.items():
        rates[s] = wta.wt_location(f)
    new_base = TimedAutomaton(
        alphabet=base.alphabet,
        locations=base.locations + tuple(shadow[f] for f in sorted(final)),
        clocks=base.clocks + (stamp,),
        initial=base.initial,
        final=tuple(shadow[f] for f in sorted(final)) if used else (),
        edges=tuple(edges),
        unambiguous=False,
    )
    return WeightedTimedAutomaton(new_base, wta.monoid, rates, edge_weights)


def decide_avg_threshold(sentence, alphabet, threshold,
                         strict: bool = True) -> DecisionResult:
    """Decide whether some positive-duration timed word is valued below
    the threshold (strictly, or weakly with strict=False) by a
    syntactically restricted average-sentence.

    On positive durations, average < threshold iff the sum with every
    rate lowered by the threshold is negative, so the shifted corner
    infimum is compared against zero under a positive-duration gate
    (minus infinity also answers yes); the weak variant additionally
    accepts an attained shifted infimum of exactly zero.
    """
    pv = monoid_from_id("avg0")
    threshold = Fraction(threshold)
    canonical, formula = _as_canonical(sentence, pv)
    composed = _composed_over_gamma(canonical, alphabet, pv)
    if composed is None:
        return DecisionResult(False, threshold, None, None, None, None, strict)
    product, h = composed
    shifted = _shift_rates(product, threshold)
    gated = _require_positive_duration(shifted)
    result = inf_cost(gated)
    holds = result.value < 0 or (
        not strict and result.value == 0 and result.attained)
    witness = None
    witness_value = None
    if holds:
        found = witness_below(gated, result, Fraction(0), strict)
        if found is not None:
            candidate = _project(found[0], h)
            exact = wrdl.wrdl_eval(formula, candidate, pv)
            if _below(exact, threshold, strict) and candidate.duration > 0:
                witness = candidate
                witness_value = exact
    return DecisionResult(holds, threshold, None, result.value,
                          witness, witness_value, strict)
