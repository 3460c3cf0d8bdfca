"""Weighted timed automata over timed valuation monoids, relative
distance logic, and the translations connecting them.

The package provides:

- timed words, clock constraints and timed automata with run
  enumeration (:mod:`watl.core`);
- timed valuation monoids and product–valuation monoids with randomized
  axiom checking (:mod:`watl.monoids`);
- weighted timed automata and their behaviors (:mod:`watl.wta`);
- relabelings, valuation automata, products and the decomposition of a
  behavior into (gamma, h, g, language) triples (:mod:`watl.transform`);
- the unweighted relative distance logic with past distance predicates
  (:mod:`watl.rdl`) and its weighted extension with fragment
  classification, canonicalization and both directions of the
  logic/triple translation (:mod:`watl.wrdl`);
- corner-point optimal cost and threshold decision procedures
  (:mod:`watl.optcost`);
- JSON interchange, seeded sampling and a command-line front end
  (:mod:`watl.serialize`, :mod:`watl.sampling`, :mod:`watl.cli`).
"""

from . import rdl, sampling, serialize, wrdl  # noqa: F401
from .core import (ClockAtom, ClockConstraint, Edge, Run, TimedAutomaton,
                   TimedWord, ambiguity_probe, classify_automaton,
                   clock_step, constraint_satisfiable, enumerate_runs,
                   feasible_valuation)
from .errors import (DomainError, FragmentError, ModelValidationError,
                     ParseError, PreimageCapError, UnsoundCompositionError,
                     UnsupportedGuardError, WatlError)
from .monoids import (AvgMonoid, DiscountMonoid, ProductMonoid, SumMonoid,
                      TimedPvMonoid, TimedValuationMonoid, WeightPairWord,
                      check_axioms, monoid_from_id, register_monoid,
                      sum_over, valuate)
from .optcost import (CornerArc, CornerPointGraph, DecisionResult,
                      InfCostResult, build_corner_points,
                      decide_avg_threshold, decide_sum_threshold, inf_cost,
                      witness_below)
from .transform import (NivatTriple, comp_automaton, nivat_compose,
                        nivat_decompose, nivat_eval, product_intersect,
                        relabel)
from .rdl import parse_rdl
from .weights import (INF, NEG_INF, Infinity, format_weight, is_finite,
                      parse_weight)
from .wrdl import (CanonicalSentence, StepFunction, WrdlClassification,
                   canonicalize, nivat_to_sentence, parse_wrdl,
                   sentence_to_nivat, to_step_function, wrdl_classify,
                   wrdl_eval)
from .wta import WeightedTimedAutomaton, behavior, run_weight, wt_sharp

__all__ = [
    "AvgMonoid", "CanonicalSentence", "ClockAtom", "ClockConstraint",
    "CornerArc", "CornerPointGraph", "DecisionResult", "DiscountMonoid",
    "DomainError", "Edge", "FragmentError", "INF", "Infinity",
    "InfCostResult", "ModelValidationError", "NEG_INF", "NivatTriple",
    "ParseError", "PreimageCapError", "ProductMonoid", "Run", "StepFunction",
    "SumMonoid", "TimedAutomaton", "TimedPvMonoid", "TimedValuationMonoid",
    "TimedWord", "UnsoundCompositionError", "UnsupportedGuardError",
    "WatlError", "WeightPairWord", "WeightedTimedAutomaton",
    "WrdlClassification", "ambiguity_probe", "behavior",
    "build_corner_points", "canonicalize", "check_axioms",
    "classify_automaton", "clock_step", "comp_automaton",
    "constraint_satisfiable", "decide_avg_threshold", "decide_sum_threshold",
    "enumerate_runs", "feasible_valuation", "format_weight", "inf_cost",
    "is_finite", "monoid_from_id", "nivat_compose", "nivat_decompose",
    "nivat_eval", "nivat_to_sentence", "parse_rdl", "parse_weight",
    "parse_wrdl", "product_intersect", "register_monoid", "relabel",
    "run_weight", "sentence_to_nivat", "sum_over", "to_step_function",
    "valuate", "witness_below", "wrdl_classify", "wrdl_eval", "wt_sharp",
]
