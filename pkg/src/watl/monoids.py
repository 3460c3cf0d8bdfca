"""Timed valuation monoids and product valuation structures.

A timed valuation monoid supplies a commutative aggregation ``plus`` with
neutral ``zero`` and a global valuation ``val`` mapping a timed sequence
of weight pairs to a single value.  The pair at position i is
(m_i, m'_i): m_i is the rate charged while waiting (per time unit) and
m'_i the discrete weight of the step itself.

Product valuation monoids additionally carry a second operation
``diamond`` with unit ``one``; they back the weighted logic semantics.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

import mpmath

from .errors import DomainError
from .weights import INF, Infinity, Weight, is_finite, to_mpf

# Working precision for the discounting valuation: comfortably past the
# 1e-9 comparison tolerance used for its values.
_DISC_DPS = 50


@dataclass(frozen=True)
class WeightPairWord:
    """Non-empty timed sequence of weight pairs ((m, m'), t)."""

    entries: tuple

    def __post_init__(self):
        if not self.entries:
            raise ValueError("weight-pair words are non-empty")
        fixed = []
        for (m, mp), t in self.entries:
            t = t if isinstance(t, Fraction) else Fraction(t)
            if t < 0:
                raise ValueError("negative duration in weight-pair word")
            fixed.append(((m, mp), t))
        object.__setattr__(self, "entries", tuple(fixed))

    @property
    def duration(self) -> Fraction:
        return sum((t for _, t in self.entries), Fraction(0))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


class TimedValuationMonoid:
    """Base class; concrete monoids override plus/val and the flags."""

    id: str = "?"
    idempotent: bool = False
    location_independent: bool = False
    # None means values are exact; otherwise compare within tolerance.
    tolerance: Optional[float] = None

    @property
    def zero(self) -> Weight:
        raise NotImplementedError

    def plus(self, x, y):
        raise NotImplementedError

    def val(self, word: WeightPairWord):
        raise NotImplementedError

    def contains(self, x) -> bool:
        raise NotImplementedError

    def require(self, x, what="weight"):
        if not self.contains(x):
            raise DomainError(f"{what} {x!r} outside domain of monoid {self.id}")

    def eq(self, x, y) -> bool:
        if isinstance(x, Infinity) or isinstance(y, Infinity):
            return x == y
        if self.tolerance is None:
            return x == y
        return abs(to_mpf(x) - to_mpf(y)) <= self.tolerance

    def sample(self, rng: random.Random) -> Weight:
        raise NotImplementedError

    def sample_time(self, rng: random.Random) -> Fraction:
        if rng.random() < 0.15:
            return Fraction(0)
        return Fraction(rng.randint(0, 12), rng.randint(1, 4))

    def sample_word(self, rng: random.Random, max_len: int = 4) -> WeightPairWord:
        n = rng.randint(1, max_len)
        return WeightPairWord(tuple(
            ((self.sample(rng), self.sample(rng)), self.sample_time(rng))
            for _ in range(n)
        ))

    def __repr__(self):
        return f"<monoid {self.id}>"


def _min_plus(x, y):
    # min with INF as neutral; works across Fraction/mpf/Infinity.
    if isinstance(x, Infinity) and x.sign > 0:
        return y
    if isinstance(y, Infinity) and y.sign > 0:
        return x
    return x if x <= y else y


class SumMonoid(TimedValuationMonoid):
    """(R ∪ {inf}, min, sum of m_i * t_i + m'_i, inf)."""

    id = "sum"
    idempotent = True
    location_independent = False

    @property
    def zero(self):
        return INF

    def plus(self, x, y):
        return _min_plus(x, y)

    def contains(self, x):
        return x is INF or isinstance(x, (Fraction, int))

    def val(self, word: WeightPairWord):
        total = Fraction(0)
        for (m, mp), t in word:
            total = total + m * t + mp
        return total

    def sample(self, rng):
        if rng.random() < 0.08:
            return INF
        return Fraction(rng.randint(-20, 20), rng.randint(1, 6))


class AvgMonoid(TimedValuationMonoid):
    """(R ∪ {inf}, min, duration-average of the sum valuation, inf).

    For zero total duration the average is m_1 when all rates agree on a
    finite value and every discrete weight is 0, and inf otherwise.
    """

    id = "avg"
    idempotent = True
    location_independent = False

    @property
    def zero(self):
        return INF

    def plus(self, x, y):
        return _min_plus(x, y)

    def contains(self, x):
        return x is INF or isinstance(x, (Fraction, int))

    def val(self, word: WeightPairWord):
        duration = word.duration
        if duration == 0:
            rates = [m for (m, _), _ in word]
            discretes = [mp for (_, mp), _ in word]
            first = rates[0]
            if is_finite(first) and all(r == first for r in rates) and all(d == 0 for d in discretes):
                return first
            return INF
        total = Fraction(0)
        for (m, mp), t in word:
            total = total + m * t + mp
        if isinstance(total, Infinity):
            return total
        return total / duration

    def sample(self, rng):
        if rng.random() < 0.08:
            return INF
        return Fraction(rng.randint(-20, 20), rng.randint(1, 6))


class DiscountMonoid(TimedValuationMonoid):
    """Discounted sum with rate lam in (0,1), computed in high precision.

    While waiting t time units under rate m the accumulated weight is the
    integral of m * lam^tau, i.e. m * (lam^t - 1) / ln lam; the discrete
    weight m' is then discounted by lam^t.  Each step's contribution is
    further discounted by lam^(elapsed time before the step).
    """

    idempotent = True
    location_independent = False
    tolerance = 1e-9

    def __init__(self, lam: Fraction):
        lam = lam if isinstance(lam, Fraction) else Fraction(lam)
        if not (0 < lam < 1):
            raise DomainError(f"discount factor must satisfy 0 < lam < 1, got {lam}")
        self.lam = lam
        self.id = f"disc:{lam}"

    @property
    def zero(self):
        return INF

    def plus(self, x, y):
        return _min_plus(x, y)

    def contains(self, x):
        return x is INF or isinstance(x, (Fraction, int, mpmath.mpf))

    def val(self, word: WeightPairWord):
        # Infinite components absorb, matching x * inf = inf even at t = 0.
        for (m, mp), t in word:
            if isinstance(m, Infinity) or isinstance(mp, Infinity):
                return INF
        with mpmath.workdps(_DISC_DPS):
            lam = to_mpf(self.lam)
            log_lam = mpmath.log(lam)
            factor = mpmath.mpf(1)
            total = mpmath.mpf(0)
            for (m, mp), t in word:
                decay = mpmath.power(lam, to_mpf(t))
                total += factor * ((decay - 1) / log_lam * to_mpf(m) + decay * to_mpf(mp))
                factor *= decay
            return total

    def sample(self, rng):
        if rng.random() < 0.08:
            return INF
        return Fraction(rng.randint(-20, 20), rng.randint(1, 6))


class ProductMonoid(TimedValuationMonoid):
    """(N, +, product of the discrete weights, 0).

    Not idempotent and location independent: the counting monoid used to
    witness why intersection needs idempotence or unambiguity.
    """

    id = "prod"
    idempotent = False
    location_independent = True

    @property
    def zero(self):
        return Fraction(0)

    def plus(self, x, y):
        return x + y

    def contains(self, x):
        return isinstance(x, (Fraction, int)) and x == int(x) and x >= 0

    def val(self, word: WeightPairWord):
        total = Fraction(1)
        for (_, mp), _ in word:
            self.require(mp, "discrete weight")
            total *= mp
        return total

    def sample(self, rng):
        return Fraction(rng.randint(0, 6))


class TimedPvMonoid(TimedValuationMonoid):
    """A timed valuation monoid with a product operation and its unit."""

    def __init__(self, base: TimedValuationMonoid, diamond: Callable, one: Weight, id: str):
        self.base = base
        self._diamond = diamond
        self.one = one
        self.id = id
        self.idempotent = base.idempotent
        self.location_independent = base.location_independent
        self.tolerance = base.tolerance

    @property
    def zero(self):
        return self.base.zero

    def plus(self, x, y):
        return self.base.plus(x, y)

    def val(self, word):
        return self.base.val(word)

    def contains(self, x):
        return self.base.contains(x)

    def diamond(self, x, y):
        return self._diamond(x, y)

    def sample(self, rng):
        return self.base.sample(rng)


def _plus_arith(x, y):
    # Arithmetic addition with inf absorbing; the diamond of the
    # rational pv-monoids.
    return x + y


def sum_over(monoid: TimedValuationMonoid, values: Iterable) -> Weight:
    """Fold plus over the values starting from zero."""
    total = monoid.zero
    for v in values:
        total = monoid.plus(total, v)
    return total


def valuate(monoid: TimedValuationMonoid, word: WeightPairWord) -> Weight:
    """Apply the monoid's global valuation to a weight-pair word."""
    return monoid.val(word)


def _pv(base: TimedValuationMonoid, id: str) -> TimedPvMonoid:
    return TimedPvMonoid(base, _plus_arith, Fraction(0), id)


_FACTORIES = {
    "sum": lambda arg: SumMonoid(),
    "avg": lambda arg: AvgMonoid(),
    "disc": lambda arg: DiscountMonoid(Fraction(arg)),
    "prod": lambda arg: ProductMonoid(),
    "sum0": lambda arg: _pv(SumMonoid(), "sum0"),
    "avg0": lambda arg: _pv(AvgMonoid(), "avg0"),
    "disc0": lambda arg: _pv(DiscountMonoid(Fraction(arg)), f"disc0:{Fraction(arg)}"),
}


def register_monoid(name: str, factory: Callable) -> None:
    """Register a custom monoid factory under a new id.

    The factory receives the (string) parameter after the colon, or None.
    Run check_axioms before trusting a custom instance.
    """
    if name in _FACTORIES:
        raise ValueError(f"monoid id {name!r} already registered")
    _FACTORIES[name] = factory


def monoid_from_id(identifier: str) -> TimedValuationMonoid:
    """Resolve 'sum', 'avg', 'disc:LAM', 'prod' and pv ids 'sum0', 'avg0', 'disc0:LAM'."""
    name, _, arg = identifier.partition(":")
    if name not in _FACTORIES:
        raise DomainError(f"unknown monoid id {identifier!r}")
    if name in ("disc", "disc0") and not arg:
        raise DomainError(f"monoid {name!r} needs a discount factor, e.g. {name}:1/2")
    return _FACTORIES[name](arg or None)


@dataclass
class AxiomReport:
    """Outcome of randomized axiom checking with failure witnesses."""

    monoid_id: str
    samples: int
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures


def _pairs_with_rates(word: WeightPairWord, rates) -> WeightPairWord:
    entries = tuple(((m, mp), t) for ((_, mp), t), m in zip(word.entries, rates))
    return WeightPairWord(entries)


def check_axioms(monoid: TimedValuationMonoid, samples: int = 1000, seed: int = 0) -> AxiomReport:
    """Randomized check of the declared algebraic laws.

    Checks plus associativity/commutativity/neutrality always, the
    idempotence and location-independence flags as declared, and the
    product-operation laws when the monoid carries one.  Failures are
    reported with witnesses rather than raised.
    """
    rng = random.Random(seed)
    failures = []

    def note(law, witness):
        if len(failures) < 20:
            failures.append((law, witness))

    for _ in range(samples):
        x, y, z = monoid.sample(rng), monoid.sample(rng), monoid.sample(rng)
        if not monoid.eq(monoid.plus(monoid.plus(x, y), z), monoid.plus(x, monoid.plus(y, z))):
            note("plus-associative", f"x={x} y={y} z={z}")
        if not monoid.eq(monoid.plus(x, y), monoid.plus(y, x)):
            note("plus-commutative", f"x={x} y={y}")
        if not monoid.eq(monoid.plus(x, monoid.zero), x):
            note("plus-neutral", f"x={x}")
        if monoid.idempotent and not monoid.eq(monoid.plus(x, x), x):
            note("plus-idempotent", f"x={x}")
        if monoid.location_independent:
            word = monoid.sample_word(rng)
            rates = [monoid.sample(rng) for _ in word.entries]
            if not monoid.eq(monoid.val(word), monoid.val(_pairs_with_rates(word, rates))):
                note("location-independent", f"word={word.entries} rates={rates}")

    if isinstance(monoid, TimedPvMonoid):
        one = monoid.one
        for _ in range(samples):
            x = monoid.sample(rng)
            if not monoid.eq(monoid.diamond(x, one), x):
                note("diamond-unit", f"x={x}")
            if not monoid.eq(monoid.diamond(x, monoid.zero), monoid.zero):
                note("diamond-zero", f"x={x}")
            n = rng.randint(1, 4)
            times = tuple(monoid.sample_time(rng) for _ in range(n))
            unit_word = WeightPairWord(tuple(((one, one), t) for t in times))
            if not monoid.eq(monoid.val(unit_word), one):
                note("val-of-units", f"times={times}")
            word = monoid.sample_word(rng)
            k = rng.randrange(len(word))
            entries = list(word.entries)
            (m, _), t = entries[k]
            entries[k] = ((m, monoid.zero), t)
            if not monoid.eq(monoid.val(WeightPairWord(tuple(entries))), monoid.zero):
                note("val-zero-propagation", f"word={tuple(entries)}")

    return AxiomReport(monoid.id, samples, failures)
