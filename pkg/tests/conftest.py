"""Shared helpers plus the acceptance summary printed after each run."""

from fractions import Fraction

import mpmath

from watl.core import TimedWord


def wd(*entries):
    """Build a timed word from (letter, delay) pairs with exact delays."""
    return TimedWord(tuple((letter, Fraction(delay)) for letter, delay in entries))


def disc_quadrature(entries, lam):
    """Numerically integrate a discounted valuation, step by step.

    Independent oracle for the closed-form evaluator: the rate part of
    each step is integrated with adaptive quadrature instead of the
    antiderivative.  ``entries`` is a sequence of ((m, mp), t) triples.
    """
    def to_mpf(q):
        return mpmath.mpf(q.numerator) / mpmath.mpf(q.denominator)

    with mpmath.workdps(50):
        lam_ = to_mpf(lam)
        total = mpmath.mpf(0)
        elapsed = mpmath.mpf(0)
        for (m, mp_), t in entries:
            t_ = to_mpf(t)
            factor = lam_ ** elapsed
            rate_part = mpmath.quad(lambda tau: lam_ ** tau, [0, t_]) * to_mpf(m)
            disc_part = lam_ ** t_ * to_mpf(mp_)
            total += factor * (rate_part + disc_part)
            elapsed += t_
        return total


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[name] = report.outcome


def _criterion_number(name):
    return int(name.split("_")[2])


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=_criterion_number):
        number = _criterion_number(name)
        label = name.split(f"test_criterion_{number}_", 1)[-1].replace("_", " ")
        status = "PASS" if _ACCEPTANCE[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number} ({label}): {status}")
