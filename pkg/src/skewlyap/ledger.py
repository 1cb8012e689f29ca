"""Certified inequality bookkeeping.

Every checked inequality becomes a :class:`LedgerEntry`.  Sides are either
exact rationals (``int``/``Fraction``), compared exactly, or mpmath
intervals, compared at their endpoints.  A verdict is ``pass`` only when the
relation holds for every point of both enclosures, ``fail`` when it fails for
every point, and ``indeterminate`` when the enclosures overlap.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

from mpmath import iv, mp, nstr

PRECISION = 128

PASS = "pass"
FAIL = "fail"
INDETERMINATE = "indeterminate"

_FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<="}


@contextmanager
def precision(bits: int = PRECISION):
    """Temporarily set the working precision (in bits) of mpmath's iv context."""
    old = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = old


def endpoints(x):
    """Exact mpf endpoints of an interval (no rounding to mp.prec)."""
    a, b = to_iv(x)._mpi_
    return mp.make_mpf(a), mp.make_mpf(b)


def is_interval(x) -> bool:
    return hasattr(x, "a") and hasattr(x, "b")


def to_iv(x):
    """Outward-rounded interval enclosure of ``x`` at the current iv precision."""
    if is_interval(x):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean is not a number")
    if isinstance(x, int):
        return iv.mpf(x)
    if isinstance(x, Rational):
        x = Fraction(x)
        return iv.mpf(x.numerator) / x.denominator
    if isinstance(x, str):
        return to_iv(Fraction(x))
    if isinstance(x, float):
        return iv.mpf(Fraction(x).numerator) / Fraction(x).denominator
    if isinstance(x, (tuple, list)) and len(x) == 2:
        lo, hi = endpoints(x[0])[0], endpoints(x[1])[1]
        return iv.mpf([lo, hi])
    return iv.mpf(x)


def hull(*xs):
    """Smallest interval containing every argument."""
    ends = [endpoints(x) for x in xs]
    lo = min(e[0] for e in ends)
    hi = max(e[1] for e in ends)
    return iv.mpf([lo, hi])


def _exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def fmt(x, digits: int = 20):
    if _exact(x):
        x = Fraction(x)
        if x.denominator == 1 and abs(x.numerator) < 10**30:
            return str(x.numerator)
        if abs(x.numerator) < 10**30 and x.denominator < 10**30:
            return f"{x.numerator}/{x.denominator}"
    lo, hi = endpoints(x)
    return [nstr(lo, digits), nstr(hi, digits)]


def decide(lhs, rel: str, rhs):
    """Return ``(verdict, margin)`` for ``lhs rel rhs``.

    The margin is oriented so that a positive margin means the relation holds:
    ``rhs - lhs`` for ``<``/``<=`` and ``lhs - rhs`` for ``>``/``>=``.
    """
    if rel not in _FLIP:
        raise ValueError(f"unknown relation {rel!r}")
    if rel in (">", ">="):
        lhs, rhs = rhs, lhs
        rel = _FLIP[rel]
    strict = rel == "<"
    if _exact(lhs) and _exact(rhs):
        margin = Fraction(rhs) - Fraction(lhs)
        ok = margin > 0 if strict else margin >= 0
        return (PASS if ok else FAIL), margin
    margin = to_iv(rhs) - to_iv(lhs)
    lo, hi = endpoints(margin)
    if (lo > 0) if strict else (lo >= 0):
        return PASS, margin
    if (hi <= 0) if strict else (hi < 0):
        return FAIL, margin
    return INDETERMINATE, margin


@dataclass
class LedgerEntry:
    name: str
    lhs: object
    rel: str
    rhs: object
    verdict: str
    margin: object
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def margin_lower(self) -> float:
        """Certified lower end of the margin, as a float (for reporting)."""
        if _exact(self.margin):
            return float(self.margin)
        return float(endpoints(self.margin)[0])

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": fmt(self.lhs),
            "rel": self.rel,
            "rhs": fmt(self.rhs),
            "verdict": self.verdict,
            "margin": fmt(self.margin, 8),
            "note": self.note,
        }


@dataclass
class Ledger:
    entries: list = field(default_factory=list)

    def check(self, name: str, lhs, rel: str, rhs, note: str = "") -> LedgerEntry:
        verdict, margin = decide(lhs, rel, rhs)
        entry = LedgerEntry(name, lhs, rel, rhs, verdict, margin, note)
        self.entries.append(entry)
        return entry

    def extend(self, other: "Ledger") -> None:
        self.entries.extend(other.entries)

    def first_failure(self):
        for e in self.entries:
            if e.verdict != PASS:
                return e
        return None

    @property
    def all_passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def verdict(self) -> str:
        if self.all_passed:
            return PASS
        if any(e.verdict == FAIL for e in self.entries):
            return FAIL
        return INDETERMINATE

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def by_name(self, name: str) -> LedgerEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)
