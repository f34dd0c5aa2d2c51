"""Flop accounting under a fixed real-operation convention.

The tally follows the usual complex-arithmetic expansion: one complex
multiplication costs 4 real multiplications and 2 real additions, one
complex addition (or subtraction) costs 2 real additions, and scaling a
complex number by a real costs 2 real multiplications.  A real division is
charged as one multiplication.  Negation and conjugation are free, as are
comparisons, copies and permutations.  Tolerance checks and other
bookkeeping are plain Python arithmetic and do not accrue.

Every piece of detector arithmetic in this package funnels through the
primitives below, so any algorithm composed from them is counted
automatically; there are no hand-maintained cost formulas on the counting
side.  Counting is scoped and thread-confined: arithmetic accrues to the
innermost `flop_scope` counter installed on the current thread, and a
nested scope rolls its delta up into the enclosing scope on exit.  With no
scope active the primitives just compute.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager


class FlopCounter:
    """Running tally of real multiplications and additions.

    Counts only ever increase while a scope is active.  Instances are
    cheap; detectors allocate one per call and return it with the result.
    """

    __slots__ = ("real_mults", "real_adds")

    def __init__(self, real_mults: int = 0, real_adds: int = 0):
        self.real_mults = real_mults
        self.real_adds = real_adds

    def copy(self) -> "FlopCounter":
        return FlopCounter(self.real_mults, self.real_adds)

    @property
    def total(self) -> int:
        return self.real_mults + self.real_adds

    def __eq__(self, other):
        if not isinstance(other, FlopCounter):
            return NotImplemented
        return (self.real_mults, self.real_adds) == (other.real_mults, other.real_adds)

    def __repr__(self):
        return f"FlopCounter(real_mults={self.real_mults}, real_adds={self.real_adds})"


class _Scope(threading.local):
    def __init__(self):
        self.current = None


_scope = _Scope()


@contextmanager
def flop_scope(counter: FlopCounter):
    """Install `counter` as the accounting target for the current thread.

    Nested scopes are hierarchical: on exit, whatever accrued inside is
    added to the enclosing scope's counter as well, so an outer scope sees
    the full cost of everything executed within its dynamic extent.
    """
    prev = _scope.current
    base_mults = counter.real_mults
    base_adds = counter.real_adds
    _scope.current = counter
    try:
        yield counter
    finally:
        _scope.current = prev
        if prev is not None and prev is not counter:
            prev.real_mults += counter.real_mults - base_mults
            prev.real_adds += counter.real_adds - base_adds


# --- counted primitives -------------------------------------------------
#
# The hot path must stay cheap when no scope is active, so each primitive
# does a single thread-local read and one branch.

def cmul(x, y):
    """Complex product: 4 real mults + 2 real adds."""
    c = _scope.current
    if c is not None:
        c.real_mults += 4
        c.real_adds += 2
    return x * y


def cadd(x, y):
    """Complex sum: 2 real adds."""
    c = _scope.current
    if c is not None:
        c.real_adds += 2
    return x + y


def csub(x, y):
    """Complex difference: 2 real adds."""
    c = _scope.current
    if c is not None:
        c.real_adds += 2
    return x - y


def rcmul(r, x):
    """Real scalar times complex: 2 real mults."""
    c = _scope.current
    if c is not None:
        c.real_mults += 2
    return r * x


def rmul(a, b):
    """Real product: 1 real mult."""
    c = _scope.current
    if c is not None:
        c.real_mults += 1
    return a * b


def radd(a, b):
    """Real sum: 1 real add."""
    c = _scope.current
    if c is not None:
        c.real_adds += 1
    return a + b


def rsub(a, b):
    """Real difference: 1 real add."""
    c = _scope.current
    if c is not None:
        c.real_adds += 1
    return a - b


def rdiv(a, b):
    """Real division, charged as one real mult by convention."""
    c = _scope.current
    if c is not None:
        c.real_mults += 1
    return a / b


def cabs2(x):
    """Squared magnitude of a complex number: 2 real mults + 1 real add."""
    c = _scope.current
    if c is not None:
        c.real_mults += 2
        c.real_adds += 1
    re = x.real
    im = x.imag
    return re * re + im * im
