"""Global enumeration budget.

Every operation that visits field elements or ambient points checks its
total visit count against the budget before doing any work.  The default
comes from ``COVLAB_BUDGET`` when set, else 10**8.
"""

import contextlib
import os

DEFAULT_BUDGET = 10**8


class BudgetExceeded(RuntimeError):
    """Raised before an enumeration whose visit count exceeds the budget."""

    def __init__(self, requested, budget, what=""):
        self.requested = requested
        self.budget = budget
        self.what = what
        msg = f"enumeration of {requested} visits exceeds budget {budget}"
        if what:
            msg += f" ({what})"
        super().__init__(msg)


def _initial_budget():
    raw = os.environ.get("COVLAB_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    value = int(float(raw))
    if value < 1:
        raise ValueError("COVLAB_BUDGET must be >= 1")
    return value


_budget = _initial_budget()


def get_budget():
    return _budget


def set_budget(value):
    global _budget
    value = int(value)
    if value < 1:
        raise ValueError("budget must be >= 1")
    _budget = value


@contextlib.contextmanager
def budget(value):
    """Temporarily replace the global budget."""
    old = get_budget()
    set_budget(value)
    try:
        yield
    finally:
        set_budget(old)


def check_budget(visits, what=""):
    if visits > _budget:
        raise BudgetExceeded(visits, _budget, what)
