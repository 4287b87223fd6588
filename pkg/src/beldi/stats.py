"""Instrumentation counters for exact-arithmetic work.

The counters exist so that CLI reports can state how much elimination
work a run performed.  They are plain module-level tallies, reset at the
start of each CLI invocation; library results never depend on them.
"""

_counters = {}


def reset():
    _counters.clear()


def bump(name, amount=1):
    _counters[name] = _counters.get(name, 0) + amount


def record_max(name, value):
    if value > _counters.get(name, 0):
        _counters[name] = value


def snapshot():
    return dict(sorted(_counters.items()))
