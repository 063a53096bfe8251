"""Hierarchical wall-clock scope timing for operator-level profiles.

A ``TimerRegistry`` accumulates (call count, cumulative time) per named scope,
nested by activation order. Timing never touches the values being computed,
so enabling or disabling profiling cannot change any numeric output. When no
registry is active, ``scope()`` is a no-op and records nothing.

The clock is injectable so report formatting can be tested against a fake.
"""

from __future__ import annotations

import time
from contextlib import contextmanager


class ScopeNode:
    __slots__ = ("count", "total", "children")

    def __init__(self):
        self.count = 0
        self.total = 0.0
        self.children: dict[str, ScopeNode] = {}


class TimerRegistry:
    """Monotonic-clock scope timer with nested named scopes."""

    def __init__(self, clock=None):
        self.clock = clock if clock is not None else time.perf_counter
        self.root = ScopeNode()
        self._stack: list[ScopeNode] = [self.root]

    @contextmanager
    def scope(self, name: str):
        parent = self._stack[-1]
        node = parent.children.get(name)
        if node is None:
            node = parent.children[name] = ScopeNode()
        self._stack.append(node)
        start = self.clock()
        try:
            yield
        finally:
            node.total += self.clock() - start
            node.count += 1
            self._stack.pop()

    def rows(self) -> list[tuple[int, str, int, float, float]]:
        """Flattened (depth, name, count, seconds, percent-of-root) rows.

        Siblings are sorted by descending cumulative time; percent is relative
        to the total time of all top-level scopes.
        """
        total = sum(c.total for c in self.root.children.values())
        out: list[tuple[int, str, int, float, float]] = []

        def walk(node: ScopeNode, depth: int):
            items = sorted(node.children.items(), key=lambda kv: (-kv[1].total, kv[0]))
            for name, child in items:
                pct = 100.0 * child.total / total if total > 0 else 0.0
                out.append((depth, name, child.count, child.total, pct))
                walk(child, depth + 1)

        walk(self.root, 0)
        return out


_ACTIVE: TimerRegistry | None = None


@contextmanager
def activate(registry: TimerRegistry):
    """Install ``registry`` as the process-wide profiler for the block."""
    global _ACTIVE
    previous = _ACTIVE
    _ACTIVE = registry
    try:
        yield registry
    finally:
        _ACTIVE = previous


@contextmanager
def _noop():
    yield


def scope(name: str):
    """Time a named region under the active registry, or do nothing."""
    reg = _ACTIVE
    if reg is None:
        return _noop()
    return reg.scope(name)
