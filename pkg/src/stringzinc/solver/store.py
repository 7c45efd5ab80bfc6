"""Variable store: integer domains as bitsets with a per-variable offset.

Bit ``k`` of ``doms[v]`` stands for value ``off[v] + k``.  Domains are plain
Python ints, so saving the whole store for backtracking is a list copy.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator


def bits(d: int) -> Iterator[int]:
    """Indices of the set bits of ``d``, ascending."""
    while d:
        low = d & -d
        yield low.bit_length() - 1
        d ^= low


def shift(d: int, k: int) -> int:
    return d << k if k >= 0 else d >> -k


@dataclass(frozen=True)
class IntDomain:
    """Read-only snapshot of a domain as sorted inclusive ranges."""

    ranges: tuple

    @classmethod
    def from_bits(cls, d: int, off: int) -> "IntDomain":
        out = []
        for k in bits(d):
            v = off + k
            if out and out[-1][1] == v - 1:
                out[-1][1] = v
            else:
                out.append([v, v])
        return cls(tuple((a, b) for a, b in out))

    @property
    def min(self) -> int:
        return self.ranges[0][0]

    @property
    def max(self) -> int:
        return self.ranges[-1][1]

    def __len__(self) -> int:
        return sum(b - a + 1 for a, b in self.ranges)

    def __contains__(self, v: int) -> bool:
        return any(a <= v <= b for a, b in self.ranges)

    def __iter__(self) -> Iterator[int]:
        for a, b in self.ranges:
            yield from range(a, b + 1)

    def __str__(self) -> str:
        return " ∪ ".join(f"{a}..{b}" if a != b else str(a) for a, b in self.ranges) or "{}"


class Store:
    def __init__(self) -> None:
        self.off: list = []
        self.doms: list = []
        self.watch: list = []
        self.queue: deque = deque()
        self.queued: list = []
        self.props: list = []
        self.propagations = 0

    # -- construction ---------------------------------------------------------

    def new_var(self, lo: int, hi: int, values=None) -> int:
        v = len(self.doms)
        self.off.append(lo)
        if values is None:
            self.doms.append((1 << (hi - lo + 1)) - 1)
        else:
            d = 0
            for x in values:
                d |= 1 << (x - lo)
            self.doms.append(d)
        self.watch.append([])
        return v

    def add_prop(self, p) -> None:
        p.pid = len(self.props)
        self.props.append(p)
        self.queued.append(False)
        for v in set(p.watched()):
            self.watch[v].append(p)
        self.schedule(p)

    def schedule(self, p) -> None:
        if not self.queued[p.pid]:
            self.queued[p.pid] = True
            self.queue.append(p)

    # -- queries ----------------------------------------------------------------

    def min(self, v: int) -> int:
        d = self.doms[v]
        return self.off[v] + (d & -d).bit_length() - 1

    def max(self, v: int) -> int:
        return self.off[v] + self.doms[v].bit_length() - 1

    def size(self, v: int) -> int:
        return self.doms[v].bit_count()

    def fixed(self, v: int) -> bool:
        d = self.doms[v]
        return d & (d - 1) == 0

    def value(self, v: int) -> int:
        return self.off[v] + self.doms[v].bit_length() - 1

    def has(self, v: int, x: int) -> bool:
        k = x - self.off[v]
        return k >= 0 and (self.doms[v] >> k) & 1 == 1

    def values(self, v: int) -> Iterator[int]:
        o = self.off[v]
        for k in bits(self.doms[v]):
            yield o + k

    def mask(self, v: int, base: int) -> int:
        """Domain of ``v`` as a bitset relative to ``base`` (values below dropped)."""
        return shift(self.doms[v], self.off[v] - base)

    def domain(self, v: int) -> IntDomain:
        return IntDomain.from_bits(self.doms[v], self.off[v])

    # -- updates (False means the domain became empty) ----------------------------

    def set(self, v: int, d: int) -> bool:
        # intersecting keeps stale snapshots from widening an aliased variable
        d &= self.doms[v]
        if d == self.doms[v]:
            return True
        if d == 0:
            return False
        self.doms[v] = d
        for p in self.watch[v]:
            if not self.queued[p.pid]:
                self.queued[p.pid] = True
                self.queue.append(p)
        return True

    def restrict(self, v: int, m: int, base: int) -> bool:
        """Intersect the domain of ``v`` with bitset ``m`` relative to ``base``."""
        return self.set(v, self.doms[v] & shift(m, base - self.off[v]))

    def set_min(self, v: int, x: int) -> bool:
        k = x - self.off[v]
        if k <= 0:
            return True
        d = self.doms[v]
        return self.set(v, (d >> k) << k)

    def set_max(self, v: int, x: int) -> bool:
        k = x - self.off[v]
        if k < 0:
            return False
        return self.set(v, self.doms[v] & ((1 << (k + 1)) - 1))

    def assign(self, v: int, x: int) -> bool:
        k = x - self.off[v]
        if k < 0 or not (self.doms[v] >> k) & 1:
            return False
        return self.set(v, 1 << k)

    def remove(self, v: int, x: int) -> bool:
        k = x - self.off[v]
        if k < 0:
            return True
        return self.set(v, self.doms[v] & ~(1 << k))

    def intersect(self, a: int, b: int) -> bool:
        """Make the domains of ``a`` and ``b`` equal to their intersection."""
        m = self.doms[a] & self.mask(b, self.off[a])
        return self.set(a, m) and self.restrict(b, m, self.off[a])

    # -- propagation -------------------------------------------------------------

    def propagate(self) -> bool:
        q = self.queue
        queued = self.queued
        n = 0
        try:
            while q:
                p = q.popleft()
                queued[p.pid] = False
                n += 1
                if not p.propagate(self):
                    for r in q:
                        queued[r.pid] = False
                    q.clear()
                    return False
            return True
        finally:
            self.propagations += n
