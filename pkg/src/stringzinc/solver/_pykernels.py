"""Pure-Python hot loops, used when the compiled extension is unavailable."""

from __future__ import annotations

from typing import Optional, Sequence


def regular_filter(masks: Sequence[int], q: int, s: int, table: Sequence[int], q0: int,
                   finals: int) -> Optional[list]:
    """Layered-graph filtering for ``regular``.

    ``masks[i]`` has bit ``a-1`` set when symbol ``a`` (1..s) is still possible
    at position ``i``.  ``table`` is the flattened q-by-s transition table with 0
    for failure, and ``finals`` a bitset over states.  Returns the supported
    masks, or None when no accepted word fits the masks.
    """
    n = len(masks)
    reach = [0] * (n + 1)
    reach[0] = 1 << q0
    for i in range(n):
        m = masks[i]
        nxt = 0
        r = reach[i]
        while r:
            low = r & -r
            st = low.bit_length() - 1
            r ^= low
            base = (st - 1) * s - 1
            mm = m
            while mm:
                lb = mm & -mm
                t = table[base + lb.bit_length()]
                if t:
                    nxt |= 1 << t
                mm ^= lb
        if not nxt:
            return None
        reach[i + 1] = nxt
    alive = reach[n] & finals
    if not alive:
        return None
    out = [0] * n
    for i in range(n - 1, -1, -1):
        m = masks[i]
        keep = 0
        back = 0
        r = reach[i]
        while r:
            low = r & -r
            st = low.bit_length() - 1
            r ^= low
            base = (st - 1) * s - 1
            mm = m
            while mm:
                lb = mm & -mm
                t = table[base + lb.bit_length()]
                if t and (alive >> t) & 1:
                    keep |= lb
                    back |= low
                mm ^= lb
        out[i] = keep
        alive = back
    return out
