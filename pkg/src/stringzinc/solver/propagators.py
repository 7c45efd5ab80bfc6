"""Propagators.  Each returns False on failure and may be re-run freely."""

from __future__ import annotations

from typing import Sequence

from ..semantics import int_div, int_mod
from . import kernels
from .store import Store, bits, shift

ENUM_LIMIT = 4096


class Propagator:
    pid = -1
    vars: Sequence[int] = ()

    def watched(self) -> Sequence[int]:
        return self.vars

    def propagate(self, s: Store) -> bool:
        raise NotImplementedError


def _floordiv(a: int, b: int) -> int:
    return a // b


def _ceildiv(a: int, b: int) -> int:
    return -((-a) // b)


class Linear(Propagator):
    """sum(k * x) <= c (``eq`` adds >= c, ``ne`` forbids = c)."""

    def __init__(self, coefs: Sequence[int], vs: Sequence[int], c: int, kind: str):
        self.coefs = list(coefs)
        self.vars = list(vs)
        self.c = c
        self.kind = kind

    def propagate(self, s: Store) -> bool:
        if self.kind == "ne":
            return self.prop_ne(s)
        coefs, vs, c = self.coefs, self.vars, self.c
        los = []
        his = []
        lo_sum = hi_sum = 0
        for k, v in zip(coefs, vs):
            if k > 0:
                lo, hi = k * s.min(v), k * s.max(v)
            else:
                lo, hi = k * s.max(v), k * s.min(v)
            los.append(lo)
            his.append(hi)
            lo_sum += lo
            hi_sum += hi
        if lo_sum > c:
            return False
        eq = self.kind == "eq"
        if eq and hi_sum < c:
            return False
        for i, (k, v) in enumerate(zip(coefs, vs)):
            # k * v <= c - (lo_sum - los[i])
            ub = c - lo_sum + los[i]
            if ub < his[i]:
                if k > 0:
                    if not s.set_max(v, _floordiv(ub, k)):
                        return False
                elif not s.set_min(v, _ceildiv(ub, k)):
                    return False
            if eq:
                lb = c - hi_sum + his[i]
                if lb > los[i]:
                    if k > 0:
                        if not s.set_min(v, _ceildiv(lb, k)):
                            return False
                    elif not s.set_max(v, _floordiv(lb, k)):
                        return False
        return True

    def prop_ne(self, s: Store) -> bool:
        free = None
        total = 0
        for k, v in zip(self.coefs, self.vars):
            if s.fixed(v):
                total += k * s.value(v)
            elif free is None:
                free = (k, v)
            else:
                return True
        if free is None:
            return total != self.c
        k, v = free
        rest = self.c - total
        if rest % k == 0:
            return s.remove(v, rest // k)
        return True


class Eq(Propagator):
    def __init__(self, a: int, b: int):
        self.vars = (a, b)

    def propagate(self, s: Store) -> bool:
        return s.intersect(*self.vars)


class Ne(Propagator):
    def __init__(self, a: int, b: int):
        self.vars = (a, b)

    def propagate(self, s: Store) -> bool:
        a, b = self.vars
        if a == b:
            return False
        if s.fixed(a):
            return s.remove(b, s.value(a))
        if s.fixed(b):
            return s.remove(a, s.value(b))
        return True


class Le(Propagator):
    """a + k <= b."""

    def __init__(self, a: int, b: int, k: int = 0):
        self.vars = (a, b)
        self.k = k

    def propagate(self, s: Store) -> bool:
        a, b = self.vars
        if a == b:
            return self.k <= 0
        return s.set_max(a, s.max(b) - self.k) and s.set_min(b, s.min(a) + self.k)


def _disjoint(s: Store, a: int, b: int) -> bool:
    return s.doms[a] & s.mask(b, s.off[a]) == 0


class EqReif(Propagator):
    """(a = b) <-> r, or (a != b) <-> r when ``neg``."""

    def __init__(self, a: int, b: int, r: int, neg: bool = False):
        self.vars = (a, b, r)
        self.neg = neg

    def propagate(self, s: Store) -> bool:
        a, b, r = self.vars
        if a == b:
            return s.assign(r, 0 if self.neg else 1)
        if s.fixed(r):
            want_eq = (s.value(r) == 1) != self.neg
            if want_eq:
                return s.intersect(a, b)
            if s.fixed(a):
                return s.remove(b, s.value(a))
            if s.fixed(b):
                return s.remove(a, s.value(b))
            return True
        if _disjoint(s, a, b):
            return s.assign(r, 1 if self.neg else 0)
        if s.fixed(a) and s.fixed(b):
            return s.assign(r, 0 if self.neg else 1)
        return True


class LeReif(Propagator):
    """(a <= b) <-> r."""

    def __init__(self, a: int, b: int, r: int):
        self.vars = (a, b, r)

    def propagate(self, s: Store) -> bool:
        a, b, r = self.vars
        if a == b:
            return s.assign(r, 1)
        if s.fixed(r):
            if s.value(r) == 1:
                return s.set_max(a, s.max(b)) and s.set_min(b, s.min(a))
            return s.set_max(b, s.max(a) - 1) and s.set_min(a, s.min(b) + 1)
        if s.max(a) <= s.min(b):
            return s.assign(r, 1)
        if s.min(a) > s.max(b):
            return s.assign(r, 0)
        return True


class Clause(Propagator):
    """Some ``pos`` is 1 or some ``neg`` is 0."""

    def __init__(self, pos: Sequence[int], neg: Sequence[int]):
        self.pos = list(pos)
        self.neg = list(neg)
        self.vars = self.pos + self.neg

    def propagate(self, s: Store) -> bool:
        free = None
        nfree = 0
        for v in self.pos:
            d = s.mask(v, 0)  # bit 1 is value 1, bit 0 is value 0
            if d == 2:
                return True
            if d == 3:
                nfree += 1
                free = (v, 1)
        for v in self.neg:
            d = s.mask(v, 0)
            if d == 1:
                return True
            if d == 3:
                nfree += 1
                free = (v, 0)
        if nfree == 0:
            return False
        if nfree == 1:
            return s.assign(*free)
        return True


class Element(Propagator):
    """arr[idx] = val with 1-based ``idx``; domain consistent."""

    def __init__(self, idx: int, arr: Sequence[int], val: int):
        self.idx = idx
        self.arr = list(arr)
        self.val = val
        self.vars = [idx, val] + self.arr

    def propagate(self, s: Store) -> bool:
        idx, arr, val = self.idx, self.arr, self.val
        if not (s.set_min(idx, 1) and s.set_max(idx, len(arr))):
            return False
        voff = s.off[val]
        vdom = s.doms[val]
        keep = 0
        union = 0
        ioff = s.off[idx]
        for k in bits(s.doms[idx]):
            a = arr[ioff + k - 1]
            m = s.mask(a, voff) & vdom
            if m:
                keep |= 1 << k
                union |= m
        if not s.set(idx, keep):
            return False
        if not s.set(val, vdom & union):
            return False
        if s.fixed(idx):
            return s.intersect(arr[s.value(idx) - 1], val)
        return True


def _apply(name: str, a: int, b: int):
    if name == "int_times":
        return a * b
    if name == "int_div":
        return None if b == 0 else int_div(a, b)
    if name == "int_mod":
        return None if b == 0 else int_mod(a, b)
    if name == "int_min":
        return min(a, b)
    if name == "int_max":
        return max(a, b)
    raise ValueError(name)


class Function(Propagator):
    """out = f(a, b) for times/div/mod/min/max, or out = |a| when b is None."""

    def __init__(self, name: str, a: int, b, out: int):
        self.name = name
        self.a, self.b, self.out = a, b, out
        self.vars = [a, out] if b is None else [a, b, out]

    def propagate(self, s: Store) -> bool:
        a, b, out = self.a, self.b, self.out
        na = s.size(a)
        nb = 1 if b is None else s.size(b)
        if na * nb <= ENUM_LIMIT:
            return self.enumerate(s)
        return self.bounds(s)

    def enumerate(self, s: Store) -> bool:
        a, b, out = self.a, self.b, self.out
        oo = s.off[out]
        od = s.doms[out]
        ka = kb = ko = 0
        oa, ob = s.off[a], 0 if b is None else s.off[b]
        bvals = [None] if b is None else list(bits(s.doms[b]))
        for i in bits(s.doms[a]):
            x = oa + i
            for j in bvals:
                r = abs(x) if b is None else _apply(self.name, x, ob + j)
                if r is None:
                    continue
                k = r - oo
                if k >= 0 and (od >> k) & 1:
                    ka |= 1 << i
                    ko |= 1 << k
                    if j is not None:
                        kb |= 1 << j
        if not (s.set(a, s.doms[a] & ka) and s.set(out, od & ko)):
            return False
        return b is None or s.set(b, s.doms[b] & kb)

    def bounds(self, s: Store) -> bool:
        a, b, out = self.a, self.b, self.out
        if b is None:
            lo, hi = s.min(a), s.max(a)
            m = max(abs(lo), abs(hi))
            if not s.set_max(out, m):
                return False
            if lo >= 0 or hi <= 0:
                return s.set_min(out, min(abs(lo), abs(hi)))
            return True
        alo, ahi, blo, bhi = s.min(a), s.max(a), s.min(b), s.max(b)
        if self.name == "int_times":
            ps = [alo * blo, alo * bhi, ahi * blo, ahi * bhi]
            return s.set_min(out, min(ps)) and s.set_max(out, max(ps))
        if self.name == "int_min":
            return (s.set_min(out, min(alo, blo)) and s.set_max(out, min(ahi, bhi))
                    and s.set_min(a, s.min(out)) and s.set_min(b, s.min(out)))
        if self.name == "int_max":
            return (s.set_min(out, max(alo, blo)) and s.set_max(out, max(ahi, bhi))
                    and s.set_max(a, s.max(out)) and s.set_max(b, s.max(out)))
        if self.name == "int_mod" and blo > 0:
            lim = bhi - 1
            lo = 0 if alo >= 0 else -lim
            hi = 0 if ahi <= 0 else lim
            return s.set_min(out, lo) and s.set_max(out, hi)
        if s.fixed(a) and s.fixed(b):
            r = _apply(self.name, s.value(a), s.value(b))
            return r is not None and s.assign(out, r)
        return True


class LexLessEq(Propagator):
    """xs <=lex ys over arrays of equal length."""

    def __init__(self, xs: Sequence[int], ys: Sequence[int]):
        self.xs = list(xs)
        self.ys = list(ys)
        self.vars = self.xs + self.ys

    def propagate(self, s: Store) -> bool:
        xs, ys = self.xs, self.ys
        n = len(xs)
        alpha = 0
        while alpha < n:
            x, y = xs[alpha], ys[alpha]
            if not (s.fixed(x) and s.fixed(y) and s.value(x) == s.value(y)):
                break
            alpha += 1
        if alpha == n:
            return True
        x, y = xs[alpha], ys[alpha]
        if not (s.set_max(x, s.max(y)) and s.set_min(y, s.min(x))):
            return False
        if s.max(x) < s.min(y):
            return True
        suffix_x = [s.min(v) for v in xs[alpha + 1:]]
        suffix_y = [s.max(v) for v in ys[alpha + 1:]]
        if suffix_x > suffix_y:
            return s.set_max(x, s.max(y) - 1) and s.set_min(y, s.min(x) + 1)
        return True


class Regular(Propagator):
    def __init__(self, xs: Sequence[int], q: int, ns: int, table: Sequence[int], q0: int,
                 finals):
        self.vars = list(xs)
        self.q = q
        self.ns = ns
        self.table = list(table)
        self.q0 = q0
        self.finals = 0
        for f in finals:
            self.finals |= 1 << f

    def propagate(self, s: Store) -> bool:
        if not self.vars:
            return (self.finals >> self.q0) & 1 == 1
        raw = [s.mask(v, 1) for v in self.vars]
        # values outside the symbol range 1..ns have no column in the table
        full = (1 << self.ns) - 1
        masks = [m & full for m in raw]
        out = kernels.regular_filter(masks, self.q, self.ns, self.table, self.q0, self.finals)
        if out is None:
            return False
        for v, m, old in zip(self.vars, out, raw):
            if m != old and not s.restrict(v, m, 1):
                return False
        return True


class GlobalCardinality(Propagator):
    """Value ``cover[j]`` occurs exactly ``counts[j]`` times among ``xs``."""

    def __init__(self, xs: Sequence[int], cover: Sequence[int], counts: Sequence[int]):
        self.xs = list(xs)
        self.cover = list(cover)
        self.counts = list(counts)
        self.vars = self.xs + self.counts
        self.cmask = 0
        self.base = min(cover) if cover else 0
        for c in cover:
            self.cmask |= 1 << (c - self.base)

    def propagate(self, s: Store) -> bool:
        xs, base, cmask = self.xs, self.base, self.cmask
        masks = [s.mask(x, base) for x in xs]
        for c, k in zip(self.cover, self.counts):
            bit = 1 << (c - base)
            lb = ub = 0
            for m, x in zip(masks, xs):
                if m & bit:
                    ub += 1
                    if s.fixed(x):
                        lb += 1
            if not (s.set_min(k, lb) and s.set_max(k, ub)):
                return False
            if s.max(k) == lb and ub > lb:
                for m, x in zip(masks, xs):
                    if m & bit and not s.fixed(x) and not s.remove(x, c):
                        return False
                masks = [s.mask(x, base) for x in xs]
            elif s.min(k) == ub and ub > lb:
                for m, x in zip(masks, xs):
                    if m & bit and not s.assign(x, c):
                        return False
                masks = [s.mask(x, base) for x in xs]
        # aggregate: the counts sum to the number of positions taking a cover value
        forced = possible = 0
        for m, x in zip(masks, xs):
            if m & cmask:
                possible += 1
                if s.doms[x] == shift(m & cmask, base - s.off[x]):
                    forced += 1
        kmin = [s.min(k) for k in self.counts]
        kmax = [s.max(k) for k in self.counts]
        smin, smax = sum(kmin), sum(kmax)
        if smin > possible or smax < forced:
            return False
        for j, k in enumerate(self.counts):
            if not (s.set_max(k, possible - smin + kmin[j]) and s.set_min(k, forced - smax + kmax[j])):
                return False
        if smin == possible and forced < possible:
            for m, x in zip(masks, xs):
                if m & cmask and not s.restrict(x, cmask, base):
                    return False
        elif smax == forced and forced < possible:
            for m, x in zip(masks, xs):
                if m & cmask and s.doms[x] != shift(m & cmask, base - s.off[x]):
                    if not s.set(x, s.doms[x] & ~shift(cmask, base - s.off[x])):
                        return False
        return True
