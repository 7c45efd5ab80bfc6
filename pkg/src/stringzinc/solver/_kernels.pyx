# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled layered-graph filter for ``regular``; same contract as the Python one."""

from libc.stdlib cimport calloc, free
from libc.stdint cimport uint64_t

from . import _pykernels


def regular_filter(masks, int q, int s, table, int q0, finals):
    cdef Py_ssize_t n = len(masks)
    if s > 64 or q > 1 << 16:
        return _pykernels.regular_filter(masks, q, s, table, q0, finals)
    cdef Py_ssize_t i, st, a, t, w = q + 1
    cdef int *tab = <int *> calloc(q * s, sizeof(int))
    cdef uint64_t *mk = <uint64_t *> calloc(n + 1, sizeof(uint64_t))
    cdef unsigned char *reach = <unsigned char *> calloc((n + 1) * w, 1)
    cdef unsigned char *alive = <unsigned char *> calloc(2 * w, 1)
    cdef unsigned char *cur
    cdef unsigned char *nxt
    cdef uint64_t keep, m
    cdef bint any_state
    if tab == NULL or mk == NULL or reach == NULL or alive == NULL:
        free(tab); free(mk); free(reach); free(alive)
        raise MemoryError()
    try:
        for i in range(q * s):
            tab[i] = table[i]
        for i in range(n):
            mk[i] = <uint64_t> masks[i]
        reach[q0] = 1
        for i in range(n):
            m = mk[i]
            any_state = False
            for st in range(1, q + 1):
                if not reach[i * w + st]:
                    continue
                for a in range(s):
                    if (m >> a) & 1:
                        t = tab[(st - 1) * s + a]
                        if t:
                            reach[(i + 1) * w + t] = 1
                            any_state = True
            if not any_state:
                return None
        cur = alive
        nxt = alive + w
        any_state = False
        for st in range(1, q + 1):
            if reach[n * w + st] and (finals >> st) & 1:
                nxt[st] = 1
                any_state = True
        if not any_state:
            return None
        out = [0] * n
        for i in range(n - 1, -1, -1):
            m = mk[i]
            keep = 0
            for st in range(q + 1):
                cur[st] = 0
            for st in range(1, q + 1):
                if not reach[i * w + st]:
                    continue
                for a in range(s):
                    if (m >> a) & 1:
                        t = tab[(st - 1) * s + a]
                        if t and nxt[t]:
                            keep |= (<uint64_t> 1) << a
                            cur[st] = 1
            out[i] = keep
            cur, nxt = nxt, cur
        return out
    finally:
        free(tab); free(mk); free(reach); free(alive)
