# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled best-first walk over products of per-coordinate eigenvalue streams.

Positions index each coordinate's nonincreasing stream (0 -> h=0, 2t-1 -> +t,
2t -> -t).  Nodes are expanded along a canonical spanning tree (a node with last
nonzero coordinate L only spawns children in coordinates >= L), so no visited
set is needed.  The frontier's subtree masses sum to the exact eigenvalue tail,
which is carried in double-double arithmetic.  Each incremental update is off by
rounding in the popped mass, so once the running tail has dropped by RESYNC since
the last reference point it is recomputed as the exactly rounded sum of the frontier.

Must stay operation-for-operation identical to ``_walker_py``.
"""
from libc.stdlib cimport malloc, realloc, free
from libc.string cimport memcpy

import math

cdef double RESYNC = 2.0 ** -20


cdef inline void _two_sum(double a, double b, double* s, double* e) noexcept nogil:
    cdef double ss = a + b
    cdef double bb = ss - a
    e[0] = (a - (ss - bb)) + (b - bb)
    s[0] = ss


cdef class ProductWalker:
    cdef int d
    cdef int* pos
    cdef double* val
    cdef double* mass
    cdef int* lastk
    cdef Py_ssize_t* heap
    cdef Py_ssize_t* free_ids
    cdef Py_ssize_t cap, heap_n, free_n, pool_used
    cdef double hi, lo, ref
    cdef double[::1] suffix
    cdef readonly long long emitted

    def __cinit__(self, int d, double[::1] suffix, double root_mass):
        self.d = d
        self.suffix = suffix.copy()
        self.cap = 0
        self.pos = NULL
        self.val = NULL
        self.mass = NULL
        self.lastk = NULL
        self.heap = NULL
        self.free_ids = NULL
        self._grow(64)
        self.heap_n = 0
        self.free_n = 0
        self.pool_used = 0
        self.emitted = 0
        self.hi = root_mass
        self.lo = 0.0
        self.ref = root_mass
        cdef Py_ssize_t root = self._alloc()
        cdef int i
        for i in range(d):
            self.pos[root * d + i] = 0
        self.val[root] = 1.0
        self.mass[root] = root_mass
        self.lastk[root] = 0
        self._push(root)

    def __dealloc__(self):
        free(self.pos)
        free(self.val)
        free(self.mass)
        free(self.lastk)
        free(self.heap)
        free(self.free_ids)

    cdef void _grow(self, Py_ssize_t new_cap) except *:
        cdef int* p = <int*> realloc(self.pos, new_cap * self.d * sizeof(int))
        if p == NULL:
            raise MemoryError()
        self.pos = p
        cdef double* v = <double*> realloc(self.val, new_cap * sizeof(double))
        if v == NULL:
            raise MemoryError()
        self.val = v
        v = <double*> realloc(self.mass, new_cap * sizeof(double))
        if v == NULL:
            raise MemoryError()
        self.mass = v
        p = <int*> realloc(self.lastk, new_cap * sizeof(int))
        if p == NULL:
            raise MemoryError()
        self.lastk = p
        cdef Py_ssize_t* h = <Py_ssize_t*> realloc(self.heap, new_cap * sizeof(Py_ssize_t))
        if h == NULL:
            raise MemoryError()
        self.heap = h
        h = <Py_ssize_t*> realloc(self.free_ids, new_cap * sizeof(Py_ssize_t))
        if h == NULL:
            raise MemoryError()
        self.free_ids = h
        self.cap = new_cap

    cdef Py_ssize_t _alloc(self) except -1:
        if self.free_n > 0:
            self.free_n -= 1
            return self.free_ids[self.free_n]
        if self.pool_used == self.cap:
            self._grow(2 * self.cap)
        self.pool_used += 1
        return self.pool_used - 1

    cdef inline bint _before(self, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
        cdef double va = self.val[a]
        cdef double vb = self.val[b]
        cdef int i, pa, pb
        if va != vb:
            return va > vb
        for i in range(self.d):
            pa = self.pos[a * self.d + i]
            pb = self.pos[b * self.d + i]
            if pa != pb:
                return pa < pb
        return False

    cdef void _push(self, Py_ssize_t node) noexcept nogil:
        cdef Py_ssize_t i = self.heap_n
        cdef Py_ssize_t parent
        self.heap_n += 1
        while i > 0:
            parent = (i - 1) >> 1
            if self._before(node, self.heap[parent]):
                self.heap[i] = self.heap[parent]
                i = parent
            else:
                break
        self.heap[i] = node

    cdef void _pop_top(self) noexcept nogil:
        cdef Py_ssize_t n, i, child, last
        self.heap_n -= 1
        n = self.heap_n
        if n == 0:
            return
        last = self.heap[n]
        i = 0
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            if child + 1 < n and self._before(self.heap[child + 1], self.heap[child]):
                child += 1
            if self._before(self.heap[child], last):
                self.heap[i] = self.heap[child]
                i = child
            else:
                break
        self.heap[i] = last

    cdef inline void _dd_add(self, double x) noexcept nogil:
        cdef double s, e, s2, e2
        _two_sum(self.hi, x, &s, &e)
        e = e + self.lo
        _two_sum(s, e, &s2, &e2)
        self.hi = s2
        self.lo = e2

    def _resync(self):
        cdef Py_ssize_t i
        self.hi = math.fsum([self.mass[self.heap[i]] for i in range(self.heap_n)])
        self.lo = 0.0
        self.ref = self.hi

    @property
    def tail(self):
        return self.hi

    @property
    def frontier_size(self):
        return self.heap_n

    def advance(self, double[:, ::1] lam, double[:, ::1] tails, Py_ssize_t max_count,
                double[::1] out_val, double[::1] out_tail, int[:, ::1] out_pos=None):
        """Emit up to ``max_count`` entries.

        Returns ``(emitted, need_coord, need_len)``; ``need_coord >= 0`` means the
        tables must cover at least ``need_len`` positions before resuming.
        """
        cdef int d = self.d
        cdef Py_ssize_t P = lam.shape[1]
        cdef Py_ssize_t n = 0
        cdef Py_ssize_t top, c
        cdef int L, k, i
        cdef double v, pp, ms
        cdef bint keep = out_pos is not None
        while n < max_count and self.heap_n > 0:
            top = self.heap[0]
            L = self.lastk[top]
            for k in range(L, d):
                if self.pos[top * d + k] + 1 >= P:
                    return n, k, self.pos[top * d + k] + 2
            out_val[n] = self.val[top]
            if keep:
                for i in range(d):
                    out_pos[n, i] = self.pos[top * d + i]
            self._pop_top()
            self._dd_add(-self.mass[top])
            for k in range(L, d):
                c = self._alloc()
                memcpy(&self.pos[c * d], &self.pos[top * d], d * sizeof(int))
                self.pos[c * d + k] += 1
                v = 1.0
                for i in range(d):
                    v = v * lam[i, self.pos[c * d + i]]
                pp = 1.0
                for i in range(k):
                    pp = pp * lam[i, self.pos[c * d + i]]
                ms = (pp * tails[k, self.pos[c * d + k]]) * self.suffix[k]
                self.val[c] = v
                self.mass[c] = ms
                self.lastk[c] = k
                self._push(c)
                self._dd_add(ms)
            self.free_ids[self.free_n] = top
            self.free_n += 1
            if self.hi < RESYNC * self.ref:
                self._resync()
            out_tail[n] = self.hi
            n += 1
            self.emitted += 1
        return n, -1, 0
