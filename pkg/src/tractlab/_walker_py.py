"""Pure-Python fallback for the compiled product walker.

Same arithmetic, same order of floating-point operations, so both backends emit
bit-identical values and tails.  The heap differs in layout but the ordering key
(value descending, position tuple ascending) is a strict total order, so the pop
sequence is the same.
"""
from __future__ import annotations

import heapq
import math

RESYNC = 2.0 ** -20  # recompute the tail from the frontier after it shrinks by this factor


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


class ProductWalker:
    def __init__(self, d, suffix, root_mass):
        self.d = int(d)
        self._suffix = [float(x) for x in suffix]
        self._hi = float(root_mass)
        self._lo = 0.0
        self._ref = self._hi
        self.emitted = 0
        # heap entries: (-value, position, value, mass, last nonzero coordinate)
        root = (0,) * self.d
        self._heap = [(-1.0, root, 1.0, float(root_mass), 0)]

    def _resync(self):
        self._hi = math.fsum(e[3] for e in self._heap)
        self._lo = 0.0
        self._ref = self._hi

    @property
    def tail(self):
        return self._hi

    @property
    def frontier_size(self):
        return len(self._heap)

    def _dd_add(self, x):
        s, e = _two_sum(self._hi, x)
        e = e + self._lo
        self._hi, self._lo = _two_sum(s, e)

    def advance(self, lam, tails, max_count, out_val, out_tail, out_pos=None):
        d = self.d
        P = lam.shape[1]
        lam_rows = [row.tolist() for row in lam]
        tail_rows = [row.tolist() for row in tails]
        suffix = self._suffix
        heap = self._heap
        n = 0
        while n < max_count and heap:
            _, pos, val, mass, L = heap[0]
            for k in range(L, d):
                if pos[k] + 1 >= P:
                    return n, k, pos[k] + 2
            out_val[n] = val
            if out_pos is not None:
                out_pos[n, :] = pos
            heapq.heappop(heap)
            self._dd_add(-mass)
            for k in range(L, d):
                child = list(pos)
                child[k] += 1
                v = 1.0
                for i in range(d):
                    v = v * lam_rows[i][child[i]]
                pp = 1.0
                for i in range(k):
                    pp = pp * lam_rows[i][child[i]]
                ms = (pp * tail_rows[k][child[k]]) * suffix[k]
                heapq.heappush(heap, (-v, tuple(child), v, ms, k))
                self._dd_add(ms)
            if self._hi < RESYNC * self._ref:
                self._resync()
            out_tail[n] = self._hi
            n += 1
            self.emitted += 1
        return n, -1, 0
